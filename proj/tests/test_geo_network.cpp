#include <gtest/gtest.h>

#include <functional>

#include "ridepool/error.hpp"
#include "ridepool/geo_network.hpp"
#include "support.hpp"

using namespace ridepool;

namespace {

const GeoPoint kOrigin{0.0, 0.0};

// Shortest of the (possibly parallel) arcs a -> b.
bool adjacent(const RoadNetwork& net, NodeId a, NodeId b, double* length, double* time) {
  bool found = false;
  for (const auto& arc : net.arcs_from(a))
    if (arc.head == b && (!found || arc.length_m < *length)) {
      *length = arc.length_m;
      *time = arc.time_s;
      found = true;
    }
  return found;
}

}  // namespace

TEST(GridNetwork, TwoByTwo) {
  const RoadNetwork net = build_grid_network(2, 2, 1000.0, 10.0, kOrigin);
  EXPECT_EQ(net.node_count(), 4u);
  ASSERT_EQ(net.edges().size(), 4u);
  for (const auto& e : net.edges()) {
    EXPECT_EQ(e.length_m, 1000.0);
    EXPECT_EQ(e.time_s, 100.0);
  }
}

TEST(GridNetwork, SingleNodeHasNoEdges) {
  const RoadNetwork net = build_grid_network(1, 1, 1000.0, 10.0, kOrigin);
  EXPECT_EQ(net.node_count(), 1u);
  EXPECT_TRUE(net.edges().empty());
}

TEST(GridNetwork, EdgeCountMatchesEnumeration) {
  for (int r = 1; r <= 5; ++r)
    for (int c = 1; c <= 5; ++c) {
      const RoadNetwork net = build_grid_network(r, c, 500.0, 10.0, kOrigin);
      std::size_t expected = 0;
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) expected += (j + 1 < c) + (i + 1 < r);
      EXPECT_EQ(net.edges().size(), expected) << r << "x" << c;
    }
  EXPECT_EQ(build_grid_network(3, 3, 500.0, 10.0, kOrigin).edges().size(), 12u);
}

TEST(GridNetwork, LatticeSpacingIsMetric) {
  const RoadNetwork net = build_grid_network(3, 4, 500.0, 10.0, {31.2, 121.4});
  // East and north neighbours both sit one spacing away on the sphere.
  EXPECT_NEAR(great_circle_distance(net.position(0), net.position(1)), 500.0, 1e-3);
  EXPECT_NEAR(great_circle_distance(net.position(0), net.position(4)), 500.0, 1e-3);
}

TEST(GridNetwork, RejectsBadParameters) {
  EXPECT_THROW(build_grid_network(2, 2, 0.0, 10.0, kOrigin), ConfigError);
  EXPECT_THROW(build_grid_network(2, 2, 100.0, -1.0, kOrigin), ConfigError);
  EXPECT_THROW(build_grid_network(0, 2, 100.0, 10.0, kOrigin), ConfigError);
}

TEST(RoadNetwork, RejectsInvalidEdges) {
  std::vector<GeoPoint> nodes{{0, 0}, {0, 1}};
  EXPECT_THROW(RoadNetwork(nodes, {{0, 2, 10.0, 1.0}}), StructuralError);
  EXPECT_THROW(RoadNetwork(nodes, {{0, 1, 0.0, 1.0}}), StructuralError);
  EXPECT_THROW(RoadNetwork(nodes, {{0, 1, 10.0, -1.0}}), StructuralError);
  EXPECT_THROW(RoadNetwork({{95.0, 0.0}}, {}), StructuralError);
}

TEST(GreatCircle, IdentityIsZero) {
  const GeoPoint p{31.2, 121.4};
  EXPECT_EQ(great_circle_distance(p, p), 0.0);
}

TEST(GreatCircle, OneDegreeOfLongitudeAtEquator) {
  EXPECT_NEAR(great_circle_distance({0, 0}, {0, 1}), 111194.9, 0.1);
}

TEST(GreatCircle, SymmetricAndMatchesReference) {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const GeoPoint a{rng.uniform(-89, 89), rng.uniform(-179, 179)};
    const GeoPoint b{rng.uniform(-89, 89), rng.uniform(-179, 179)};
    EXPECT_EQ(great_circle_distance(a, b), great_circle_distance(b, a));
    EXPECT_GE(great_circle_distance(a, b), 0.0);
    EXPECT_NEAR(great_circle_distance(a, b), ref::haversine(a, b), 1e-6);
  }
}

TEST(Snap, ExactNodeCoordinates) {
  const RoadNetwork net = build_grid_network(4, 4, 500.0, 10.0, {31.2, 121.4});
  for (NodeId i = 0; i < net.node_count(); ++i) EXPECT_EQ(snap_to_node(net, net.position(i)), i);
}

TEST(Snap, TiesGoToLowestId) {
  // Nodes 3 and 7 are mirror images around the query point; other nodes are far.
  std::vector<GeoPoint> nodes;
  for (int i = 0; i < 8; ++i) nodes.push_back({10.0 + i, 10.0});
  nodes[3] = {0.0, -0.01};
  nodes[7] = {0.0, 0.01};
  const RoadNetwork net(nodes, {});
  EXPECT_EQ(snap_to_node(net, {0.0, 0.0}), 3u);
}

TEST(Snap, OutsideBoxGoesToNearestCornerByScan) {
  const RoadNetwork net = build_grid_network(5, 5, 500.0, 10.0, {31.2, 121.4});
  Rng rng(5);
  for (int k = 0; k < 50; ++k) {
    const GeoPoint p{31.2 + rng.uniform(-0.1, 0.15), 121.4 + rng.uniform(-0.1, 0.15)};
    NodeId best = 0;
    for (NodeId i = 1; i < net.node_count(); ++i)
      if (ref::haversine(net.position(i), p) < ref::haversine(net.position(best), p)) best = i;
    EXPECT_EQ(snap_to_node(net, p), best);
  }
  EXPECT_EQ(snap_to_node(net, {31.0, 121.0}), 0u);
  EXPECT_EQ(snap_to_node(net, {32.0, 122.0}), 24u);
}

TEST(Snap, EmptyNetworkIsStructuralError) {
  EXPECT_THROW(snap_to_node(RoadNetwork{}, {0, 0}), StructuralError);
}

TEST(ShortestPath, SameNodeIsEmptyRoute) {
  const RoadNetwork net = build_grid_network(3, 3, 1000.0, 10.0, kOrigin);
  const Route r = shortest_path(net, 4, 4);
  EXPECT_EQ(r.distance_m, 0.0);
  EXPECT_EQ(r.time_s, 0.0);
  EXPECT_EQ(r.nodes, std::vector<NodeId>{4});
}

TEST(ShortestPath, OppositeCornersMatchPathEnumeration) {
  const RoadNetwork net = build_grid_network(3, 3, 1000.0, 10.0, kOrigin);
  // Enumerate all simple paths 0 -> 8 by DFS.
  double best = std::numeric_limits<double>::infinity();
  std::vector<char> seen(9, 0);
  std::function<void(NodeId, double)> dfs = [&](NodeId u, double d) {
    if (u == 8) {
      best = std::min(best, d);
      return;
    }
    seen[u] = 1;
    for (const auto& arc : net.arcs_from(u))
      if (!seen[arc.head]) dfs(arc.head, d + arc.length_m);
    seen[u] = 0;
  };
  dfs(0, 0.0);
  const Route r = shortest_path(net, 0, 8);
  EXPECT_EQ(r.distance_m, best);
  EXPECT_EQ(r.distance_m, 4000.0);
  EXPECT_EQ(r.time_s, 400.0);
}

TEST(ShortestPath, DisconnectedPairIsNoRoute) {
  // Two components joined by nothing after the bridge is removed.
  std::vector<GeoPoint> nodes{{0, 0}, {0, 0.01}, {0, 0.02}, {0, 0.03}};
  const RoadNetwork bridged(nodes, {{0, 1, 100, 10}, {1, 2, 100, 10}, {2, 3, 100, 10}});
  EXPECT_NO_THROW(shortest_path(bridged, 0, 3));
  const RoadNetwork cut(nodes, {{0, 1, 100, 10}, {2, 3, 100, 10}});
  EXPECT_THROW(shortest_path(cut, 0, 3), NoRouteError);
}

TEST(ShortestPath, DirectedEdgesAreOneWay) {
  std::vector<GeoPoint> nodes{{0, 0}, {0, 0.01}};
  const RoadNetwork net(nodes, {{0, 1, 100, 10}}, /*directed=*/true);
  EXPECT_EQ(shortest_path(net, 0, 1).distance_m, 100.0);
  EXPECT_THROW(shortest_path(net, 1, 0), NoRouteError);
}

TEST(ShortestPath, AgreesWithFloydWarshallAndSumsEdges) {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const RoadNetwork net = ref::random_integer_network(rng, 12, 10);
    const auto ap = ref::floyd_warshall(net);
    for (NodeId a = 0; a < net.node_count(); ++a)
      for (NodeId b = 0; b < net.node_count(); ++b) {
        const Route r = shortest_path(net, a, b);
        EXPECT_EQ(r.distance_m, ap.dist[a][b]);
        ASSERT_EQ(r.nodes.front(), a);
        ASSERT_EQ(r.nodes.back(), b);
        double len = 0.0, time = 0.0;
        for (std::size_t k = 0; k + 1 < r.nodes.size(); ++k) {
          double l = 0, t = 0;
          ASSERT_TRUE(adjacent(net, r.nodes[k], r.nodes[k + 1], &l, &t));
          len += l;
          time += t;
        }
        EXPECT_EQ(len, r.distance_m);
        EXPECT_EQ(time, r.time_s);
      }
  }
}

TEST(ShortestPath, TriangleInequalityAndSymmetryOnSmallGrids) {
  for (int n = 2; n <= 5; ++n) {
    const RoadNetwork net = build_grid_network(n, n, 300.0, 10.0, {31.2, 121.4});
    const auto ap = ref::floyd_warshall(net);
    std::vector<std::vector<double>> d(net.node_count());
    for (NodeId a = 0; a < net.node_count(); ++a) d[a] = shortest_path_tree(net, a).distance_m;
    for (NodeId a = 0; a < net.node_count(); ++a)
      for (NodeId b = 0; b < net.node_count(); ++b) {
        EXPECT_EQ(d[a][b], d[b][a]);
        EXPECT_EQ(d[a][b], ap.dist[a][b]);
        for (NodeId c = 0; c < net.node_count(); ++c) EXPECT_LE(d[a][c], d[a][b] + d[b][c]);
      }
  }
}

TEST(RouteCache, MatchesDirectQueries) {
  const RoadNetwork net = build_grid_network(4, 5, 400.0, 8.0, kOrigin);
  RouteCache cache(net);
  for (NodeId a = 0; a < net.node_count(); a += 3)
    for (NodeId b = 0; b < net.node_count(); ++b) {
      const Route direct = shortest_path(net, a, b);
      const LegCost leg = cache.leg(a, b);
      EXPECT_EQ(leg.distance_m, direct.distance_m);
      EXPECT_EQ(leg.time_s, direct.time_s);
      EXPECT_EQ(cache.route(a, b).nodes, direct.nodes);
    }
}
