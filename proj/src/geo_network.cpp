#include "ridepool/geo_network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>

#include "ridepool/error.hpp"

namespace ridepool {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kMetersPerDegreeLat = kEarthRadiusM * kDegToRad;

}  // namespace

RoadNetwork::RoadNetwork(std::vector<GeoPoint> nodes, std::vector<RoadEdge> edges, bool directed)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), directed_(directed) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].valid())
      throw StructuralError("node " + std::to_string(i) + " has out-of-range coordinates");
  }
  std::vector<std::size_t> degree(nodes_.size() + 1, 0);
  for (const RoadEdge& e : edges_) {
    if (!contains(e.from) || !contains(e.to))
      throw StructuralError("edge " + std::to_string(e.from) + "->" + std::to_string(e.to) +
                            " references a missing node");
    if (!(e.length_m > 0.0) || !(e.time_s > 0.0) || !std::isfinite(e.length_m) ||
        !std::isfinite(e.time_s))
      throw StructuralError("edge " + std::to_string(e.from) + "->" + std::to_string(e.to) +
                            " must have positive finite length and time");
    ++degree[e.from];
    if (!directed_) ++degree[e.to];
  }
  // CSR adjacency, arcs kept in edge-list order for reproducible relaxation.
  arc_offsets_.assign(nodes_.size() + 1, 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) arc_offsets_[i + 1] = arc_offsets_[i] + degree[i];
  arcs_.resize(arc_offsets_.back());
  std::vector<std::size_t> fill(arc_offsets_.begin(), arc_offsets_.end() - 1);
  for (const RoadEdge& e : edges_) {
    arcs_[fill[e.from]++] = Arc{e.to, e.length_m, e.time_s};
    if (!directed_) arcs_[fill[e.to]++] = Arc{e.from, e.length_m, e.time_s};
  }
}

std::span<const RoadNetwork::Arc> RoadNetwork::arcs_from(NodeId id) const {
  if (!contains(id)) throw StructuralError("unknown node " + std::to_string(id));
  return std::span<const Arc>(arcs_).subspan(arc_offsets_[id], arc_offsets_[id + 1] - arc_offsets_[id]);
}

RoadNetwork build_grid_network(int rows, int cols, double spacing_m, double speed_mps,
                               GeoPoint anchor) {
  if (rows < 1 || cols < 1) throw ConfigError("grid rows and cols must be >= 1");
  if (!(spacing_m > 0.0)) throw ConfigError("grid spacing must be positive");
  if (!(speed_mps > 0.0)) throw ConfigError("grid speed must be positive");
  if (!anchor.valid()) throw ConfigError("grid anchor has out-of-range coordinates");

  const double dlat = spacing_m / kMetersPerDegreeLat;
  const double dlon = spacing_m / (kMetersPerDegreeLat * std::cos(anchor.lat * kDegToRad));
  const double edge_time = spacing_m / speed_mps;

  std::vector<GeoPoint> nodes;
  nodes.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) nodes.push_back({anchor.lat + r * dlat, anchor.lon + c * dlon});

  std::vector<RoadEdge> edges;
  auto id = [cols](int r, int c) { return static_cast<NodeId>(r * cols + c); };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.push_back({id(r, c), id(r, c + 1), spacing_m, edge_time});
      if (r + 1 < rows) edges.push_back({id(r, c), id(r + 1, c), spacing_m, edge_time});
    }
  }
  return RoadNetwork(std::move(nodes), std::move(edges));
}

double great_circle_distance(GeoPoint a, GeoPoint b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double sin_dphi = std::sin((phi2 - phi1) / 2.0);
  const double sin_dlambda = std::sin((b.lon - a.lon) * kDegToRad / 2.0);
  double h = sin_dphi * sin_dphi + std::cos(phi1) * std::cos(phi2) * sin_dlambda * sin_dlambda;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

NodeId snap_to_node(const RoadNetwork& net, GeoPoint p) {
  if (net.node_count() == 0) throw StructuralError("cannot snap to an empty network");
  NodeId best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  const auto pos = net.positions();
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const double d = great_circle_distance(pos[i], p);
    if (d < best_d) {
      best_d = d;
      best = static_cast<NodeId>(i);
    }
  }
  return best;
}

ShortestPathTree shortest_path_tree(const RoadNetwork& net, NodeId source) {
  if (!net.contains(source)) throw StructuralError("unknown node " + std::to_string(source));
  const std::size_t n = net.node_count();
  const double inf = std::numeric_limits<double>::infinity();
  ShortestPathTree tree;
  tree.source = source;
  tree.distance_m.assign(n, inf);
  tree.time_s.assign(n, inf);
  tree.parent.assign(n, static_cast<NodeId>(n));
  tree.distance_m[source] = 0.0;
  tree.time_s[source] = 0.0;
  tree.parent[source] = source;

  using Entry = std::pair<double, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  heap.push({0.0, source});
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > tree.distance_m[u]) continue;
    for (const auto& arc : net.arcs_from(u)) {
      const double nd = d + arc.length_m;
      if (nd < tree.distance_m[arc.head]) {
        tree.distance_m[arc.head] = nd;
        tree.time_s[arc.head] = tree.time_s[u] + arc.time_s;
        tree.parent[arc.head] = u;
        heap.push({nd, arc.head});
      }
    }
  }
  return tree;
}

Route ShortestPathTree::route_to(NodeId dest) const {
  if (dest >= parent.size()) throw StructuralError("unknown node " + std::to_string(dest));
  if (!reachable(dest))
    throw NoRouteError("no route from node " + std::to_string(source) + " to node " +
                       std::to_string(dest));
  Route r;
  for (NodeId cur = dest;; cur = parent[cur]) {
    r.nodes.push_back(cur);
    if (cur == source) break;
  }
  std::reverse(r.nodes.begin(), r.nodes.end());
  r.distance_m = distance_m[dest];
  r.time_s = time_s[dest];
  return r;
}

Route shortest_path(const RoadNetwork& net, NodeId origin, NodeId dest) {
  if (!net.contains(dest)) throw StructuralError("unknown node " + std::to_string(dest));
  return shortest_path_tree(net, origin).route_to(dest);
}

const ShortestPathTree& RouteCache::tree(NodeId source) {
  auto it = trees_.find(source);
  if (it == trees_.end()) it = trees_.emplace(source, shortest_path_tree(*net_, source)).first;
  return it->second;
}

LegCost RouteCache::leg(NodeId from, NodeId to) {
  if (!net_->contains(to)) throw StructuralError("unknown node " + std::to_string(to));
  const ShortestPathTree& t = tree(from);
  if (!t.reachable(to))
    throw NoRouteError("no route from node " + std::to_string(from) + " to node " +
                       std::to_string(to));
  return {t.distance_m[to], t.time_s[to]};
}

Route RouteCache::route(NodeId from, NodeId to) { return tree(from).route_to(to); }

}  // namespace ridepool
