#pragma once

// Independent reference computations shared by the unit tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "ridepool/geo_network.hpp"
#include "ridepool/random.hpp"

namespace ridepool::ref {

// All-pairs distances, plus the time along the chosen distance-shortest path.
struct AllPairs {
  std::vector<std::vector<double>> dist;
  std::vector<std::vector<double>> time;
};

inline AllPairs floyd_warshall(const RoadNetwork& net) {
  const std::size_t n = net.node_count();
  const double inf = std::numeric_limits<double>::infinity();
  AllPairs ap{std::vector<std::vector<double>>(n, std::vector<double>(n, inf)),
              std::vector<std::vector<double>>(n, std::vector<double>(n, inf))};
  for (std::size_t i = 0; i < n; ++i) ap.dist[i][i] = ap.time[i][i] = 0.0;
  for (const RoadEdge& e : net.edges()) {
    auto relax = [&](NodeId u, NodeId v) {
      if (e.length_m < ap.dist[u][v]) {
        ap.dist[u][v] = e.length_m;
        ap.time[u][v] = e.time_s;
      }
    };
    relax(e.from, e.to);
    if (!net.directed()) relax(e.to, e.from);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (ap.dist[i][k] + ap.dist[k][j] < ap.dist[i][j]) {
          ap.dist[i][j] = ap.dist[i][k] + ap.dist[k][j];
          ap.time[i][j] = ap.time[i][k] + ap.time[k][j];
        }
  return ap;
}

inline double haversine(GeoPoint a, GeoPoint b) {
  const double rad = std::numbers::pi / 180.0;
  const double dlat = (b.lat - a.lat) * rad;
  const double dlon = (b.lon - a.lon) * rad;
  const double h = std::pow(std::sin(dlat / 2), 2) +
                   std::cos(a.lat * rad) * std::cos(b.lat * rad) * std::pow(std::sin(dlon / 2), 2);
  return 2.0 * 6371000.0 * std::asin(std::min(1.0, std::sqrt(h)));
}

// Connected network with integer lengths (multiples of 10 m) and time = length / 10,
// so every path sum is exact.
inline RoadNetwork random_integer_network(Rng& rng, std::size_t n, std::size_t extra_edges) {
  std::vector<GeoPoint> nodes;
  for (std::size_t i = 0; i < n; ++i)
    nodes.push_back({30.0 + rng.uniform(0.0, 0.02), 120.0 + rng.uniform(0.0, 0.02)});
  std::vector<RoadEdge> edges;
  auto add = [&](NodeId a, NodeId b) {
    const double k = static_cast<double>(10 + rng.below(90));
    edges.push_back({a, b, 10.0 * k, k});
  };
  for (NodeId i = 1; i < n; ++i) add(static_cast<NodeId>(rng.below(i)), i);
  for (std::size_t e = 0; e < extra_edges; ++e) {
    const auto a = static_cast<NodeId>(rng.below(n));
    const auto b = static_cast<NodeId>(rng.below(n));
    if (a != b) add(a, b);
  }
  return RoadNetwork(std::move(nodes), std::move(edges));
}

}  // namespace ridepool::ref
