#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace ridepool {

inline constexpr double kEarthRadiusM = 6'371'000.0;

// Distance thresholds are inclusive at this resolution, so a pair placed
// exactly on a threshold passes whatever the last-bit rounding of the
// haversine evaluation.
inline constexpr double kDistanceResolutionM = 1e-6;

struct GeoPoint {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees

  bool valid() const { return lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0; }
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

using NodeId = std::uint32_t;

struct RoadEdge {
  NodeId from = 0;
  NodeId to = 0;
  double length_m = 0.0;
  double time_s = 0.0;
};

// Immutable road graph. Node ids are dense: node i sits at positions()[i].
class RoadNetwork {
 public:
  struct Arc {
    NodeId head;
    double length_m;
    double time_s;
  };

  RoadNetwork() = default;
  RoadNetwork(std::vector<GeoPoint> nodes, std::vector<RoadEdge> edges, bool directed = false);

  std::size_t node_count() const { return nodes_.size(); }
  bool directed() const { return directed_; }
  bool contains(NodeId id) const { return id < nodes_.size(); }

  const GeoPoint& position(NodeId id) const { return nodes_.at(id); }
  std::span<const GeoPoint> positions() const { return nodes_; }
  std::span<const RoadEdge> edges() const { return edges_; }
  std::span<const Arc> arcs_from(NodeId id) const;

 private:
  std::vector<GeoPoint> nodes_;
  std::vector<RoadEdge> edges_;
  std::vector<std::size_t> arc_offsets_;
  std::vector<Arc> arcs_;
  bool directed_ = false;
};

struct Route {
  std::vector<NodeId> nodes;
  double distance_m = 0.0;
  double time_s = 0.0;
};

// Distance/time of the distance-optimal path, without the node sequence.
struct LegCost {
  double distance_m = 0.0;
  double time_s = 0.0;
};

// rows x cols lattice with 4-neighbour edges; node id = row * cols + col,
// row 0 at the anchor latitude growing north, col 0 at the anchor
// longitude growing east.
RoadNetwork build_grid_network(int rows, int cols, double spacing_m, double speed_mps,
                               GeoPoint anchor);

// Haversine distance in meters.
double great_circle_distance(GeoPoint a, GeoPoint b);

// Nearest node by great-circle distance; ties go to the lowest id.
NodeId snap_to_node(const RoadNetwork& net, GeoPoint p);

Route shortest_path(const RoadNetwork& net, NodeId origin, NodeId dest);

// Single-source shortest-path tree keyed by distance.
struct ShortestPathTree {
  NodeId source = 0;
  std::vector<double> distance_m;
  std::vector<double> time_s;
  std::vector<NodeId> parent;  // parent[source] == source; unreachable == node_count

  bool reachable(NodeId n) const { return parent[n] != parent.size(); }
  Route route_to(NodeId dest) const;
};

ShortestPathTree shortest_path_tree(const RoadNetwork& net, NodeId source);

// Memoizes one shortest-path tree per queried source. Not thread-safe.
class RouteCache {
 public:
  explicit RouteCache(const RoadNetwork& net) : net_(&net) {}

  const RoadNetwork& network() const { return *net_; }
  LegCost leg(NodeId from, NodeId to);
  Route route(NodeId from, NodeId to);

 private:
  const ShortestPathTree& tree(NodeId source);

  const RoadNetwork* net_;
  std::unordered_map<NodeId, ShortestPathTree> trees_;
};

}  // namespace ridepool
