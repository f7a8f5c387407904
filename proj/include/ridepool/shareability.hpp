#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ridepool/geo_network.hpp"

namespace ridepool {

using TripId = std::uint32_t;
using UserId = std::uint32_t;

struct TripRequest {
  TripId trip_id = 0;
  UserId user_id = 0;
  NodeId origin = 0;
  NodeId dest = 0;
  double departure_s = 0.0;  // desired departure, seconds since epoch
  Route solo;                // distance-optimal solo route origin -> dest
};

// Builds a trip and routes its solo path. Throws ContractError when origin == dest.
TripRequest make_trip(RouteCache& cache, TripId id, UserId user, NodeId origin, NodeId dest,
                      double departure_s);

struct Stop {
  TripId trip = 0;
  bool pickup = true;
  NodeId node = 0;
  friend bool operator==(const Stop&, const Stop&) = default;
};

// One vehicle serving a group of riders. Per-rider vectors align with `riders`.
struct SharedRoute {
  std::vector<TripId> riders;
  std::vector<Stop> stops;
  double total_distance_m = 0.0;
  double total_time_s = 0.0;
  double start_time_s = 0.0;  // max desired departure; vehicle is at the first stop then
  std::vector<double> in_vehicle_distance_m;
  std::vector<double> dropoff_time_s;
  std::vector<double> delay_s;   // dropoff - desired departure - solo time
  std::vector<double> detour_m;  // in-vehicle distance - solo distance

  std::size_t rider_index(TripId trip) const;
};

enum class Objective { MaxSharedRides, MinTotalDistance, MinTotalTime };

std::string_view objective_name(Objective obj);  // "vehicle" | "distance" | "time"
Objective parse_objective(std::string_view name);

struct ShareabilityEdge {
  TripId a = 0;  // a < b
  TripId b = 0;
  double weight = 0.0;
  SharedRoute shared;
};

struct ConstraintParams {
  double radius_m = 3000.0;
  double max_departure_gap_s = 600.0;
};

// Trips as nodes, feasible pairings as undirected weighted edges. Trips are
// kept sorted by id and edges by (a, b).
class ShareabilityGraph {
 public:
  struct Neighbor {
    TripId trip;
    std::size_t edge;
  };

  ShareabilityGraph() = default;
  ShareabilityGraph(std::vector<TripRequest> trips, std::vector<ShareabilityEdge> edges,
                    Objective objective);

  std::span<const TripRequest> trips() const { return trips_; }
  std::span<const ShareabilityEdge> edges() const { return edges_; }
  Objective objective() const { return objective_; }

  bool has_trip(TripId id) const { return index_.contains(id); }
  std::size_t index_of(TripId id) const;
  const TripRequest& trip(TripId id) const { return trips_[index_of(id)]; }
  std::span<const Neighbor> neighbors(TripId id) const { return adjacency_[index_of(id)]; }
  const ShareabilityEdge* edge_between(TripId a, TripId b) const;

 private:
  std::vector<TripRequest> trips_;
  std::vector<ShareabilityEdge> edges_;
  Objective objective_ = Objective::MinTotalDistance;
  std::unordered_map<TripId, std::size_t> index_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

// Origin-origin and destination-destination great-circle distances both within radius.
bool social_feasible(const RoadNetwork& net, const TripRequest& a, const TripRequest& b,
                     double radius_m = 3000.0);

bool temporal_feasible(const TripRequest& a, const TripRequest& b,
                       double max_departure_gap_s = 600.0);

// Minimum-distance pooled route over the four orderings
// (Oa,Ob,Da,Db), (Oa,Ob,Db,Da), (Ob,Oa,Db,Da), (Ob,Oa,Da,Db); first listed wins ties.
SharedRoute best_shared_route(RouteCache& cache, const TripRequest& a, const TripRequest& b);
SharedRoute best_shared_route(const RoadNetwork& net, const TripRequest& a, const TripRequest& b);

// Minimum-distance route for up to four riders. Orderings visit each pickup
// before its dropoff and never leave the vehicle empty between the first
// pickup and the last dropoff. A single rider yields its solo route; two
// riders reduce to best_shared_route.
SharedRoute best_group_route(RouteCache& cache, std::span<const TripRequest* const> riders);

// Single rider travelling alone on the solo route.
SharedRoute solo_shared_route(const TripRequest& trip);

// Evaluates one fixed stop ordering (start = max desired departure).
SharedRoute evaluate_ordering(RouteCache& cache, std::span<const TripRequest* const> riders,
                              std::span<const Stop> stops);

inline constexpr std::size_t kMaxGroupSize = 4;

double edge_weight(const SharedRoute& shared, const TripRequest& a, const TripRequest& b,
                   Objective obj);

// Sum of solo savings for a routed group under an objective: distance and
// time give solo totals minus the shared total; vehicle gives 2 per co-rider.
double group_value(const SharedRoute& shared, std::span<const TripRequest* const> riders,
                   Objective obj);

ShareabilityGraph build_shareability_graph(const RoadNetwork& net, std::vector<TripRequest> trips,
                                           Objective obj, const ConstraintParams& params = {});

}  // namespace ridepool
