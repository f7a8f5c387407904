#include "ridepool/metrics.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

#include "ridepool/error.hpp"

namespace ridepool {

std::vector<std::pair<std::string, double>> MetricsReport::fields() const {
  return {{"occupancy_rate", occupancy_rate}, {"carpooling_rate", carpooling_rate},
          {"avg_delay_min", avg_delay_min},   {"avg_detour_m", avg_detour_m},
          {"detour_ratio", detour_ratio},     {"discount_ratio", discount_ratio},
          {"emissions_g", emissions_g},       {"fuel_l", fuel_l}};
}

std::vector<TripOutcome> trip_outcomes(const MatchingSolution& solution,
                                       const ShareabilityGraph& graph, const CostFactors& factors) {
  if (solution.routes.size() != solution.groups.size())
    throw StructuralError("solution groups are not routed");
  std::vector<TripOutcome> out;
  for (std::size_t g = 0; g < solution.groups.size(); ++g) {
    const SharedRoute& route = solution.routes[g];
    double group_solo = 0.0;
    for (TripId id : route.riders) group_solo += graph.trip(id).solo.distance_m;
    for (std::size_t i = 0; i < route.riders.size(); ++i) {
      const TripRequest& t = graph.trip(route.riders[i]);
      TripOutcome o;
      o.trip_id = t.trip_id;
      o.shared = route.riders.size() > 1;
      o.solo_distance_m = t.solo.distance_m;
      o.solo_time_s = t.solo.time_s;
      o.fare_solo = factors.fare_per_km * t.solo.distance_m / 1000.0;
      if (o.shared) {
        o.in_vehicle_distance_m = route.in_vehicle_distance_m[i];
        o.door_to_door_time_s = route.dropoff_time_s[i] - t.departure_s;
        o.fare_paid = factors.fare_per_km * route.total_distance_m / 1000.0 *
                      (t.solo.distance_m / group_solo);
      } else {
        o.in_vehicle_distance_m = t.solo.distance_m;
        o.door_to_door_time_s = t.solo.time_s;
        o.fare_paid = o.fare_solo;
      }
      out.push_back(o);
    }
  }
  return out;
}

double vehicle_distance_m(const MatchingSolution& solution) {
  double total = 0.0;
  for (const SharedRoute& r : solution.routes) total += r.total_distance_m;
  return total;
}

MetricsReport compute_report(const MatchingSolution& solution, std::span<const TripOutcome> outcomes,
                             const CostFactors& factors) {
  std::unordered_map<TripId, const TripOutcome*> by_trip;
  for (const TripOutcome& o : outcomes) by_trip[o.trip_id] = &o;

  MetricsReport r;
  std::size_t trips = 0;
  std::size_t shared = 0;
  double passenger_m = 0.0;
  double delay_s = 0.0, detour_m = 0.0, extra_m = 0.0, shared_solo_m = 0.0, discount = 0.0;
  for (const auto& group : solution.groups) {
    for (TripId id : group) {
      const auto it = by_trip.find(id);
      if (it == by_trip.end()) throw CoverageError("no outcome for trip " + std::to_string(id));
      const TripOutcome& o = *it->second;
      ++trips;
      passenger_m += o.in_vehicle_distance_m;
      if (!o.shared) continue;
      ++shared;
      const double extra = std::max(0.0, o.in_vehicle_distance_m - o.solo_distance_m);
      delay_s += std::max(0.0, o.door_to_door_time_s - o.solo_time_s);
      detour_m += extra;
      extra_m += extra;
      shared_solo_m += o.solo_distance_m;
      if (o.fare_solo > 0.0) discount += 1.0 - o.fare_paid / o.fare_solo;
    }
  }
  const double vehicle_m = vehicle_distance_m(solution);
  r.occupancy_rate = vehicle_m > 0.0 ? passenger_m / vehicle_m : 0.0;
  r.carpooling_rate = trips > 0 ? static_cast<double>(shared) / static_cast<double>(trips) : 0.0;
  if (shared > 0) {
    const auto n = static_cast<double>(shared);
    r.avg_delay_min = delay_s / n / 60.0;
    r.avg_detour_m = detour_m / n;
    r.discount_ratio = discount / n;
  }
  r.detour_ratio = shared_solo_m > 0.0 ? extra_m / shared_solo_m : 0.0;
  r.emissions_g = vehicle_m / 1000.0 * factors.emission_g_per_km;
  r.fuel_l = vehicle_m / 1000.0 * factors.fuel_l_per_km;
  return r;
}

}  // namespace ridepool
