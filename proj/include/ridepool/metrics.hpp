#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ridepool/matching.hpp"
#include "ridepool/shareability.hpp"

namespace ridepool {

// Per-km factors; configuration inputs, not an emission model.
struct CostFactors {
  double emission_g_per_km = 180.0;
  double fuel_l_per_km = 0.075;
  double fare_per_km = 1.5;
};

struct TripOutcome {
  TripId trip_id = 0;
  bool shared = false;
  double solo_distance_m = 0.0;
  double solo_time_s = 0.0;
  double in_vehicle_distance_m = 0.0;
  double door_to_door_time_s = 0.0;  // dropoff - desired departure
  double fare_solo = 0.0;
  double fare_paid = 0.0;
};

struct MetricsReport {
  double occupancy_rate = 0.0;
  double carpooling_rate = 0.0;
  double avg_delay_min = 0.0;
  double avg_detour_m = 0.0;
  double detour_ratio = 0.0;
  double discount_ratio = 0.0;
  double emissions_g = 0.0;
  double fuel_l = 0.0;

  // Field names and values in the fixed export order.
  std::vector<std::pair<std::string, double>> fields() const;
};

// One outcome per rider of every routed group. Fares split the vehicle
// route by each rider's share of the group's solo distance.
std::vector<TripOutcome> trip_outcomes(const MatchingSolution& solution,
                                       const ShareabilityGraph& graph, const CostFactors& factors);

// Sum of group route distances in meters.
double vehicle_distance_m(const MatchingSolution& solution);

// Throws CoverageError when a trip of the solution has no outcome.
MetricsReport compute_report(const MatchingSolution& solution, std::span<const TripOutcome> outcomes,
                             const CostFactors& factors);

}  // namespace ridepool
