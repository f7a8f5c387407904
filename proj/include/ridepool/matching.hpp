#pragma once

#include <span>
#include <vector>

#include "ridepool/shareability.hpp"

namespace ridepool {

// A grouping of trips into vehicles. Groups are sorted internally and by
// their first member; `routes`, when present, align with `groups`.
struct MatchingSolution {
  std::vector<std::vector<TripId>> groups;
  double objective_value = 0.0;
  std::vector<SharedRoute> routes;

  std::size_t pooled_group_count() const;
};

// Sorts members and groups, keeping routes aligned.
void canonicalize(MatchingSolution& solution);

// Every trip of `trips` appears in exactly one group and no group exceeds capacity.
bool is_partition(const MatchingSolution& solution, std::span<const TripRequest> trips,
                  std::size_t capacity);

// Routes each group with best_group_route (singletons keep their solo route).
void route_groups(MatchingSolution& solution, const ShareabilityGraph& graph, RouteCache& cache);

}  // namespace ridepool
