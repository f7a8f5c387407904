#pragma once

#include <functional>
#include <optional>
#include <span>

#include "ridepool/matching.hpp"
#include "ridepool/shareability.hpp"

namespace ridepool {

inline constexpr std::size_t kBruteForceMaxTrips = 12;
inline constexpr std::size_t kGroupBruteForceMaxTrips = 8;

// Exhaustive maximum-weight matching (vehicle capacity 2). Among equal-value
// matchings the one whose sorted list of pooled pairs is lexicographically
// smallest wins. Throws SizeError above kBruteForceMaxTrips trips.
MatchingSolution brute_force_optimal(const ShareabilityGraph& graph);

// Edges by weight descending (ties by trip-id pair); an edge is taken when
// both endpoints are still free and its weight is positive.
MatchingSolution greedy_matching(const ShareabilityGraph& graph);

// Value of a candidate group (sorted ids, size >= 2), or nullopt if infeasible.
using GroupEvaluator = std::function<std::optional<double>(std::span<const TripId>)>;

// Exhaustive set-partition search for capacity > 2; up to kGroupBruteForceMaxTrips trips.
MatchingSolution brute_force_groups(const ShareabilityGraph& graph, std::size_t capacity,
                                    const GroupEvaluator& evaluate);

// Groups reachable by the sequential matcher: some member is a graph
// neighbour of every other member, and the pooled route exists. Value is
// group_value under the graph's objective.
GroupEvaluator star_group_evaluator(const ShareabilityGraph& graph, RouteCache& cache);

}  // namespace ridepool
