#include "ridepool/matching.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

namespace ridepool {

std::size_t MatchingSolution::pooled_group_count() const {
  return static_cast<std::size_t>(
      std::count_if(groups.begin(), groups.end(), [](const auto& g) { return g.size() > 1; }));
}

void canonicalize(MatchingSolution& solution) {
  for (auto& g : solution.groups) std::sort(g.begin(), g.end());
  std::vector<std::size_t> order(solution.groups.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return solution.groups[x] < solution.groups[y]; });
  std::vector<std::vector<TripId>> groups;
  std::vector<SharedRoute> routes;
  for (std::size_t i : order) {
    groups.push_back(std::move(solution.groups[i]));
    if (solution.routes.size() == order.size()) routes.push_back(std::move(solution.routes[i]));
  }
  solution.groups = std::move(groups);
  solution.routes = std::move(routes);
}

bool is_partition(const MatchingSolution& solution, std::span<const TripRequest> trips,
                  std::size_t capacity) {
  std::unordered_set<TripId> expected;
  for (const TripRequest& t : trips) expected.insert(t.trip_id);
  std::unordered_set<TripId> seen;
  for (const auto& g : solution.groups) {
    if (g.empty() || g.size() > capacity) return false;
    for (TripId id : g)
      if (!expected.contains(id) || !seen.insert(id).second) return false;
  }
  return seen.size() == expected.size();
}

void route_groups(MatchingSolution& solution, const ShareabilityGraph& graph, RouteCache& cache) {
  solution.routes.clear();
  for (const auto& g : solution.groups) {
    std::vector<const TripRequest*> riders;
    for (TripId id : g) riders.push_back(&graph.trip(id));
    solution.routes.push_back(best_group_route(cache, riders));
  }
}

}  // namespace ridepool
