#include "ridepool/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "ridepool/error.hpp"

namespace ridepool {

namespace {

// Pooled groups only, in canonical order; used for tie-breaking.
std::vector<std::vector<TripId>> pooled_key(const std::vector<std::vector<TripId>>& groups) {
  std::vector<std::vector<TripId>> key;
  for (const auto& g : groups)
    if (g.size() > 1) key.push_back(g);
  std::sort(key.begin(), key.end());
  return key;
}

bool value_ties(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

MatchingSolution finish(const ShareabilityGraph& graph, std::vector<std::vector<TripId>> pooled,
                        double value) {
  std::vector<char> used(graph.trips().size(), 0);
  MatchingSolution sol;
  for (auto& g : pooled) {
    for (TripId id : g) used[graph.index_of(id)] = 1;
    sol.groups.push_back(std::move(g));
  }
  for (std::size_t i = 0; i < used.size(); ++i)
    if (!used[i]) sol.groups.push_back({graph.trips()[i].trip_id});
  sol.objective_value = value;
  canonicalize(sol);
  return sol;
}

struct PartitionSearch {
  const ShareabilityGraph& graph;
  std::size_t capacity;
  const GroupEvaluator* evaluate;  // null: pairs scored by edge weight
  std::vector<char> used;
  std::vector<std::vector<TripId>> current{};
  double current_value = 0.0;
  std::vector<std::vector<TripId>> best{};
  double best_value = 0.0;
  bool have_best = false;

  void offer() {
    if (!have_best || (current_value > best_value && !value_ties(current_value, best_value))) {
      best = current;
      best_value = current_value;
      have_best = true;
      return;
    }
    if (value_ties(current_value, best_value) && pooled_key(current) < pooled_key(best)) {
      best = current;
      best_value = current_value;
    }
  }

  void run(std::size_t from) {
    const auto trips = graph.trips();
    while (from < trips.size() && used[from]) ++from;
    if (from == trips.size()) {
      offer();
      return;
    }
    used[from] = 1;
    // leave `from` alone
    run(from + 1);
    if (evaluate == nullptr) {
      for (const auto& nb : graph.neighbors(trips[from].trip_id)) {
        const std::size_t j = graph.index_of(nb.trip);
        if (used[j] || j < from) continue;
        const double w = graph.edges()[nb.edge].weight;
        used[j] = 1;
        current.push_back({trips[from].trip_id, nb.trip});
        current_value += w;
        run(from + 1);
        current_value -= w;
        current.pop_back();
        used[j] = 0;
      }
    } else {
      std::vector<TripId> group{trips[from].trip_id};
      grow(from, from + 1, group);
    }
    used[from] = 0;
  }

  // Adds members with index >= next to `group`, evaluating every size >= 2.
  void grow(std::size_t leader, std::size_t next, std::vector<TripId>& group) {
    const auto trips = graph.trips();
    for (std::size_t j = next; j < trips.size(); ++j) {
      if (used[j]) continue;
      group.push_back(trips[j].trip_id);
      used[j] = 1;
      if (const auto v = (*evaluate)(group)) {
        current.push_back(group);
        current_value += *v;
        run(leader + 1);
        current_value -= *v;
        current.pop_back();
      }
      if (group.size() < capacity) grow(leader, j + 1, group);
      used[j] = 0;
      group.pop_back();
    }
  }
};

}  // namespace

MatchingSolution brute_force_optimal(const ShareabilityGraph& graph) {
  if (graph.trips().size() > kBruteForceMaxTrips)
    throw SizeError("brute-force matching supports at most " + std::to_string(kBruteForceMaxTrips) +
                    " trips, got " + std::to_string(graph.trips().size()));
  PartitionSearch search{graph, 2, nullptr, std::vector<char>(graph.trips().size(), 0)};
  search.run(0);
  return finish(graph, pooled_key(search.best), search.best_value);
}

MatchingSolution greedy_matching(const ShareabilityGraph& graph) {
  std::vector<const ShareabilityEdge*> order;
  for (const auto& e : graph.edges()) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(), [](const ShareabilityEdge* x, const ShareabilityEdge* y) {
    if (x->weight != y->weight) return x->weight > y->weight;
    return std::pair(x->a, x->b) < std::pair(y->a, y->b);
  });
  std::vector<char> matched(graph.trips().size(), 0);
  std::vector<std::vector<TripId>> pairs;
  double value = 0.0;
  for (const ShareabilityEdge* e : order) {
    if (!(e->weight > 0.0)) break;
    const std::size_t ia = graph.index_of(e->a), ib = graph.index_of(e->b);
    if (matched[ia] || matched[ib]) continue;
    matched[ia] = matched[ib] = 1;
    pairs.push_back({e->a, e->b});
    value += e->weight;
  }
  return finish(graph, std::move(pairs), value);
}

MatchingSolution brute_force_groups(const ShareabilityGraph& graph, std::size_t capacity,
                                    const GroupEvaluator& evaluate) {
  if (capacity < 2 || capacity > kMaxGroupSize)
    throw ContractError("group capacity must lie in [2, " + std::to_string(kMaxGroupSize) + "]");
  if (graph.trips().size() > kGroupBruteForceMaxTrips)
    throw SizeError("group brute force supports at most " +
                    std::to_string(kGroupBruteForceMaxTrips) + " trips, got " +
                    std::to_string(graph.trips().size()));
  PartitionSearch search{graph, capacity, &evaluate, std::vector<char>(graph.trips().size(), 0)};
  search.run(0);
  return finish(graph, pooled_key(search.best), search.best_value);
}

GroupEvaluator star_group_evaluator(const ShareabilityGraph& graph, RouteCache& cache) {
  return [&graph, &cache](std::span<const TripId> group) -> std::optional<double> {
    bool has_center = false;
    for (TripId center : group) {
      bool all = true;
      for (TripId other : group)
        if (other != center && graph.edge_between(center, other) == nullptr) all = false;
      if (all) {
        has_center = true;
        break;
      }
    }
    if (!has_center) return std::nullopt;
    std::vector<const TripRequest*> riders;
    for (TripId id : group) riders.push_back(&graph.trip(id));
    try {
      const SharedRoute route = best_group_route(cache, riders);
      return group_value(route, riders, graph.objective());
    } catch (const NoRouteError&) {
      return std::nullopt;
    }
  };
}

}  // namespace ridepool
