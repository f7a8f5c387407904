#include "ridepool/shareability.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>

#include "ridepool/error.hpp"

namespace ridepool {

TripRequest make_trip(RouteCache& cache, TripId id, UserId user, NodeId origin, NodeId dest,
                      double departure_s) {
  if (origin == dest)
    throw ContractError("trip " + std::to_string(id) + " has identical origin and destination");
  TripRequest t;
  t.trip_id = id;
  t.user_id = user;
  t.origin = origin;
  t.dest = dest;
  t.departure_s = departure_s;
  t.solo = cache.route(origin, dest);
  return t;
}

std::size_t SharedRoute::rider_index(TripId trip) const {
  const auto it = std::find(riders.begin(), riders.end(), trip);
  if (it == riders.end()) throw ContractError("trip " + std::to_string(trip) + " not on route");
  return static_cast<std::size_t>(it - riders.begin());
}

std::string_view objective_name(Objective obj) {
  switch (obj) {
    case Objective::MaxSharedRides: return "vehicle";
    case Objective::MinTotalDistance: return "distance";
    case Objective::MinTotalTime: return "time";
  }
  return "distance";
}

Objective parse_objective(std::string_view name) {
  if (name == "vehicle") return Objective::MaxSharedRides;
  if (name == "distance") return Objective::MinTotalDistance;
  if (name == "time") return Objective::MinTotalTime;
  throw ConfigError("unknown objective '" + std::string(name) +
                    "' (expected distance, time or vehicle)");
}

ShareabilityGraph::ShareabilityGraph(std::vector<TripRequest> trips,
                                     std::vector<ShareabilityEdge> edges, Objective objective)
    : trips_(std::move(trips)), edges_(std::move(edges)), objective_(objective) {
  std::sort(trips_.begin(), trips_.end(),
            [](const TripRequest& x, const TripRequest& y) { return x.trip_id < y.trip_id; });
  for (std::size_t i = 0; i < trips_.size(); ++i) {
    if (!index_.emplace(trips_[i].trip_id, i).second)
      throw StructuralError("duplicate trip id " + std::to_string(trips_[i].trip_id));
  }
  for (ShareabilityEdge& e : edges_) {
    if (e.a == e.b) throw StructuralError("self-loop on trip " + std::to_string(e.a));
    if (e.a > e.b) std::swap(e.a, e.b);
    if (!has_trip(e.a) || !has_trip(e.b))
      throw StructuralError("edge references unknown trip");
    if (!std::isfinite(e.weight)) throw StructuralError("non-finite edge weight");
  }
  std::sort(edges_.begin(), edges_.end(), [](const ShareabilityEdge& x, const ShareabilityEdge& y) {
    return std::pair(x.a, x.b) < std::pair(y.a, y.b);
  });
  adjacency_.resize(trips_.size());
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    if (k > 0 && edges_[k].a == edges_[k - 1].a && edges_[k].b == edges_[k - 1].b)
      throw StructuralError("duplicate edge " + std::to_string(edges_[k].a) + "-" +
                            std::to_string(edges_[k].b));
    adjacency_[index_of(edges_[k].a)].push_back({edges_[k].b, k});
    adjacency_[index_of(edges_[k].b)].push_back({edges_[k].a, k});
  }
  for (auto& adj : adjacency_)
    std::sort(adj.begin(), adj.end(), [](const Neighbor& x, const Neighbor& y) { return x.trip < y.trip; });
}

std::size_t ShareabilityGraph::index_of(TripId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw ContractError("unknown trip " + std::to_string(id));
  return it->second;
}

const ShareabilityEdge* ShareabilityGraph::edge_between(TripId a, TripId b) const {
  if (!has_trip(a) || !has_trip(b)) return nullptr;
  for (const Neighbor& n : adjacency_[index_of(a)])
    if (n.trip == b) return &edges_[n.edge];
  return nullptr;
}

bool social_feasible(const RoadNetwork& net, const TripRequest& a, const TripRequest& b,
                     double radius_m) {
  const double limit = radius_m + kDistanceResolutionM;
  return great_circle_distance(net.position(a.origin), net.position(b.origin)) <= limit &&
         great_circle_distance(net.position(a.dest), net.position(b.dest)) <= limit;
}

bool temporal_feasible(const TripRequest& a, const TripRequest& b, double max_departure_gap_s) {
  return std::abs(a.departure_s - b.departure_s) <= max_departure_gap_s;
}

SharedRoute evaluate_ordering(RouteCache& cache, std::span<const TripRequest* const> riders,
                              std::span<const Stop> stops) {
  const std::size_t k = riders.size();
  if (stops.size() != 2 * k) throw ContractError("ordering must hold one pickup and dropoff per rider");

  SharedRoute route;
  route.riders.reserve(k);
  for (const TripRequest* r : riders) route.riders.push_back(r->trip_id);
  route.stops.assign(stops.begin(), stops.end());
  route.start_time_s = -std::numeric_limits<double>::infinity();
  for (const TripRequest* r : riders) route.start_time_s = std::max(route.start_time_s, r->departure_s);

  std::vector<double> pickup_dist(k, -1.0);
  std::vector<char> dropped(k, 0);
  route.in_vehicle_distance_m.assign(k, 0.0);
  route.dropoff_time_s.assign(k, 0.0);
  route.delay_s.assign(k, 0.0);
  route.detour_m.assign(k, 0.0);

  double dist = 0.0;
  double time = 0.0;
  for (std::size_t s = 0; s < stops.size(); ++s) {
    if (s > 0) {
      const LegCost leg = cache.leg(stops[s - 1].node, stops[s].node);
      dist += leg.distance_m;
      time += leg.time_s;
    }
    const std::size_t i = route.rider_index(stops[s].trip);
    if (stops[s].pickup) {
      if (pickup_dist[i] >= 0.0) throw ContractError("rider picked up twice");
      pickup_dist[i] = dist;
    } else {
      if (pickup_dist[i] < 0.0 || dropped[i]) throw ContractError("dropoff before pickup");
      dropped[i] = 1;
      const TripRequest& r = *riders[i];
      route.in_vehicle_distance_m[i] = dist - pickup_dist[i];
      route.dropoff_time_s[i] = route.start_time_s + time;
      route.delay_s[i] = route.dropoff_time_s[i] - r.departure_s - r.solo.time_s;
      route.detour_m[i] = route.in_vehicle_distance_m[i] - r.solo.distance_m;
    }
  }
  route.total_distance_m = dist;
  route.total_time_s = time;
  return route;
}

SharedRoute solo_shared_route(const TripRequest& t) {
  SharedRoute r;
  r.riders = {t.trip_id};
  r.stops = {{t.trip_id, true, t.origin}, {t.trip_id, false, t.dest}};
  r.total_distance_m = t.solo.distance_m;
  r.total_time_s = t.solo.time_s;
  r.start_time_s = t.departure_s;
  r.in_vehicle_distance_m = {t.solo.distance_m};
  r.dropoff_time_s = {t.departure_s + t.solo.time_s};
  r.delay_s = {0.0};
  r.detour_m = {0.0};
  return r;
}

namespace {

struct GroupSearch {
  RouteCache& cache;
  std::span<const TripRequest* const> riders;
  std::vector<Stop> current;
  std::vector<Stop> best;
  double best_distance = std::numeric_limits<double>::infinity();
  std::array<char, kMaxGroupSize> picked{};
  std::array<char, kMaxGroupSize> dropped{};

  void extend(double dist, int onboard) {
    const std::size_t total = 2 * riders.size();
    if (current.size() == total) {
      if (dist < best_distance) {
        best_distance = dist;
        best = current;
      }
      return;
    }
    auto visit = [&](std::size_t i, bool pickup) {
      const TripRequest& r = *riders[i];
      const Stop stop{r.trip_id, pickup, pickup ? r.origin : r.dest};
      const double leg = current.empty() ? 0.0 : cache.leg(current.back().node, stop.node).distance_m;
      if (dist + leg > best_distance) return;
      current.push_back(stop);
      (pickup ? picked : dropped)[i] = 1;
      extend(dist + leg, onboard + (pickup ? 1 : -1));
      (pickup ? picked : dropped)[i] = 0;
      current.pop_back();
    };
    for (std::size_t i = 0; i < riders.size(); ++i)
      if (!picked[i]) visit(i, true);
    for (std::size_t i = 0; i < riders.size(); ++i) {
      if (!picked[i] || dropped[i]) continue;
      // emptying the vehicle is only allowed as the final stop
      if (onboard == 1 && current.size() + 1 < total) continue;
      visit(i, false);
    }
  }
};

}  // namespace

SharedRoute best_shared_route(RouteCache& cache, const TripRequest& a, const TripRequest& b) {
  const std::array<const TripRequest*, 2> riders{&a, &b};
  const Stop oa{a.trip_id, true, a.origin}, ob{b.trip_id, true, b.origin};
  const Stop da{a.trip_id, false, a.dest}, db{b.trip_id, false, b.dest};
  const std::array<std::array<Stop, 4>, 4> orderings{{
      {oa, ob, da, db},
      {oa, ob, db, da},
      {ob, oa, db, da},
      {ob, oa, da, db},
  }};
  std::optional<SharedRoute> best;
  for (const auto& ordering : orderings) {
    SharedRoute candidate = evaluate_ordering(cache, riders, ordering);
    if (!best || candidate.total_distance_m < best->total_distance_m) best = std::move(candidate);
  }
  return *best;
}

SharedRoute best_shared_route(const RoadNetwork& net, const TripRequest& a, const TripRequest& b) {
  RouteCache cache(net);
  return best_shared_route(cache, a, b);
}

SharedRoute best_group_route(RouteCache& cache, std::span<const TripRequest* const> riders) {
  if (riders.empty()) throw ContractError("group route needs at least one rider");
  if (riders.size() > kMaxGroupSize)
    throw SizeError("group routing supports at most " + std::to_string(kMaxGroupSize) + " riders");
  if (riders.size() == 1) return solo_shared_route(*riders[0]);
  if (riders.size() == 2) return best_shared_route(cache, *riders[0], *riders[1]);

  GroupSearch search{cache, riders, {}, {}};
  search.current.reserve(2 * riders.size());
  search.extend(0.0, 0);
  if (search.best.empty()) throw NoRouteError("no pooled ordering for group");
  return evaluate_ordering(cache, riders, search.best);
}

double edge_weight(const SharedRoute& shared, const TripRequest& a, const TripRequest& b,
                   Objective obj) {
  switch (obj) {
    case Objective::MaxSharedRides: return 2.0;
    case Objective::MinTotalDistance:
      return a.solo.distance_m + b.solo.distance_m - shared.total_distance_m;
    case Objective::MinTotalTime: return a.solo.time_s + b.solo.time_s - shared.total_time_s;
  }
  return 0.0;
}

double group_value(const SharedRoute& shared, std::span<const TripRequest* const> riders,
                   Objective obj) {
  if (riders.size() <= 1) return 0.0;
  double solo = 0.0;
  switch (obj) {
    case Objective::MaxSharedRides: return 2.0 * static_cast<double>(riders.size() - 1);
    case Objective::MinTotalDistance:
      for (const TripRequest* r : riders) solo += r->solo.distance_m;
      return solo - shared.total_distance_m;
    case Objective::MinTotalTime:
      for (const TripRequest* r : riders) solo += r->solo.time_s;
      return solo - shared.total_time_s;
  }
  return 0.0;
}

ShareabilityGraph build_shareability_graph(const RoadNetwork& net, std::vector<TripRequest> trips,
                                           Objective obj, const ConstraintParams& params) {
  if (trips.empty()) throw ContractError("shareability graph needs at least one trip");
  if (!(params.radius_m > 0.0)) throw ConfigError("social radius must be positive");
  if (!(params.max_departure_gap_s >= 0.0)) throw ConfigError("departure gap must be >= 0");
  std::sort(trips.begin(), trips.end(),
            [](const TripRequest& x, const TripRequest& y) { return x.trip_id < y.trip_id; });

  RouteCache cache(net);
  std::vector<ShareabilityEdge> edges;
  for (std::size_t i = 0; i < trips.size(); ++i) {
    for (std::size_t j = i + 1; j < trips.size(); ++j) {
      const TripRequest& a = trips[i];
      const TripRequest& b = trips[j];
      if (!social_feasible(net, a, b, params.radius_m)) continue;
      if (!temporal_feasible(a, b, params.max_departure_gap_s)) continue;
      SharedRoute shared;
      try {
        shared = best_shared_route(cache, a, b);
      } catch (const NoRouteError& e) {
        std::cerr << "warning: skipping pair " << a.trip_id << "-" << b.trip_id << ": " << e.what()
                  << '\n';
        continue;
      }
      const double weight = edge_weight(shared, a, b, obj);
      const double distance_saving =
          edge_weight(shared, a, b, Objective::MinTotalDistance);
      const bool keep = obj == Objective::MaxSharedRides ? distance_saving > 0.0 : weight > 0.0;
      if (keep) edges.push_back({a.trip_id, b.trip_id, weight, std::move(shared)});
    }
  }
  return ShareabilityGraph(std::move(trips), std::move(edges), obj);
}

}  // namespace ridepool
