#include "ridepool/sensitivity.hpp"

#include <cmath>
#include <string>

#include "ridepool/error.hpp"
#include "ridepool/random.hpp"

namespace ridepool {

void SweepConfig::validate() const {
  if (s_values.empty()) throw ConfigError("sweep.s_values must not be empty");
  for (double s : s_values)
    if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("sweep.s_values must lie in [0, 1]");
  if (objectives.empty()) throw ConfigError("sweep.objectives must not be empty");
  if (runs_per_cell < 1) throw ConfigError("sweep.runs must be >= 1");
  if (!(social_penalty_weight >= 0.0)) throw ConfigError("sweep.social_penalty_weight must be >= 0");
  base.validate();
  embedding.validate();
  ppo.validate();
}

std::uint64_t sweep_training_seed(std::uint64_t seed, Objective objective, int run) {
  return derive_seed(seed, {0x7a1e, static_cast<std::uint64_t>(objective),
                            static_cast<std::uint64_t>(run)});
}

std::uint64_t sweep_acceptance_seed(std::uint64_t seed, int run) {
  return derive_seed(seed, {0xacce, static_cast<std::uint64_t>(run)});
}

MatchingSolution apply_tolerance(const MatchingSolution& solution, const ShareabilityGraph& graph,
                                 const ToleranceProfile& profile, std::uint64_t seed) {
  if (solution.routes.size() != solution.groups.size())
    throw StructuralError("solution groups are not routed");
  MatchingSolution out;
  for (std::size_t g = 0; g < solution.groups.size(); ++g) {
    const SharedRoute& route = solution.routes[g];
    bool keep = true;
    if (route.riders.size() > 1) {
      for (std::size_t i = 0; i < route.riders.size(); ++i) {
        Rng rng(derive_seed(seed, {route.riders[i]}));
        if (!accepts(std::max(0.0, route.delay_s[i]), profile, rng)) keep = false;
      }
    }
    if (keep) {
      out.groups.push_back(solution.groups[g]);
      out.routes.push_back(route);
      std::vector<const TripRequest*> riders;
      for (TripId id : route.riders) riders.push_back(&graph.trip(id));
      out.objective_value += group_value(route, riders, graph.objective());
    } else {
      for (TripId id : solution.groups[g]) {
        out.groups.push_back({id});
        out.routes.push_back(solo_shared_route(graph.trip(id)));
      }
    }
  }
  canonicalize(out);
  return out;
}

namespace {

void accumulate_stats(SweepCell& cell) {
  const auto n = static_cast<double>(cell.runs.size());
  std::vector<std::vector<double>> columns;
  for (const auto& r : cell.runs) {
    const auto f = r.fields();
    if (columns.empty()) columns.resize(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) columns[k].push_back(f[k].second);
  }
  std::vector<double> mean(columns.size(), 0.0), sd(columns.size(), 0.0);
  for (std::size_t k = 0; k < columns.size(); ++k) {
    for (double v : columns[k]) mean[k] += v;
    mean[k] /= n;
    if (columns[k].size() > 1) {
      for (double v : columns[k]) sd[k] += (v - mean[k]) * (v - mean[k]);
      sd[k] = std::sqrt(sd[k] / (n - 1.0));
    }
  }
  auto to_report = [](const std::vector<double>& v) {
    MetricsReport r;
    r.occupancy_rate = v[0];
    r.carpooling_rate = v[1];
    r.avg_delay_min = v[2];
    r.avg_detour_m = v[3];
    r.detour_ratio = v[4];
    r.discount_ratio = v[5];
    r.emissions_g = v[6];
    r.fuel_l = v[7];
    return r;
  };
  cell.mean = to_report(mean);
  cell.stddev = to_report(sd);
}

}  // namespace

SweepTable sensitivity_sweep(const RoadNetwork& net, std::span<const TripRequest> trips,
                             const SweepConfig& cfg) {
  cfg.validate();
  std::vector<TripRequest> trip_list(trips.begin(), trips.end());
  const GridIndex grid = GridIndex::covering(net.positions(), cfg.embedding.cell_size_deg);
  const FeatureMap features = compute_user_features(net, trip_list, grid, cfg.embedding);

  SweepTable table;
  for (Objective obj : cfg.objectives) {
    const ShareabilityGraph graph = build_shareability_graph(net, trip_list, obj, cfg.constraints);
    for (double s : cfg.s_values) {
      SweepCell cell;
      cell.objective = obj;
      cell.s = s;
      ToleranceProfile profile = cfg.base;
      profile.s = s;
      if (cfg.tolerance_off) profile = ToleranceProfile::off();
      for (int run = 0; run < cfg.runs_per_cell; ++run) {
        RewardSpec spec{obj, cfg.social_penalty_weight, profile};
        MatchEnvironment env(graph, features, spec, cfg.capacity, &net);
        PPOConfig ppo = cfg.ppo;
        ppo.seed = sweep_training_seed(cfg.seed, obj, run);
        const PolicyParams params = train_policy(env, ppo);
        const MatchingSolution matched = match_all(env, params);
        const MatchingSolution realized =
            apply_tolerance(matched, graph, profile, sweep_acceptance_seed(cfg.seed, run));
        const auto outcomes = trip_outcomes(realized, graph, cfg.factors);
        cell.runs.push_back(compute_report(realized, outcomes, cfg.factors));
      }
      accumulate_stats(cell);
      table.cells.push_back(std::move(cell));
    }
  }
  return table;
}

}  // namespace ridepool
