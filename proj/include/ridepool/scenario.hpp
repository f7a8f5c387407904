#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ridepool/embedding.hpp"
#include "ridepool/geo_network.hpp"
#include "ridepool/metrics.hpp"
#include "ridepool/policy.hpp"
#include "ridepool/sensitivity.hpp"
#include "ridepool/shareability.hpp"
#include "ridepool/tolerance.hpp"

namespace ridepool {

struct NetworkConfig {
  int rows = 20;
  int cols = 20;
  double spacing_m = 500.0;
  double speed_mps = 10.0;
  GeoPoint anchor{31.20, 121.40};
};

struct DemandConfig {
  int n_trips = 50;
  int n_users = 25;
  int hotspots = 4;
  double hotspot_spread_m = 800.0;  // std-dev of the Gaussian offset around a hotspot
  double departure_start_s = 0.0;
  double departure_window_s = 3600.0;
};

struct SweepSettings {
  std::vector<double> s_values{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<Objective> objectives{Objective::MinTotalDistance, Objective::MinTotalTime,
                                    Objective::MaxSharedRides};
  int runs = 2;
  int updates = 40;  // PPO updates per cell
  double social_penalty_weight = 1.0;
  bool tolerance_off = false;
};

// Everything one seeded run needs. Sub-component seeds are derived from `seed`.
struct ScenarioConfig {
  NetworkConfig network;
  DemandConfig demand;
  ConstraintParams constraints;
  Objective objective = Objective::MinTotalDistance;
  std::size_t capacity = kDefaultCapacity;
  EmbeddingConfig embedding;
  PPOConfig ppo{.updates = 100};
  ToleranceProfile tolerance;
  double social_penalty_weight = 0.0;
  CostFactors factors;
  SweepSettings sweep;
  std::uint64_t seed = 42;

  // Throws ConfigError naming the offending field.
  void validate() const;

  EmbeddingConfig resolved_embedding() const;
  PPOConfig resolved_ppo() const;
  SweepConfig resolved_sweep() const;
  std::uint64_t demand_seed() const;
};

// INI-style text: `key = value` lines grouped under [network], [demand],
// [constraints], [matching], [embedding], [ppo], [tolerance], [metrics],
// [sweep]; `seed` sits at top level. Unknown keys are rejected.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

// Every resolved setting as (section.key, value) in a fixed order; parseable
// back through parse_config.
std::vector<std::pair<std::string, std::string>> config_entries(const ScenarioConfig& cfg);
std::string format_config(const ScenarioConfig& cfg);

struct Scenario {
  RoadNetwork network;
  std::vector<TripRequest> trips;
};

// Grid network plus seeded hotspot-mixture demand with uniform departures.
Scenario generate_scenario(const ScenarioConfig& cfg);

}  // namespace ridepool
