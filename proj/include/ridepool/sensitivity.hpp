#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ridepool/embedding.hpp"
#include "ridepool/matching.hpp"
#include "ridepool/metrics.hpp"
#include "ridepool/policy.hpp"
#include "ridepool/shareability.hpp"
#include "ridepool/tolerance.hpp"

namespace ridepool {

struct SweepConfig {
  std::vector<double> s_values{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<Objective> objectives{Objective::MinTotalDistance, Objective::MinTotalTime,
                                    Objective::MaxSharedRides};
  int runs_per_cell = 1;
  std::uint64_t seed = 0;
  ToleranceProfile base;       // tau0 and kappa; s comes from s_values
  bool tolerance_off = false;  // every cell uses ToleranceProfile::off()
  double social_penalty_weight = 1.0;
  std::size_t capacity = kDefaultCapacity;
  ConstraintParams constraints;
  EmbeddingConfig embedding;
  PPOConfig ppo;  // ppo.seed is replaced per (objective, run)
  CostFactors factors;

  void validate() const;
};

struct SweepCell {
  Objective objective = Objective::MinTotalDistance;
  double s = 0.0;
  MetricsReport mean;
  MetricsReport stddev;  // sample standard deviation over runs; 0 for one run
  std::vector<MetricsReport> runs;
};

struct SweepTable {
  std::vector<SweepCell> cells;  // objectives outer, s inner
};

// Policy training seed for one (objective, run); shared by every s so that
// cells differ only through the tolerance profile.
std::uint64_t sweep_training_seed(std::uint64_t seed, Objective objective, int run);
// Seed of the per-trip acceptance draws of one run, also shared across s.
std::uint64_t sweep_acceptance_seed(std::uint64_t seed, int run);

// Dissolves every pooled group in which some rider rejects its delay. Each
// trip consumes one uniform draw from a stream keyed by (seed, trip id).
MatchingSolution apply_tolerance(const MatchingSolution& solution, const ShareabilityGraph& graph,
                                 const ToleranceProfile& profile, std::uint64_t seed);

SweepTable sensitivity_sweep(const RoadNetwork& net, std::span<const TripRequest> trips,
                             const SweepConfig& cfg);

}  // namespace ridepool
