#pragma once

#include <limits>

#include "ridepool/random.hpp"

namespace ridepool {

// Willingness to accept a pooled ride given its delay:
//   T(delay) = exp(-(delay / tau0) * (1 + kappa * s))
// where s in [0, 1] is the rider's social-distancing sensitivity.
struct ToleranceProfile {
  double tau0_s = 900.0;
  double kappa = 2.0;
  double s = 0.0;

  // tau0 = +inf: every delay is tolerated (the pre-tolerance baseline).
  static ToleranceProfile off() { return {std::numeric_limits<double>::infinity(), 0.0, 0.0}; }
  bool is_off() const { return tau0_s == std::numeric_limits<double>::infinity(); }

  void validate() const;
};

// Throws ContractError for negative delay.
double tolerance(double delay_s, const ToleranceProfile& profile);

// Bernoulli draw: uniform(0,1) < tolerance.
bool accepts(double delay_s, const ToleranceProfile& profile, Rng& rng);

}  // namespace ridepool
