#include "ridepool/tolerance.hpp"

#include <cmath>
#include <string>

#include "ridepool/error.hpp"

namespace ridepool {

void ToleranceProfile::validate() const {
  if (!(tau0_s > 0.0)) throw ConfigError("tolerance.tau0 must be positive");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ConfigError("tolerance.kappa must be >= 0");
  if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("tolerance.s must lie in [0, 1]");
}

double tolerance(double delay_s, const ToleranceProfile& profile) {
  if (!(delay_s >= 0.0))
    throw ContractError("tolerance needs a non-negative delay, got " + std::to_string(delay_s));
  return std::exp(-(delay_s / profile.tau0_s) * (1.0 + profile.kappa * profile.s));
}

bool accepts(double delay_s, const ToleranceProfile& profile, Rng& rng) {
  return rng.uniform() < tolerance(delay_s, profile);
}

}  // namespace ridepool
