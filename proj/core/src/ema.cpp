#include "pamcurate/ema.hpp"

#include <algorithm>

namespace pamcurate {

void EmaConfig::validate() const {
  if (!(0.0 <= tau0 && tau0 <= tau_end && tau_end <= 1.0)) {
    throw ValidationError("EMA schedule needs 0 <= tau0 <= tau_end <= 1");
  }
  if (ramp_updates == 0) throw ValidationError("EMA ramp needs at least one update");
}

double tau_at(std::uint64_t step, const EmaConfig& config) {
  config.validate();
  if (step >= config.ramp_updates) return config.tau_end;
  const double frac = static_cast<double>(step) / static_cast<double>(config.ramp_updates);
  return std::clamp(config.tau0 + (config.tau_end - config.tau0) * frac, config.tau0,
                    config.tau_end);
}

}  // namespace pamcurate
