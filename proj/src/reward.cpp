#include "reflexq/reward.hpp"

#include <algorithm>
#include <cmath>

#include "reflexq/errors.hpp"

namespace reflexq {

RewardConfig RewardConfig::from_peaks(const ResponsePeaks& peaks) {
  RewardConfig cfg;
  cfg.u_max = peaks.displacement;
  cfg.v_max = peaks.velocity;
  cfg.a_max = peaks.acceleration;
  return cfg;
}

void RewardConfig::validate() const {
  if (!(u_max > 0.0 && v_max > 0.0 && a_max > 0.0)) {
    throw DegeneratePeaksError("reward normalization peaks must be > 0 (u_max, v_max, a_max)");
  }
  if (!(force_penalty >= 0.0)) throw InputError("reward.force_penalty must be >= 0");
  if (!(force_unit > 0.0)) throw InputError("reward.force_unit must be > 0");
}

ResponsePeaks peaks_of(const std::vector<ResponseSample>& trace) {
  ResponsePeaks p;
  for (const auto& s : trace) {
    p.displacement = std::max(p.displacement, std::abs(s.displacement));
    p.velocity = std::max(p.velocity, std::abs(s.velocity));
    p.acceleration = std::max(p.acceleration, std::abs(s.acceleration));
  }
  return p;
}

ResponsePeaks uncontrolled_peaks(const DiscreteModel& model, const GroundMotion& motion, DelayMode mode,
                                 std::size_t delay_steps) {
  const ResponsePeaks p = peaks_of(simulate(model, motion, null_controller, delay_steps, mode));
  if (p.displacement == 0.0 || p.velocity == 0.0 || p.acceleration == 0.0) {
    throw DegeneratePeaksError("uncontrolled peaks are degenerate (zero response to record '" + motion.name +
                               "'); rewards cannot be normalized");
  }
  return p;
}

double reward(const ResponseSample& s, const RewardConfig& cfg) {
  const double r1 = 1.0 - std::abs(s.displacement) / cfg.u_max;
  const double r2 = 1.0 - std::abs(s.velocity) / cfg.v_max;
  const double r3 = 1.0 - std::abs(s.acceleration) / cfg.a_max;
  const double force = cfg.signed_force ? s.applied_force : -std::abs(s.applied_force);
  const double r4 = cfg.force_penalty * force / cfg.force_unit;
  return r1 + r2 + r3 + r4;
}

}  // namespace reflexq
