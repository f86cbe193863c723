#pragma once

#include <vector>

#include "reflexq/dynamics.hpp"

namespace reflexq {

/// Peak absolute responses over a trace.
struct ResponsePeaks {
  double displacement = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;
};

struct RewardConfig {
  double u_max = 1.0;
  double v_max = 1.0;
  double a_max = 1.0;
  double force_penalty = 0.005;  // per force_unit of actuator force
  double force_unit = 1000.0;    // N
  /// Literal f*P_a term (rewards positive force) instead of -P_a*|f|.
  bool signed_force = false;

  static RewardConfig from_peaks(const ResponsePeaks& peaks);
  void validate() const;
};

ResponsePeaks peaks_of(const std::vector<ResponseSample>& trace);

/// Peaks of the null-controller response. Throws DegeneratePeaksError if any peak is zero.
ResponsePeaks uncontrolled_peaks(const DiscreteModel& model, const GroundMotion& motion,
                                 DelayMode mode = DelayMode::ForceOnly, std::size_t delay_steps = 0);

/// R = (1 - |u|/u_max) + (1 - |v|/v_max) + (1 - |a|/a_max) - P_a |f| / force_unit
double reward(const ResponseSample& sample, const RewardConfig& cfg);

}  // namespace reflexq
