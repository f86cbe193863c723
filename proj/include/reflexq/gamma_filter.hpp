#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "reflexq/dynamics.hpp"

namespace reflexq {

enum class CutoffRule {
  DropBy,  // truncate once the envelope falls below (1 - p/100) of its peak
  DropTo,  // truncate once the envelope falls below p/100 of its peak
};

/// Finite reward response filter: per-step weights for r_0..r_n plus the bootstrap weight.
struct ReflexiveGamma {
  std::vector<double> gammas;
  double bootstrap_gamma = 0.0;
  double dt = 0.0;
  double probe_force = 0.0;
  double cutoff_percent = 15.0;
  CutoffRule rule = CutoffRule::DropBy;
  std::size_t peak_index = 0;

  /// n in TQ = sum_{j<=n} gamma_j r_j + gamma_{n+1} max Q(s'); the window holds n+1 rewards.
  std::size_t n() const { return gammas.size() - 1; }
  std::size_t window() const { return gammas.size(); }
  double window_duration() const { return static_cast<double>(gammas.size()) * dt; }

  /// Single weight 1 with bootstrap `discount`: reduces the target to one-step Q-learning.
  static ReflexiveGamma one_step(double discount, double dt = 0.0);
};

namespace gamma_filter {

/// |u| after each control step (element k is at time (k+1) dt) for a one-step force pulse
/// at t = 0 passed through the delay line. Quiescent start, no ground motion.
std::vector<double> probe(const DiscreteModel& model, std::size_t delay_steps, double probe_force,
                          std::size_t horizon_steps);

/// Peak envelope of a rectified response, normalized to a maximum of 1.
std::vector<double> envelope(std::span<const double> response);

ReflexiveGamma build(std::span<const double> response, double cutoff_percent, double dt,
                     CutoffRule rule = CutoffRule::DropBy);

struct ProbeSettings {
  double probe_force = 10000.0;
  double cutoff_percent = 15.0;
  CutoffRule rule = CutoffRule::DropBy;
  /// Initial observation window past the delay, in natural periods.
  double horizon_periods = 4.0;
  /// Hard cap past the delay, in natural periods.
  double cap_periods = 1000.0;
};

struct ProbeResult {
  std::vector<double> response;
  ReflexiveGamma filter;
};

/// Probe with an automatically extended horizon, then build. Throws ProbeFailed past the cap.
ProbeResult probe_and_build(const DiscreteModel& model, std::size_t delay_steps, const ProbeSettings& settings);

/// sum_j gamma_j r_j + gamma_{n+1} max_next_q. Requires exactly n+1 rewards.
double enhanced_target(const ReflexiveGamma& filter, std::span<const double> rewards, double max_next_q);

/// sum_j gamma_j r_j over the available prefix (at most n+1 rewards), no bootstrap.
double weighted_reward_sum(const ReflexiveGamma& filter, std::span<const double> rewards);

std::string to_csv(const ReflexiveGamma& filter);
ReflexiveGamma from_csv(const std::string& text);
void write_csv(const ReflexiveGamma& filter, const std::filesystem::path& path);
ReflexiveGamma load_csv(const std::filesystem::path& path);

std::string to_string(CutoffRule rule);
CutoffRule parse_cutoff_rule(const std::string& name);

}  // namespace gamma_filter
}  // namespace reflexq
