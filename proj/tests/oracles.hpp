#pragma once

// Closed-form SDOF responses used as independent references in tests.

#include <cmath>

namespace oracle {

struct Sdof {
  double m, k, c;
  double omega() const { return std::sqrt(k / m); }
  double zeta() const { return c / (2.0 * std::sqrt(k * m)); }
  double omega_d() const { return omega() * std::sqrt(1.0 - zeta() * zeta()); }
};

/// Underdamped free vibration from (u0, v0).
inline double free_decay(const Sdof& s, double u0, double v0, double t) {
  const double zw = s.zeta() * s.omega();
  const double wd = s.omega_d();
  return std::exp(-zw * t) * (u0 * std::cos(wd * t) + (v0 + zw * u0) / wd * std::sin(wd * t));
}

inline double free_decay_velocity(const Sdof& s, double u0, double v0, double t) {
  const double zw = s.zeta() * s.omega();
  const double wd = s.omega_d();
  const double b = (v0 + zw * u0) / wd;
  return std::exp(-zw * t) * ((-zw * u0 + b * wd) * std::cos(wd * t) + (-zw * b - u0 * wd) * std::sin(wd * t));
}

/// Displacement under a constant force F applied from rest at t = 0 (0 for t < 0).
inline double step_response(const Sdof& s, double force, double t) {
  if (t <= 0.0) return 0.0;
  const double zw = s.zeta() * s.omega();
  const double wd = s.omega_d();
  return force / s.k * (1.0 - std::exp(-zw * t) * (std::cos(wd * t) + zw / wd * std::sin(wd * t)));
}

/// Displacement after a force F held over [0, width).
inline double pulse_response(const Sdof& s, double force, double width, double t) {
  return step_response(s, force, t) - step_response(s, force, t - width);
}

}  // namespace oracle
