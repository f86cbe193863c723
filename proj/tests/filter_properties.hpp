#pragma once

// Invariant checks for a built filter and a generator of decaying oscillations.

#include <cmath>
#include <string>
#include <vector>

#include "reflexq/gamma_filter.hpp"
#include "reflexq/random.hpp"

namespace props {

/// Empty string when every invariant holds, otherwise the first violation.
inline std::string filter_violation(const reflexq::ReflexiveGamma& f, double cutoff_percent,
                                    reflexq::CutoffRule rule) {
  if (f.gammas.empty()) return "empty filter";
  double top = 0.0;
  std::size_t first_top = f.gammas.size();
  for (std::size_t j = 0; j < f.gammas.size(); ++j) {
    const double g = f.gammas[j];
    if (!(g >= 0.0 && g <= 1.0)) return "gamma " + std::to_string(j) + " outside [0, 1]";
    if (g > top) top = g;
  }
  if (top != 1.0) return "maximum is not 1";
  for (std::size_t j = 0; j < f.gammas.size(); ++j) {
    if (f.gammas[j] == 1.0) {
      first_top = j;
      break;
    }
  }
  if (first_top != f.peak_index) return "peak index does not point at the first maximum";
  for (std::size_t j = 1; j <= first_top; ++j) {
    if (f.gammas[j] < f.gammas[j - 1]) return "not non-decreasing before the peak at " + std::to_string(j);
  }
  for (std::size_t j = first_top + 1; j < f.gammas.size(); ++j) {
    if (f.gammas[j] > f.gammas[j - 1]) return "not non-increasing after the peak at " + std::to_string(j);
  }
  const double threshold =
      rule == reflexq::CutoffRule::DropBy ? 1.0 - cutoff_percent / 100.0 : cutoff_percent / 100.0;
  for (std::size_t j = first_top; j < f.gammas.size(); ++j) {
    if (f.gammas[j] < threshold) return "retained weight below the cutoff threshold at " + std::to_string(j);
  }
  if (!(f.bootstrap_gamma < threshold)) return "bootstrap weight not below the cutoff threshold";
  if (!(f.bootstrap_gamma >= 0.0)) return "negative bootstrap weight";
  if (f.bootstrap_gamma > f.gammas.back()) return "bootstrap weight exceeds the last retained weight";
  return {};
}

struct Oscillation {
  std::vector<double> response;
  std::size_t leading_zeros = 0;
};

/// |A e^{-a k} sin(w k + phi)| (or a critically damped pulse) after a run of zeros.
inline Oscillation random_oscillation(reflexq::Rng& rng) {
  Oscillation o;
  o.leading_zeros = reflexq::uniform_index(rng, 30);
  const double amplitude = reflexq::uniform(rng, 1e-6, 1e3);
  const double decay = reflexq::uniform(rng, 0.005, 0.6);
  const double w = reflexq::uniform(rng, 0.05, 2.5);
  const double phi = reflexq::uniform(rng, 0.0, 3.0);
  const bool pulse = reflexq::uniform01(rng) < 0.25;
  const std::size_t n = o.leading_zeros + static_cast<std::size_t>(std::ceil(12.0 / decay)) + 20;
  o.response.assign(n, 0.0);
  for (std::size_t k = o.leading_zeros; k < n; ++k) {
    const double t = static_cast<double>(k - o.leading_zeros) + 1.0;
    const double v = pulse ? t * std::exp(-decay * t) : std::exp(-decay * t) * std::sin(w * t + phi);
    o.response[k] = amplitude * std::abs(v);
  }
  if (o.response[o.leading_zeros] == 0.0) o.response[o.leading_zeros] = amplitude * 1e-3;
  return o;
}

}  // namespace props
