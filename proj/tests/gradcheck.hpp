#pragma once

// Central finite-difference check of QNetwork::gradient.

#include <algorithm>
#include <cmath>
#include <vector>

#include "reflexq/nn.hpp"
#include "reflexq/random.hpp"

namespace gradcheck {

inline double loss(const reflexq::QNetwork& net, const std::vector<double>& x, std::size_t action, double target) {
  const double e = target - net.forward(x)[action];
  return 0.5 * e * e;
}

/// Largest |analytic - numeric| / max(|analytic|, |numeric|, floor) over all parameters.
inline double max_relative_error(const reflexq::QNetwork& net, const std::vector<double>& x, std::size_t action,
                                 double target, double h = 1e-5, double floor = 1e-6) {
  const std::vector<double> analytic = net.gradient(x, action, target);
  reflexq::QNetwork probe = net;
  std::vector<double> p = net.parameters();
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + h;
    probe.set_parameters(p);
    const double up = loss(probe, x, action, target);
    p[i] = keep - h;
    probe.set_parameters(p);
    const double down = loss(probe, x, action, target);
    p[i] = keep;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

struct Case {
  reflexq::QNetwork net;
  std::vector<double> input;
  std::size_t action;
  double target;
};

/// Random [6,40,40,11]-style case: fresh init, perturbed biases, random input/action/target.
inline Case random_case(const std::vector<std::size_t>& sizes, std::uint64_t seed) {
  reflexq::Rng rng(seed);
  Case c{reflexq::QNetwork::init(sizes, seed), {}, 0, 0.0};
  for (auto& layer : c.net.layers()) {
    for (double& b : layer.bias) b = reflexq::uniform(rng, -0.5, 0.5);
  }
  for (std::size_t i = 0; i < sizes.front(); ++i) c.input.push_back(reflexq::uniform(rng, -1.5, 1.5));
  c.action = reflexq::uniform_index(rng, sizes.back());
  c.target = reflexq::uniform(rng, -3.0, 3.0);
  return c;
}

}  // namespace gradcheck
