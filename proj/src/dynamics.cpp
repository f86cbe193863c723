#include "reflexq/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "reflexq/errors.hpp"

namespace reflexq {

namespace {

bool finite(double v) { return std::isfinite(v); }

Mat2 mul(const Mat2& x, const Mat2& y) {
  Mat2 r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
  return r;
}

}  // namespace

void SdofParams::validate() const {
  if (!(finite(mass) && mass > 0.0)) throw InputError("invalid parameters: mass must be > 0");
  if (!(finite(stiffness) && stiffness > 0.0)) throw InputError("invalid parameters: stiffness must be > 0");
  if (!(finite(damping) && damping >= 0.0)) throw InputError("invalid parameters: damping must be >= 0");
}

double SdofParams::natural_frequency() const { return std::sqrt(stiffness / mass); }
double SdofParams::period() const { return 2.0 * std::numbers::pi / natural_frequency(); }
double SdofParams::damping_ratio() const { return damping / (2.0 * std::sqrt(stiffness * mass)); }

double DiscreteModel::acceleration(const StateVector& x, double force, double ground_accel) const {
  return (-params.mass * ground_accel + force - params.damping * x.velocity -
          params.stiffness * x.displacement) /
         params.mass;
}

Mat2 expm2(const Mat2& m) {
  // With s = tr/2 and D = M - sI, D^2 = delta*I, so
  // exp(M) = e^s (C(delta) I + S(delta) D), C = cosh(sqrt delta), S = sinh(sqrt delta)/sqrt delta.
  const double s = 0.5 * (m[0][0] + m[1][1]);
  const double half_diff = 0.5 * (m[0][0] - m[1][1]);
  const double delta = half_diff * half_diff + m[0][1] * m[1][0];
  double c = 0.0;
  double sc = 0.0;
  if (std::abs(delta) < 1e-8) {
    c = 1.0 + delta / 2.0 + delta * delta / 24.0;
    sc = 1.0 + delta / 6.0 + delta * delta / 120.0;
  } else if (delta > 0.0) {
    const double q = std::sqrt(delta);
    c = std::cosh(q);
    sc = std::sinh(q) / q;
  } else {
    const double q = std::sqrt(-delta);
    c = std::cos(q);
    sc = std::sin(q) / q;
  }
  const double es = std::exp(s);
  Mat2 r{};
  r[0][0] = es * (c + sc * half_diff);
  r[1][1] = es * (c - sc * half_diff);
  r[0][1] = es * sc * m[0][1];
  r[1][0] = es * sc * m[1][0];
  return r;
}

DiscreteModel discretize(const SdofParams& params, double dt) {
  params.validate();
  if (!(finite(dt) && dt > 0.0)) throw InputError("discretize: dt must be > 0");

  DiscreteModel model;
  model.params = params;
  model.dt = dt;
  const double m = params.mass;
  model.a = {{{0.0, 1.0}, {-params.stiffness / m, -params.damping / m}}};
  model.b = {{{0.0, 0.0}, {-1.0, 1.0 / m}}};
  model.c_m = {{{1.0, 0.0}, {0.0, 1.0}}};

  Mat2 a_dt = model.a;
  for (auto& row : a_dt)
    for (double& v : row) v *= dt;
  model.a_d = expm2(a_dt);

  const Mat2& a = model.a;
  const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
  if (det == 0.0 || !finite(det)) throw InputError("invalid parameters: state matrix is singular");
  const Mat2 a_inv = {{{a[1][1] / det, -a[0][1] / det}, {-a[1][0] / det, a[0][0] / det}}};
  Mat2 ad_minus_i = model.a_d;
  ad_minus_i[0][0] -= 1.0;
  ad_minus_i[1][1] -= 1.0;
  model.b_d = mul(mul(a_inv, ad_minus_i), model.b);
  return model;
}

StepResult step(const DiscreteModel& model, const StateVector& x, double force, double ground_accel,
                std::size_t step_index) {
  const Mat2& ad = model.a_d;
  const Mat2& bd = model.b_d;
  StepResult r;
  r.state.displacement =
      ad[0][0] * x.displacement + ad[0][1] * x.velocity + bd[0][0] * ground_accel + bd[0][1] * force;
  r.state.velocity =
      ad[1][0] * x.displacement + ad[1][1] * x.velocity + bd[1][0] * ground_accel + bd[1][1] * force;
  r.acceleration = model.acceleration(r.state, force, ground_accel);
  if (!finite(r.state.displacement) || !finite(r.state.velocity) || !finite(r.acceleration)) {
    throw SimulationDiverged(step_index, "non-finite state");
  }
  return r;
}

DelayLine::DelayLine(std::size_t delay_steps) : buffer_(delay_steps, 0.0) {}

double DelayLine::push(double value) {
  if (buffer_.empty()) return value;
  const double out = buffer_[head_];
  buffer_[head_] = value;
  head_ = (head_ + 1) % buffer_.size();
  return out;
}

void DelayLine::reset() {
  std::fill(buffer_.begin(), buffer_.end(), 0.0);
  head_ = 0;
}

DelayRounding delay_steps_for(double delay_seconds, double dt) {
  if (!finite(delay_seconds) || delay_seconds < 0.0) throw InputError("delay must be a finite value >= 0");
  if (!(finite(dt) && dt > 0.0)) throw InputError("delay_steps_for: dt must be > 0");
  const double steps = std::round(delay_seconds / dt);
  DelayRounding r;
  r.steps = static_cast<std::size_t>(steps);
  r.rounding_error = delay_seconds - steps * dt;
  return r;
}

Plant::Plant(DiscreteModel model, std::size_t delay_steps, DelayMode mode)
    : model_(std::move(model)), mode_(mode), force_delay_(delay_steps), excitation_delay_(delay_steps) {}

void Plant::reset() {
  force_delay_.reset();
  excitation_delay_.reset();
  state_ = {};
  current_ = {};
  steps_ = 0;
}

ResponseSample Plant::advance(double commanded_force, double ground_accel) {
  if (!finite(commanded_force) || !finite(ground_accel)) {
    throw SimulationDiverged(steps_, "non-finite input");
  }
  const double force = force_delay_.push(commanded_force);
  const double xg = mode_ == DelayMode::ForceAndExcitation ? excitation_delay_.push(ground_accel) : ground_accel;
  const StepResult r = step(model_, state_, force, xg, steps_);
  state_ = r.state;
  ++steps_;
  current_.time = static_cast<double>(steps_) * model_.dt;
  current_.displacement = r.state.displacement;
  current_.velocity = r.state.velocity;
  current_.acceleration = r.acceleration;
  current_.applied_force = force;
  current_.ground_accel = xg;
  return current_;
}

double null_controller(std::size_t, const ResponseSample&) { return 0.0; }

std::vector<ResponseSample> simulate(const DiscreteModel& model, const GroundMotion& motion,
                                     const Controller& controller, std::size_t delay_steps, DelayMode mode) {
  motion.validate();
  if (std::abs(motion.dt - model.dt) > 1e-9 * model.dt) {
    throw InputError("record sample interval " + std::to_string(motion.dt) + " s differs from model step " +
                     std::to_string(model.dt) + " s; resample first");
  }
  Plant plant(model, delay_steps, mode);
  std::vector<ResponseSample> trace;
  trace.reserve(motion.samples.size());
  for (std::size_t i = 0; i < motion.samples.size(); ++i) {
    const double force = controller ? controller(i, plant.current()) : 0.0;
    trace.push_back(plant.advance(force, motion.samples[i]));
  }
  return trace;
}

}  // namespace reflexq
