#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "reflexq/excitation.hpp"

namespace reflexq {

/// Lumped single-story frame: kg, N/m, N*s/m.
struct SdofParams {
  double mass = 2000.0;
  double stiffness = 7.9e6;
  double damping = 2.5e5;

  void validate() const;
  double natural_frequency() const;  // rad/s
  double period() const;             // s
  double damping_ratio() const;
};

struct StateVector {
  double displacement = 0.0;
  double velocity = 0.0;
};

using Mat2 = std::array<std::array<double, 2>, 2>;

/// Zero-order-hold discretization of x' = A x + B [xg, f].
struct DiscreteModel {
  SdofParams params;
  double dt = 0.0;
  Mat2 a{};
  Mat2 b{};
  Mat2 c_m{};
  Mat2 a_d{};
  Mat2 b_d{};

  /// Relative acceleration from the equation of motion with the given inputs held.
  double acceleration(const StateVector& x, double force, double ground_accel) const;
};

/// exp(M) for a 2x2 matrix in closed form (Cayley-Hamilton).
Mat2 expm2(const Mat2& m);

DiscreteModel discretize(const SdofParams& params, double dt);

struct StepResult {
  StateVector state;
  double acceleration = 0.0;
};

/// One exact ZOH step. Throws SimulationDiverged tagged with `step_index` on non-finite output.
StepResult step(const DiscreteModel& model, const StateVector& x, double force, double ground_accel,
                std::size_t step_index = 0);

/// Constant pure delay of whole control steps, prefilled with zeros.
class DelayLine {
 public:
  explicit DelayLine(std::size_t delay_steps = 0);

  /// Enqueue `value`, return the value enqueued `delay_steps` calls ago (0 before that).
  double push(double value);
  void reset();
  std::size_t delay_steps() const { return buffer_.size(); }

 private:
  std::vector<double> buffer_;
  std::size_t head_ = 0;
};

struct DelayRounding {
  std::size_t steps = 0;
  double rounding_error = 0.0;  // seconds, requested minus realized
};

/// Round a delay in seconds to whole steps. Throws InputError on negative or non-finite delay.
DelayRounding delay_steps_for(double delay_seconds, double dt);

enum class DelayMode { ForceOnly, ForceAndExcitation };

struct ResponseSample {
  double time = 0.0;
  double displacement = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;
  double applied_force = 0.0;
  double ground_accel = 0.0;
};

/// Stateful closed-loop plant: discrete model plus delay lines.
class Plant {
 public:
  Plant(DiscreteModel model, std::size_t delay_steps, DelayMode mode = DelayMode::ForceOnly);

  void reset();
  /// Feed one commanded force and the current ground acceleration; returns the sample one dt later.
  ResponseSample advance(double commanded_force, double ground_accel);

  const StateVector& state() const { return state_; }
  /// Sample describing the current instant (all zeros before the first advance).
  const ResponseSample& current() const { return current_; }
  std::size_t steps_taken() const { return steps_; }
  const DiscreteModel& model() const { return model_; }

 private:
  DiscreteModel model_;
  DelayMode mode_;
  DelayLine force_delay_;
  DelayLine excitation_delay_;
  StateVector state_;
  ResponseSample current_;
  std::size_t steps_ = 0;
};

/// Receives the step index and the sample at the current instant; returns a commanded force.
using Controller = std::function<double(std::size_t, const ResponseSample&)>;

double null_controller(std::size_t, const ResponseSample&);

/// Closed-loop run over the record, one sample per record entry.
std::vector<ResponseSample> simulate(const DiscreteModel& model, const GroundMotion& motion,
                                     const Controller& controller, std::size_t delay_steps,
                                     DelayMode mode = DelayMode::ForceOnly);

}  // namespace reflexq
