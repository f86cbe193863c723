#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "reflexq/dynamics.hpp"
#include "reflexq/gamma_filter.hpp"
#include "reflexq/nn.hpp"
#include "reflexq/random.hpp"

namespace reflexq {

/// {u_t, u_{t-1}, u_{t-2}, v_t, a_t, xg_t}
inline constexpr std::size_t kStateDim = 6;
using State = std::array<double, kStateDim>;

/// Symmetric uniform force grid from -max_force to +max_force; odd count so 0 is included.
struct ActionSpace {
  std::size_t n_actions = 11;
  double max_force = 10000.0;

  void validate() const;
  std::vector<double> forces() const;
};

/// Builds raw state vectors from the running response and scales them for the network.
class StateTracker {
 public:
  explicit StateTracker(std::array<double, kStateDim> scale);

  void reset();
  /// Record the current instant (response sample plus the ground acceleration now being sensed).
  State observe(const ResponseSample& current, double ground_accel);
  const std::array<double, kStateDim>& scale() const { return scale_; }

 private:
  std::array<double, kStateDim> scale_;
  double u_prev1_ = 0.0;
  double u_prev2_ = 0.0;
};

/// Scales for {u, u, u, v, a, xg}: uncontrolled peaks and the peak ground acceleration.
std::array<double, kStateDim> state_scale(double u_max, double v_max, double a_max, double xg_peak);

struct ExperienceWindow {
  State state{};
  std::size_t action = 0;
  std::vector<double> rewards;  // r_0..r_n, shorter only when terminal
  State next_state{};
  bool terminal = false;
};

/// Emits a window for step t0 once the rewards through t0+n are known; flush() truncates at episode end.
class WindowAssembler {
 public:
  explicit WindowAssembler(std::size_t window_length);

  /// Register (s_t, a_t, r_t) and the state reached after the step.
  std::optional<ExperienceWindow> push(const State& state, std::size_t action, double reward, const State& next_state);
  std::vector<ExperienceWindow> flush(const State& last_state);
  std::size_t window_length() const { return length_; }

 private:
  struct Pending {
    State state;
    std::size_t action;
    std::size_t start;
  };
  std::size_t length_;
  std::deque<Pending> pending_;
  std::deque<double> rewards_;
  std::size_t rewards_origin_ = 0;  // step index of rewards_.front()
  std::size_t step_ = 0;
};

/// Fixed-capacity ring of windows; the oldest entry is evicted first.
class ReplayBuffer {
 public:
  struct Slot {
    ExperienceWindow window;
    std::uint64_t cached_version = 0;  // target-network version of cached_max_q, 0 = none
    double cached_max_q = 0.0;
  };

  explicit ReplayBuffer(std::size_t capacity = 60000);

  void push(ExperienceWindow window);
  std::size_t size() const { return slots_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// i = 0 is the oldest retained window.
  const ExperienceWindow& at(std::size_t i) const;
  Slot& slot(std::size_t i);
  /// Distinct uniform indices, in draw order.
  std::vector<std::size_t> sample_indices(std::size_t batch_size, Rng& rng) const;

 private:
  std::size_t physical(std::size_t i) const { return (head_ + i) % slots_.size(); }
  std::size_t capacity_;
  std::vector<Slot> slots_;
  std::size_t head_ = 0;  // physical index of the oldest slot once full
};

/// argmax with ties broken toward the lowest index.
std::size_t greedy_action(std::span<const double> q_values);

/// One uniform draw decides exploration; exploring draws a second uniform action index.
std::size_t select_action(const QNetwork& net, std::span<const double> state, double epsilon, Rng& rng,
                          NetWorkspace& ws);

struct EpsilonSchedule {
  double start = 1.0;
  double min = 0.1;
  double decay_fraction = 0.8;

  /// Linear from `start` at episode 0 to `min` at decay_fraction * total, flat afterwards.
  double at(std::size_t episode, std::size_t total_episodes) const;
};

double epsilon_schedule(std::size_t episode, std::size_t total_episodes);

/// Frozen copy of the online network. The version changes on every sync.
class TargetNetwork {
 public:
  explicit TargetNetwork(const QNetwork& net) : net_(clone(net)) {}
  void sync(const QNetwork& net) {
    net_ = clone(net);
    ++version_;
  }
  const QNetwork& net() const { return net_; }
  std::uint64_t version() const { return version_; }

 private:
  QNetwork net_;
  std::uint64_t version_ = 1;
};

QNetwork sync_target(const QNetwork& net);

double max_q(const QNetwork& net, std::span<const double> state, NetWorkspace& ws);

/// r + discount * max_b Q(s', b); the bootstrap is dropped for terminal windows.
double standard_target(const QNetwork& target_net, const ExperienceWindow& window, double discount);
double standard_target(const ExperienceWindow& window, double discount, double max_next_q);

/// Filtered n-step target; terminal windows keep only the available weighted rewards.
double enhanced_target_for_window(const QNetwork& target_net, const ExperienceWindow& window,
                                  const ReflexiveGamma& filter);
double enhanced_target_for_window(const ExperienceWindow& window, const ReflexiveGamma& filter, double max_next_q);

enum class Method { Original, Enhanced };

Method parse_method(const std::string& name);
std::string to_string(Method method);

struct MinibatchSettings {
  Method method = Method::Original;
  std::size_t batch_size = 50;
  double step_size = 1e-3;
  double discount = 0.99;
  const ReflexiveGamma* filter = nullptr;  // required for Method::Enhanced
};

struct MinibatchResult {
  double mean_squared_td = 0.0;
  std::size_t examples = 0;
};

/// Uniform minibatch, one SGD step per example in draw order.
MinibatchResult train_minibatch(QNetwork& net, const TargetNetwork& target, ReplayBuffer& buffer,
                                const MinibatchSettings& settings, Rng& rng, NetWorkspace& ws);

}  // namespace reflexq
