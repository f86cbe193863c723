#include "reflexq/agent.hpp"

#include <algorithm>
#include <cmath>

#include "reflexq/errors.hpp"

namespace reflexq {

void ActionSpace::validate() const {
  if (n_actions < 3 || n_actions % 2 == 0) throw InputError("actions.count must be odd and >= 3");
  if (!(std::isfinite(max_force) && max_force > 0.0)) throw InputError("actions.max_force must be > 0");
}

std::vector<double> ActionSpace::forces() const {
  validate();
  std::vector<double> f(n_actions);
  const auto half = static_cast<long long>(n_actions / 2);
  for (std::size_t i = 0; i < n_actions; ++i) {
    // Integer offsets keep the grid exactly symmetric with an exact zero.
    const auto k = static_cast<long long>(i) - half;
    f[i] = max_force * static_cast<double>(k) / static_cast<double>(half);
  }
  return f;
}

std::array<double, kStateDim> state_scale(double u_max, double v_max, double a_max, double xg_peak) {
  for (double s : {u_max, v_max, a_max, xg_peak}) {
    if (!(std::isfinite(s) && s > 0.0)) throw InputError("state normalization scales must be > 0");
  }
  return {u_max, u_max, u_max, v_max, a_max, xg_peak};
}

StateTracker::StateTracker(std::array<double, kStateDim> scale) : scale_(scale) {}

void StateTracker::reset() {
  u_prev1_ = 0.0;
  u_prev2_ = 0.0;
}

State StateTracker::observe(const ResponseSample& current, double ground_accel) {
  const State raw = {current.displacement, u_prev1_,      u_prev2_,
                     current.velocity,     current.acceleration, ground_accel};
  u_prev2_ = u_prev1_;
  u_prev1_ = current.displacement;
  State s{};
  for (std::size_t i = 0; i < kStateDim; ++i) s[i] = raw[i] / scale_[i];
  return s;
}

WindowAssembler::WindowAssembler(std::size_t window_length) : length_(window_length) {
  if (length_ == 0) throw InputError("window length must be >= 1");
}

std::optional<ExperienceWindow> WindowAssembler::push(const State& state, std::size_t action, double reward,
                                                      const State& next_state) {
  if (pending_.empty()) {
    rewards_.clear();
    rewards_origin_ = step_;
  }
  pending_.push_back({state, action, step_});
  rewards_.push_back(reward);
  ++step_;
  if (pending_.front().start + length_ > step_) return std::nullopt;

  const Pending done = pending_.front();
  pending_.pop_front();
  ExperienceWindow w;
  w.state = done.state;
  w.action = done.action;
  const auto first = rewards_.begin() + static_cast<std::ptrdiff_t>(done.start - rewards_origin_);
  w.rewards.assign(first, first + static_cast<std::ptrdiff_t>(length_));
  w.next_state = next_state;
  w.terminal = false;
  const std::size_t keep_from = pending_.empty() ? step_ : pending_.front().start;
  while (rewards_origin_ < keep_from) {
    rewards_.pop_front();
    ++rewards_origin_;
  }
  return w;
}

std::vector<ExperienceWindow> WindowAssembler::flush(const State& last_state) {
  std::vector<ExperienceWindow> out;
  out.reserve(pending_.size());
  for (const auto& p : pending_) {
    ExperienceWindow w;
    w.state = p.state;
    w.action = p.action;
    const auto first = rewards_.begin() + static_cast<std::ptrdiff_t>(p.start - rewards_origin_);
    w.rewards.assign(first, rewards_.end());
    w.next_state = last_state;
    w.terminal = true;
    out.push_back(std::move(w));
  }
  pending_.clear();
  rewards_.clear();
  step_ = 0;
  rewards_origin_ = 0;
  return out;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw InputError("replay buffer capacity must be >= 1");
}

void ReplayBuffer::push(ExperienceWindow window) {
  if (slots_.size() < capacity_) {
    slots_.push_back(Slot{std::move(window), 0, 0.0});
    return;
  }
  slots_[head_] = Slot{std::move(window), 0, 0.0};
  head_ = (head_ + 1) % capacity_;
}

const ExperienceWindow& ReplayBuffer::at(std::size_t i) const {
  if (i >= slots_.size()) throw InputError("replay buffer index out of range");
  return slots_[physical(i)].window;
}

ReplayBuffer::Slot& ReplayBuffer::slot(std::size_t i) {
  if (i >= slots_.size()) throw InputError("replay buffer index out of range");
  return slots_[physical(i)];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch_size, Rng& rng) const {
  if (batch_size > slots_.size()) {
    throw InputError("replay buffer holds " + std::to_string(slots_.size()) + " windows, batch needs " +
                     std::to_string(batch_size));
  }
  std::vector<std::size_t> picked;
  picked.reserve(batch_size);
  while (picked.size() < batch_size) {
    const auto i = static_cast<std::size_t>(uniform_index(rng, slots_.size()));
    if (std::find(picked.begin(), picked.end(), i) == picked.end()) picked.push_back(i);
  }
  return picked;
}

std::size_t greedy_action(std::span<const double> q) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < q.size(); ++i) {
    if (q[i] > q[best]) best = i;
  }
  return best;
}

std::size_t select_action(const QNetwork& net, std::span<const double> state, double epsilon, Rng& rng,
                          NetWorkspace& ws) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InputError("epsilon must lie in [0, 1]");
  if (uniform01(rng) < epsilon) return static_cast<std::size_t>(uniform_index(rng, net.output_dim()));
  return greedy_action(net.forward(state, ws));
}

double EpsilonSchedule::at(std::size_t episode, std::size_t total_episodes) const {
  const double decay_end = decay_fraction * static_cast<double>(total_episodes);
  const auto e = static_cast<double>(episode);
  if (!(decay_end > 0.0) || e >= decay_end) return min;
  return start + (min - start) * e / decay_end;
}

double epsilon_schedule(std::size_t episode, std::size_t total_episodes) {
  return EpsilonSchedule{}.at(episode, total_episodes);
}

QNetwork sync_target(const QNetwork& net) { return clone(net); }

double max_q(const QNetwork& net, std::span<const double> state, NetWorkspace& ws) {
  const auto q = net.forward(state, ws);
  return q[greedy_action(q)];
}

double standard_target(const ExperienceWindow& w, double discount, double max_next_q) {
  if (w.rewards.size() != 1) {
    throw InputError("standard target needs a one-reward window, got " + std::to_string(w.rewards.size()));
  }
  return w.terminal ? w.rewards[0] : w.rewards[0] + discount * max_next_q;
}

double standard_target(const QNetwork& target_net, const ExperienceWindow& w, double discount) {
  NetWorkspace ws;
  return standard_target(w, discount, w.terminal ? 0.0 : max_q(target_net, w.next_state, ws));
}

double enhanced_target_for_window(const ExperienceWindow& w, const ReflexiveGamma& filter, double max_next_q) {
  if (w.terminal) return gamma_filter::weighted_reward_sum(filter, w.rewards);
  return gamma_filter::enhanced_target(filter, w.rewards, max_next_q);
}

double enhanced_target_for_window(const QNetwork& target_net, const ExperienceWindow& w,
                                  const ReflexiveGamma& filter) {
  NetWorkspace ws;
  return enhanced_target_for_window(w, filter, w.terminal ? 0.0 : max_q(target_net, w.next_state, ws));
}

Method parse_method(const std::string& name) {
  if (name == "original") return Method::Original;
  if (name == "enhanced") return Method::Enhanced;
  throw InputError("unknown method '" + name + "' (original|enhanced)");
}

std::string to_string(Method method) { return method == Method::Original ? "original" : "enhanced"; }

MinibatchResult train_minibatch(QNetwork& net, const TargetNetwork& target, ReplayBuffer& buffer,
                                const MinibatchSettings& settings, Rng& rng, NetWorkspace& ws) {
  if (settings.method == Method::Enhanced && settings.filter == nullptr) {
    throw InputError("enhanced method needs a reflexive gamma filter");
  }
  const auto picked = buffer.sample_indices(settings.batch_size, rng);
  MinibatchResult result;
  double sum = 0.0;
  for (std::size_t idx : picked) {
    ReplayBuffer::Slot& slot = buffer.slot(idx);
    const ExperienceWindow& w = slot.window;
    double next_q = 0.0;
    if (!w.terminal) {
      if (slot.cached_version != target.version()) {
        slot.cached_max_q = max_q(target.net(), w.next_state, ws);
        slot.cached_version = target.version();
      }
      next_q = slot.cached_max_q;
    }
    const double tq = settings.method == Method::Original ? standard_target(w, settings.discount, next_q)
                                                          : enhanced_target_for_window(w, *settings.filter, next_q);
    const double td = net.train_on_target(w.state, w.action, tq, settings.step_size, ws);
    sum += td * td;
    ++result.examples;
  }
  result.mean_squared_td = sum / static_cast<double>(result.examples);
  return result;
}

}  // namespace reflexq
