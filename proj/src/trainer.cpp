#include "reflexq/trainer.hpp"

#include <cmath>
#include <iostream>

#include "reflexq/errors.hpp"
#include "reflexq/text_io.hpp"

namespace reflexq {

GroundMotion load_motion(const ExperimentConfig& config) {
  GroundMotion motion;
  if (!config.record.path.empty()) {
    motion = excitation::load_record(config.record.path);
  } else {
    auto params = config.record.synth;
    params.dt = config.dt();
    motion = excitation::synth(params);
  }
  motion = excitation::resample(motion, config.dt());
  if (config.steps_per_episode > 0) motion = excitation::fit_length(motion, config.steps_per_episode);
  motion.validate();
  return motion;
}

Environment prepare_environment(const ExperimentConfig& config) {
  config.validate();
  Environment env;
  env.model = discretize(config.structure, config.dt());
  env.motion = load_motion(config);
  env.delay = delay_steps_for(config.delay_seconds, config.dt());
  if (std::abs(env.delay.rounding_error) > 1e-9 * config.dt()) {
    std::clog << "warning: delay " << config.delay_seconds << " s rounded to " << env.delay.steps << " steps ("
              << env.delay.rounding_error << " s off)\n";
  }
  env.delay_mode = config.delay_mode;
  env.uncontrolled = uncontrolled_peaks(env.model, env.motion, env.delay_mode, env.delay.steps);
  env.reward = RewardConfig::from_peaks(env.uncontrolled);
  env.reward.force_penalty = config.force_penalty;
  env.reward.force_unit = config.force_unit;
  env.reward.signed_force = config.signed_force;
  env.reward.validate();
  const double xg_peak = env.motion.peak_abs();
  env.state_scale = state_scale(env.uncontrolled.displacement, env.uncontrolled.velocity,
                                env.uncontrolled.acceleration, xg_peak);
  return env;
}

double improvement_pct(double uncontrolled, double controlled) {
  return (uncontrolled - controlled) / uncontrolled * 100.0;
}

Improvement improvement(const ResponsePeaks& u, const ResponsePeaks& c) {
  return {improvement_pct(u.displacement, c.displacement), improvement_pct(u.velocity, c.velocity),
          improvement_pct(u.acceleration, c.acceleration)};
}

Evaluation evaluate(const ModelCheckpoint& model, const Environment& env) {
  if (model.net.input_dim() != kStateDim) {
    throw InputError("model expects " + std::to_string(model.net.input_dim()) + " inputs, environment provides " +
                     std::to_string(kStateDim));
  }
  if (model.action_forces.size() != model.net.output_dim()) {
    throw InputError("model action table does not match its output size");
  }
  std::array<double, kStateDim> scale = env.state_scale;
  if (!model.input_scale.empty()) {
    if (model.input_scale.size() != kStateDim) throw InputError("model input_scale has the wrong length");
    std::copy(model.input_scale.begin(), model.input_scale.end(), scale.begin());
  }
  StateTracker tracker(scale);
  NetWorkspace ws;
  const auto& xg = env.motion.samples;
  State state{};
  const Controller greedy = [&](std::size_t t, const ResponseSample& current) {
    state = tracker.observe(current, xg[t]);
    return model.action_forces[greedy_action(model.net.forward(state, ws))];
  };
  Evaluation e;
  e.trace = simulate(env.model, env.motion, greedy, env.delay.steps, env.delay_mode);
  e.peaks = peaks_of(e.trace);
  e.improvement = improvement(env.uncontrolled, e.peaks);
  return e;
}

gamma_filter::ProbeResult make_filter(const ExperimentConfig& config, const Environment& env) {
  gamma_filter::ProbeResult result;
  if (config.filter_override == "one_step") {
    result.filter = ReflexiveGamma::one_step(config.discount, config.dt());
    return result;
  }
  if (!config.filter_path.empty()) {
    result.filter = gamma_filter::load_csv(config.filter_path);
    return result;
  }
  auto settings = config.probe;
  settings.probe_force = config.probe_force();
  return gamma_filter::probe_and_build(env.model, env.delay.steps, settings);
}

std::optional<Improvement> best_improvement(const TrainingLog& log) {
  if (log.best) return log.episodes[*log.best].eval_improvement;
  return std::nullopt;
}

RunResult run(const ExperimentConfig& config, TrainingLog& log) {
  RunResult result;
  result.env = prepare_environment(config);
  const Environment& env = result.env;
  log = TrainingLog{};
  log.uncontrolled = env.uncontrolled;

  std::size_t window = 1;
  if (config.method == Method::Enhanced) {
    auto probe = make_filter(config, env);
    result.filter = std::move(probe.filter);
    result.probe_response = std::move(probe.response);
    window = result.filter->window();
  }
  result.notes.push_back("minibatches are drawn uniformly from the replay buffer");

  const std::vector<double> forces = config.actions.forces();
  std::vector<std::size_t> sizes{kStateDim};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(forces.size());

  QNetwork net = QNetwork::init(sizes, config.seed);
  TargetNetwork target(net);
  // Exploration and sampling draw from a stream independent of the initializer.
  Rng rng(config.seed * 0x9E3779B97F4A7C15ULL + 0x2545F4914F6CDD1DULL);
  ReplayBuffer buffer(config.buffer_capacity);
  WindowAssembler assembler(window);
  Plant plant(env.model, env.delay.steps, env.delay_mode);
  StateTracker tracker(env.state_scale);
  NetWorkspace ws;

  MinibatchSettings mb;
  mb.method = config.method;
  mb.batch_size = config.batch_size;
  mb.step_size = config.step_size;
  mb.discount = config.discount;
  mb.filter = result.filter ? &*result.filter : nullptr;

  auto checkpoint = [&](const QNetwork& n) {
    ModelCheckpoint m;
    m.net = n;
    m.input_scale.assign(env.state_scale.begin(), env.state_scale.end());
    m.action_forces = forces;
    return m;
  };

  const auto& xg = env.motion.samples;
  const std::size_t steps = xg.size();
  for (std::size_t episode = 0; episode < config.episodes; ++episode) {
    EpisodeRecord rec;
    rec.episode = episode;
    rec.epsilon = config.epsilon.at(episode, config.episodes);
    plant.reset();
    tracker.reset();
    State state = tracker.observe(plant.current(), xg[0]);
    double reward_sum = 0.0;
    double td_sum = 0.0;
    std::size_t td_count = 0;
    for (std::size_t t = 0; t < steps; ++t) {
      const std::size_t action = select_action(net, state, rec.epsilon, rng, ws);
      const ResponseSample sample = plant.advance(forces[action], xg[t]);
      const double r = reward(sample, env.reward);
      reward_sum += r;
      const State next = tracker.observe(sample, t + 1 < steps ? xg[t + 1] : 0.0);
      if (auto w = assembler.push(state, action, r, next)) buffer.push(std::move(*w));
      if (buffer.size() >= config.batch_size) {
        const MinibatchResult mr = train_minibatch(net, target, buffer, mb, rng, ws);
        td_sum += mr.mean_squared_td * static_cast<double>(mr.examples);
        td_count += mr.examples;
        ++rec.updates;
      }
      state = next;
    }
    for (auto& w : assembler.flush(state)) buffer.push(std::move(w));

    rec.mean_reward = reward_sum / static_cast<double>(steps);
    rec.mean_squared_td = td_count > 0 ? td_sum / static_cast<double>(td_count) : 0.0;
    if ((episode + 1) % config.target_sync_episodes == 0) target.sync(net);

    if ((episode + 1) % config.eval_every == 0 || episode + 1 == config.episodes) {
      const ModelCheckpoint snapshot = checkpoint(net);
      const Evaluation e = evaluate(snapshot, env);
      rec.eval_peaks = e.peaks;
      rec.eval_improvement = e.improvement;
      if (!log.best || e.improvement.displacement > log.episodes[*log.best].eval_improvement->displacement) {
        log.best = log.episodes.size();
        result.best_model = snapshot;
      }
    }
    log.episodes.push_back(rec);
  }
  result.final_model = checkpoint(net);
  return result;
}

}  // namespace reflexq
