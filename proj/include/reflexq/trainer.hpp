#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "reflexq/agent.hpp"
#include "reflexq/config.hpp"
#include "reflexq/gamma_filter.hpp"
#include "reflexq/nn.hpp"
#include "reflexq/reward.hpp"

namespace reflexq {

/// Everything fixed by the structure and record: the plant, the baseline, the normalizers.
struct Environment {
  DiscreteModel model;
  GroundMotion motion;
  DelayRounding delay;
  DelayMode delay_mode = DelayMode::ForceOnly;
  ResponsePeaks uncontrolled;
  RewardConfig reward;
  std::array<double, kStateDim> state_scale{};
};

/// Loads or synthesizes the record, resampled to the control rate and fitted to the episode length.
GroundMotion load_motion(const ExperimentConfig& config);
Environment prepare_environment(const ExperimentConfig& config);

/// (uncontrolled - controlled) / uncontrolled * 100
double improvement_pct(double uncontrolled, double controlled);

struct Improvement {
  double displacement = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;
};
Improvement improvement(const ResponsePeaks& uncontrolled, const ResponsePeaks& controlled);

struct Evaluation {
  std::vector<ResponseSample> trace;
  ResponsePeaks peaks;
  Improvement improvement;
};

/// Greedy closed-loop rollout of a checkpoint. Throws InputError on dimension mismatch.
Evaluation evaluate(const ModelCheckpoint& model, const Environment& env);

struct EpisodeRecord {
  std::size_t episode = 0;
  double epsilon = 0.0;
  double mean_reward = 0.0;
  double mean_squared_td = 0.0;
  std::size_t updates = 0;
  std::optional<ResponsePeaks> eval_peaks;
  std::optional<Improvement> eval_improvement;
};

struct TrainingLog {
  ResponsePeaks uncontrolled;
  std::vector<EpisodeRecord> episodes;
  std::optional<std::size_t> best;  // index into episodes of the best evaluation
};

struct RunResult {
  Environment env;
  std::optional<ReflexiveGamma> filter;
  std::vector<double> probe_response;
  ModelCheckpoint final_model;
  std::optional<ModelCheckpoint> best_model;
  std::vector<std::string> notes;
};

/// The reflexive filter a config asks for: override, file, or a fresh probe.
gamma_filter::ProbeResult make_filter(const ExperimentConfig& config, const Environment& env);

/// Full training protocol. `log` grows episode by episode so a failure leaves the partial log in place.
RunResult run(const ExperimentConfig& config, TrainingLog& log);

/// Best-evaluation snapshot, falling back to the last episode.
std::optional<Improvement> best_improvement(const TrainingLog& log);

}  // namespace reflexq
