#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "reflexq/agent.hpp"
#include "reflexq/dynamics.hpp"
#include "reflexq/excitation.hpp"
#include "reflexq/gamma_filter.hpp"

namespace reflexq {

/// Where a config value came from; precedence is Flag > File > Default.
enum class ValueOrigin { Default, File, Flag };

/// Why a default has the value it has.
enum class ValueBasis { Paper, Assumed, User };

/// Flat dotted-key configuration ("train.batch_size = 50"), restricted to known keys.
class ConfigMap {
 public:
  struct Entry {
    std::string value;
    ValueOrigin origin = ValueOrigin::Default;
    ValueBasis basis = ValueBasis::Assumed;
    std::string help;
  };

  /// All known keys at their defaults.
  ConfigMap();

  /// "key = value" lines; '#' starts a comment. Unknown keys are errors.
  void load_file(const std::filesystem::path& path);
  void load_text(const std::string& text, const std::string& source_name);
  void set(const std::string& key, const std::string& value, ValueOrigin origin);
  /// "key=value" as given on the command line.
  void set_assignment(const std::string& assignment, ValueOrigin origin);

  const std::string& get(const std::string& key) const;
  const Entry& entry(const std::string& key) const;
  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  std::map<std::string, Entry> entries_;
};

std::string to_string(ValueOrigin origin);
std::string to_string(ValueBasis basis);

struct RecordSpec {
  std::filesystem::path path;  // empty: synthesize
  excitation::SynthParams synth;
};

struct ExperimentConfig {
  SdofParams structure;
  RecordSpec record;
  double delay_seconds = 0.0;
  DelayMode delay_mode = DelayMode::ForceOnly;
  Method method = Method::Enhanced;

  std::size_t episodes = 1000;
  std::size_t steps_per_episode = 6000;  // 0 keeps the record length
  double sample_rate = 100.0;
  std::size_t buffer_capacity = 60000;
  std::size_t batch_size = 50;
  std::size_t target_sync_episodes = 50;
  EpsilonSchedule epsilon;
  std::uint64_t seed = 1;
  std::size_t eval_every = 10;
  double step_size = 1e-3;
  double discount = 0.99;

  gamma_filter::ProbeSettings probe;  // probe_force 0 means "use actions.max_force"
  std::string filter_override = "none";  // none | one_step
  std::filesystem::path filter_path;

  double force_penalty = 0.005;
  double force_unit = 1000.0;
  bool signed_force = false;

  ActionSpace actions;
  std::vector<std::size_t> hidden = {40, 40};

  double dt() const { return 1.0 / sample_rate; }
  double probe_force() const { return probe.probe_force > 0.0 ? probe.probe_force : actions.max_force; }
  void validate() const;
};

ExperimentConfig resolve(const ConfigMap& map);

}  // namespace reflexq
