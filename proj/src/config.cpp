#include "reflexq/config.hpp"

#include <sstream>

#include "reflexq/errors.hpp"
#include "reflexq/text_io.hpp"

namespace reflexq {

namespace {

struct KeyDefault {
  const char* key;
  const char* value;
  ValueBasis basis;
  const char* help;
};

constexpr ValueBasis P = ValueBasis::Paper;
constexpr ValueBasis A = ValueBasis::Assumed;

// clang-format off
const KeyDefault kDefaults[] = {
  {"structure.mass", "2000", P, "lumped roof mass (kg)"},
  {"structure.stiffness", "7.9e6", P, "lateral stiffness (N/m)"},
  {"structure.damping", "2.5e5", P, "viscous damping (N*s/m)"},
  {"record.path", "", A, "ground-motion file (.csv or .AT2); empty synthesizes a record"},
  {"record.synthetic.kind", "white_noise", A, "sine | sweep | white_noise"},
  {"record.synthetic.duration", "60", A, "synthetic record length (s)"},
  {"record.synthetic.amplitude", "1", A, "peak (sine/sweep) or std (white noise), m/s^2"},
  {"record.synthetic.seed", "1", A, "synthetic record seed"},
  {"record.synthetic.frequency", "1", A, "sine / sweep start frequency (Hz)"},
  {"record.synthetic.frequency_end", "20", A, "sweep end frequency (Hz)"},
  {"delay.seconds", "0", P, "action-effect delay (s); scenarios 0, 5, 10"},
  {"delay.mode", "force", A, "force | force_and_excitation"},
  {"method", "enhanced", A, "original | enhanced"},
  {"train.episodes", "1000", P, "training episodes"},
  {"train.steps_per_episode", "6000", P, "states per episode; record trimmed or zero-padded (0 keeps length)"},
  {"train.sample_rate", "100", P, "sensor / control rate (Hz)"},
  {"train.buffer_capacity", "60000", P, "experience buffer size"},
  {"train.batch_size", "50", P, "minibatch size"},
  {"train.target_sync_episodes", "50", P, "target network sync period (episodes)"},
  {"train.epsilon.start", "1.0", P, "initial exploration rate"},
  {"train.epsilon.min", "0.1", P, "final exploration rate"},
  {"train.epsilon.decay_fraction", "0.8", A, "fraction of episodes over which epsilon decays linearly"},
  {"train.seed", "1", A, "run seed"},
  {"train.eval_every", "10", A, "greedy evaluation period (episodes)"},
  {"train.step_size", "1e-3", A, "SGD step size"},
  {"train.discount", "0.99", A, "discount of the original method"},
  {"filter.cutoff_percent", "15", P, "truncation percentage p"},
  {"filter.cutoff_rule", "by", A, "by: below (1-p/100) of peak | to: below p/100 of peak"},
  {"filter.probe_force", "0", A, "probe force (N); 0 uses actions.max_force"},
  {"filter.horizon_periods", "4", A, "initial probe window after the delay (natural periods)"},
  {"filter.cap_periods", "1000", A, "probe horizon cap after the delay (natural periods)"},
  {"filter.override", "none", A, "none | one_step (weights [1], bootstrap = train.discount)"},
  {"filter.path", "", A, "load the filter from a CSV instead of probing"},
  {"reward.force_penalty", "0.005", P, "penalty per force unit"},
  {"reward.force_unit", "1000", A, "force unit for the penalty (N)"},
  {"reward.signed_force", "false", A, "use the literal signed force term"},
  {"actions.count", "11", A, "number of discrete actions (odd)"},
  {"actions.max_force", "10000", A, "largest actuator force (N)"},
  {"net.hidden", "40,40", P, "hidden layer sizes"},
};
// clang-format on

std::size_t as_count(const ConfigMap& m, const std::string& key) {
  const long long v = text::parse_int(m.get(key), key);
  if (v < 0) throw InputError(key + " must be >= 0");
  return static_cast<std::size_t>(v);
}

double as_double(const ConfigMap& m, const std::string& key) { return text::parse_double(m.get(key), key); }

bool as_bool(const ConfigMap& m, const std::string& key) {
  const auto& v = m.get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InputError(key + " must be true or false");
}

}  // namespace

ConfigMap::ConfigMap() {
  for (const auto& d : kDefaults) entries_[d.key] = Entry{d.value, ValueOrigin::Default, d.basis, d.help};
}

void ConfigMap::set(const std::string& key, const std::string& value, ValueOrigin origin) {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw InputError("unknown config key '" + key + "'");
  it->second.value = value;
  it->second.origin = origin;
  it->second.basis = ValueBasis::User;
}

void ConfigMap::set_assignment(const std::string& assignment, ValueOrigin origin) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw InputError("expected key=value, got '" + assignment + "'");
  set(std::string(text::trim(assignment.substr(0, eq))), std::string(text::trim(assignment.substr(eq + 1))), origin);
}

void ConfigMap::load_text(const std::string& contents, const std::string& source_name) {
  std::istringstream in(contents);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const auto body = text::trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    if (body.find('=') == std::string_view::npos) {
      throw InputError(source_name + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      set_assignment(std::string(body), ValueOrigin::File);
    } catch (const InputError& e) {
      throw InputError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void ConfigMap::load_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InputError("config file not found: " + path.string());
  load_text(text::read_file(path), path.string());
}

const ConfigMap::Entry& ConfigMap::entry(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw InputError("unknown config key '" + key + "'");
  return it->second;
}

const std::string& ConfigMap::get(const std::string& key) const { return entry(key).value; }

std::string to_string(ValueOrigin origin) {
  switch (origin) {
    case ValueOrigin::Default: return "default";
    case ValueOrigin::File: return "file";
    case ValueOrigin::Flag: return "flag";
  }
  return "unknown";
}

std::string to_string(ValueBasis basis) {
  switch (basis) {
    case ValueBasis::Paper: return "paper";
    case ValueBasis::Assumed: return "assumed";
    case ValueBasis::User: return "user";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  structure.validate();
  if (!(sample_rate > 0.0)) throw InputError("train.sample_rate must be > 0");
  if (!(delay_seconds >= 0.0)) throw InputError("delay.seconds must be >= 0");
  if (batch_size == 0) throw InputError("train.batch_size must be >= 1");
  if (buffer_capacity < batch_size) throw InputError("train.buffer_capacity must be >= train.batch_size");
  if (target_sync_episodes == 0) throw InputError("train.target_sync_episodes must be >= 1");
  if (eval_every == 0) throw InputError("train.eval_every must be >= 1");
  if (!(step_size > 0.0)) throw InputError("train.step_size must be > 0");
  if (!(discount >= 0.0 && discount <= 1.0)) throw InputError("train.discount must lie in [0, 1]");
  if (!(epsilon.min >= 0.0 && epsilon.start <= 1.0 && epsilon.min <= epsilon.start)) {
    throw InputError("epsilon schedule must satisfy 0 <= min <= start <= 1");
  }
  if (filter_override != "none" && filter_override != "one_step") {
    throw InputError("filter.override must be none or one_step");
  }
  if (hidden.empty()) throw InputError("net.hidden needs at least one layer");
  actions.validate();
}

ExperimentConfig resolve(const ConfigMap& m) {
  ExperimentConfig c;
  c.structure.mass = as_double(m, "structure.mass");
  c.structure.stiffness = as_double(m, "structure.stiffness");
  c.structure.damping = as_double(m, "structure.damping");

  c.record.path = m.get("record.path");
  c.record.synth.kind = excitation::parse_synth_kind(m.get("record.synthetic.kind"));
  c.record.synth.duration = as_double(m, "record.synthetic.duration");
  c.record.synth.amplitude = as_double(m, "record.synthetic.amplitude");
  c.record.synth.seed = as_count(m, "record.synthetic.seed");
  c.record.synth.frequency = as_double(m, "record.synthetic.frequency");
  c.record.synth.frequency_end = as_double(m, "record.synthetic.frequency_end");

  c.delay_seconds = as_double(m, "delay.seconds");
  const auto& mode = m.get("delay.mode");
  if (mode == "force") c.delay_mode = DelayMode::ForceOnly;
  else if (mode == "force_and_excitation") c.delay_mode = DelayMode::ForceAndExcitation;
  else throw InputError("delay.mode must be force or force_and_excitation");
  c.method = parse_method(m.get("method"));

  c.episodes = as_count(m, "train.episodes");
  c.steps_per_episode = as_count(m, "train.steps_per_episode");
  c.sample_rate = as_double(m, "train.sample_rate");
  c.buffer_capacity = as_count(m, "train.buffer_capacity");
  c.batch_size = as_count(m, "train.batch_size");
  c.target_sync_episodes = as_count(m, "train.target_sync_episodes");
  c.epsilon.start = as_double(m, "train.epsilon.start");
  c.epsilon.min = as_double(m, "train.epsilon.min");
  c.epsilon.decay_fraction = as_double(m, "train.epsilon.decay_fraction");
  c.seed = as_count(m, "train.seed");
  c.eval_every = as_count(m, "train.eval_every");
  c.step_size = as_double(m, "train.step_size");
  c.discount = as_double(m, "train.discount");

  c.probe.cutoff_percent = as_double(m, "filter.cutoff_percent");
  c.probe.rule = gamma_filter::parse_cutoff_rule(m.get("filter.cutoff_rule"));
  c.probe.probe_force = as_double(m, "filter.probe_force");
  c.probe.horizon_periods = as_double(m, "filter.horizon_periods");
  c.probe.cap_periods = as_double(m, "filter.cap_periods");
  c.filter_override = m.get("filter.override");
  c.filter_path = m.get("filter.path");

  c.force_penalty = as_double(m, "reward.force_penalty");
  c.force_unit = as_double(m, "reward.force_unit");
  c.signed_force = as_bool(m, "reward.signed_force");

  c.actions.n_actions = as_count(m, "actions.count");
  c.actions.max_force = as_double(m, "actions.max_force");

  c.hidden.clear();
  for (const auto& part : text::split(m.get("net.hidden"), ',')) {
    const long long v = text::parse_int(part, "net.hidden");
    if (v <= 0) throw InputError("net.hidden sizes must be >= 1");
    c.hidden.push_back(static_cast<std::size_t>(v));
  }
  c.validate();
  return c;
}

}  // namespace reflexq
