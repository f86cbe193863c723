#include "reflexq/gamma_filter.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "reflexq/errors.hpp"
#include "reflexq/text_io.hpp"

namespace reflexq {

ReflexiveGamma ReflexiveGamma::one_step(double discount, double dt) {
  ReflexiveGamma f;
  f.gammas = {1.0};
  f.bootstrap_gamma = discount;
  f.dt = dt;
  f.cutoff_percent = 0.0;
  f.peak_index = 0;
  return f;
}

namespace gamma_filter {

namespace {

struct Point {
  double index;  // -1 for the virtual anchor before the series
  double value;
};

void check_response(std::span<const double> response) {
  if (response.empty()) throw InputError("gamma filter: empty response");
  bool positive = false;
  for (double v : response) {
    if (!std::isfinite(v) || v < 0.0) throw InputError("gamma filter: response must be finite and non-negative");
    positive = positive || v > 0.0;
  }
  if (!positive) throw InputError("gamma filter: all-zero response");
}

}  // namespace

std::vector<double> probe(const DiscreteModel& model, std::size_t delay_steps, double probe_force,
                          std::size_t horizon_steps) {
  if (!std::isfinite(probe_force) || probe_force == 0.0) throw InputError("probe force must be finite and non-zero");
  Plant plant(model, delay_steps, DelayMode::ForceOnly);
  std::vector<double> out;
  out.reserve(horizon_steps);
  for (std::size_t k = 0; k < horizon_steps; ++k) {
    const ResponseSample s = plant.advance(k == 0 ? probe_force : 0.0, 0.0);
    out.push_back(std::abs(s.displacement));
  }
  return out;
}

std::vector<double> envelope(std::span<const double> response) {
  check_response(response);
  const std::size_t n = response.size();
  const double top = *std::max_element(response.begin(), response.end());
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) y[k] = response[k] / top;

  std::size_t leading = 0;
  while (leading < n && y[leading] == 0.0) ++leading;
  const auto global = static_cast<std::size_t>(std::find(y.begin(), y.end(), 1.0) - y.begin());

  std::vector<std::size_t> peaks;
  for (std::size_t k = leading; k + 1 < n; ++k) {
    const double prev = k == 0 ? 0.0 : y[k - 1];
    if (y[k] >= prev && y[k] > y[k + 1]) peaks.push_back(k);
  }

  // Rising side keeps record highs, falling side keeps peaks that dominate everything after them,
  // so chords between kept points are monotone on each side of the global peak.
  std::vector<Point> kept;
  kept.push_back({static_cast<double>(leading) - 1.0, 0.0});
  double best = 0.0;
  for (std::size_t k : peaks) {
    if (k >= global) break;
    if (y[k] > best) {
      kept.push_back({static_cast<double>(k), y[k]});
      best = y[k];
    }
  }
  kept.push_back({static_cast<double>(global), 1.0});
  std::vector<Point> right;
  double floor = -1.0;
  for (auto it = peaks.rbegin(); it != peaks.rend() && *it > global; ++it) {
    if (y[*it] > floor) {
      right.push_back({static_cast<double>(*it), y[*it]});
      floor = y[*it];
    }
  }
  kept.insert(kept.end(), right.rbegin(), right.rend());

  std::vector<double> env(y);
  std::size_t seg = 0;
  for (std::size_t k = leading; k < n; ++k) {
    const auto kd = static_cast<double>(k);
    while (seg + 1 < kept.size() && kept[seg + 1].index <= kd) ++seg;
    if (kept[seg].index == kd || seg + 1 >= kept.size()) continue;
    const Point& a = kept[seg];
    const Point& b = kept[seg + 1];
    const double chord = a.value + (b.value - a.value) * (kd - a.index) / (b.index - a.index);
    env[k] = std::max(y[k], chord);
  }
  return env;
}

ReflexiveGamma build(std::span<const double> response, double cutoff_percent, double dt, CutoffRule rule) {
  if (!(cutoff_percent > 0.0 && cutoff_percent < 100.0)) {
    throw InputError("gamma filter: cutoff percent must lie in (0, 100)");
  }
  if (!(dt > 0.0)) throw InputError("gamma filter: dt must be > 0");
  const std::vector<double> env = envelope(response);
  const auto peak = static_cast<std::size_t>(std::max_element(env.begin(), env.end()) - env.begin());
  const double threshold = rule == CutoffRule::DropBy ? 1.0 - cutoff_percent / 100.0 : cutoff_percent / 100.0;

  std::optional<std::size_t> cutoff;
  for (std::size_t k = peak + 1; k < env.size(); ++k) {
    if (env[k] < threshold) {
      cutoff = k;
      break;
    }
  }
  if (!cutoff) {
    throw CutoffNotReached("gamma filter: response never fell below " + text::format_double(threshold) +
                           " of its peak within " + std::to_string(env.size()) + " steps");
  }
  ReflexiveGamma f;
  f.gammas.assign(env.begin(), env.begin() + static_cast<std::ptrdiff_t>(*cutoff));
  f.bootstrap_gamma = env[*cutoff];
  f.dt = dt;
  f.cutoff_percent = cutoff_percent;
  f.rule = rule;
  f.peak_index = peak;
  return f;
}

ProbeResult probe_and_build(const DiscreteModel& model, std::size_t delay_steps, const ProbeSettings& settings) {
  const double steps_per_period = model.params.period() / model.dt;
  const auto initial = static_cast<std::size_t>(std::ceil(settings.horizon_periods * steps_per_period)) + 1;
  const auto cap = delay_steps + static_cast<std::size_t>(std::ceil(settings.cap_periods * steps_per_period));
  std::size_t horizon = std::min(cap, delay_steps + initial);
  while (true) {
    ProbeResult result;
    result.response = probe(model, delay_steps, settings.probe_force, horizon);
    try {
      result.filter = build(result.response, settings.cutoff_percent, model.dt, settings.rule);
      // Keep at least the initial window of samples past the cutoff so the
      // envelope near the cutoff sees the following peak.
      if (result.filter.gammas.size() + initial <= horizon || horizon >= cap) {
        result.filter.probe_force = settings.probe_force;
        return result;
      }
    } catch (const CutoffNotReached&) {
      if (horizon >= cap) {
        throw ProbeFailed("probe failed: no cutoff within " + std::to_string(settings.cap_periods) +
                          " natural periods after the delay (" + std::to_string(horizon) + " steps)");
      }
    } catch (const InputError&) {
      if (horizon >= cap) throw ProbeFailed("probe failed: response stayed zero up to the horizon cap");
    }
    horizon = std::min(cap, 2 * horizon);
  }
}

double weighted_reward_sum(const ReflexiveGamma& filter, std::span<const double> rewards) {
  if (rewards.size() > filter.gammas.size()) {
    throw InputError("reward window longer than the filter (" + std::to_string(rewards.size()) + " > " +
                     std::to_string(filter.gammas.size()) + ")");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < rewards.size(); ++j) acc += filter.gammas[j] * rewards[j];
  return acc;
}

double enhanced_target(const ReflexiveGamma& filter, std::span<const double> rewards, double max_next_q) {
  if (rewards.size() != filter.gammas.size()) {
    throw InputError("reward window length " + std::to_string(rewards.size()) + " does not match filter length " +
                     std::to_string(filter.gammas.size()));
  }
  return weighted_reward_sum(filter, rewards) + filter.bootstrap_gamma * max_next_q;
}

std::string to_string(CutoffRule rule) { return rule == CutoffRule::DropBy ? "by" : "to"; }

CutoffRule parse_cutoff_rule(const std::string& name) {
  if (name == "by") return CutoffRule::DropBy;
  if (name == "to") return CutoffRule::DropTo;
  throw InputError("unknown cutoff rule '" + name + "' (by|to)");
}

std::string to_csv(const ReflexiveGamma& f) {
  using text::format_double;
  std::string out = "# reflexive gamma filter\n";
  out += "# meta: dt=" + format_double(f.dt) + ";probe_force=" + format_double(f.probe_force) +
         ";cutoff_percent=" + format_double(f.cutoff_percent) + ";cutoff_rule=" + to_string(f.rule) +
         ";peak_index=" + std::to_string(f.peak_index) + "\n";
  out += "# step_index,gamma\n";
  for (std::size_t j = 0; j < f.gammas.size(); ++j) {
    out += std::to_string(j) + "," + format_double(f.gammas[j]) + "\n";
  }
  out += "bootstrap," + format_double(f.bootstrap_gamma) + "\n";
  return out;
}

ReflexiveGamma from_csv(const std::string& contents) {
  ReflexiveGamma f;
  bool have_bootstrap = false;
  std::istringstream in(contents);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty()) continue;
    if (body.starts_with("# meta:")) {
      for (const auto& kv : text::split(text::trim(body.substr(7)), ';')) {
        const auto parts = text::split(kv, '=');
        if (parts.size() != 2) throw InputError("filter csv: bad meta entry '" + kv + "'");
        const auto key = std::string(text::trim(parts[0]));
        if (key == "dt") f.dt = text::parse_double(parts[1], "dt");
        else if (key == "probe_force") f.probe_force = text::parse_double(parts[1], "probe_force");
        else if (key == "cutoff_percent") f.cutoff_percent = text::parse_double(parts[1], "cutoff_percent");
        else if (key == "cutoff_rule") f.rule = parse_cutoff_rule(std::string(text::trim(parts[1])));
        else if (key == "peak_index") f.peak_index = static_cast<std::size_t>(text::parse_int(parts[1], "peak_index"));
      }
      continue;
    }
    if (body.front() == '#') continue;
    if (have_bootstrap) throw InputError("filter csv: rows after the bootstrap row (line " + std::to_string(line_no) + ")");
    const auto cols = text::split(body, ',');
    if (cols.size() != 2) throw InputError("filter csv: malformed row at line " + std::to_string(line_no));
    const std::string where = "filter csv line " + std::to_string(line_no);
    if (text::trim(cols[0]) == "bootstrap") {
      f.bootstrap_gamma = text::parse_double(cols[1], where);
      have_bootstrap = true;
      continue;
    }
    const auto index = text::parse_int(cols[0], where);
    if (index != static_cast<long long>(f.gammas.size())) {
      throw InputError("filter csv: step indices must be consecutive from 0 (line " + std::to_string(line_no) + ")");
    }
    f.gammas.push_back(text::parse_double(cols[1], where));
  }
  if (f.gammas.empty() || !have_bootstrap) throw InputError("filter csv: needs at least one gamma row and a bootstrap row");
  return f;
}

void write_csv(const ReflexiveGamma& filter, const std::filesystem::path& path) {
  text::write_file(path, to_csv(filter));
}

ReflexiveGamma load_csv(const std::filesystem::path& path) { return from_csv(text::read_file(path)); }

}  // namespace gamma_filter
}  // namespace reflexq
