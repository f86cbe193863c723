// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fails.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "filter_properties.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "reflexq/config.hpp"
#include "reflexq/dynamics.hpp"
#include "reflexq/gamma_filter.hpp"
#include "reflexq/report.hpp"
#include "reflexq/text_io.hpp"
#include "reflexq/trainer.hpp"
#include "temp_dir.hpp"

using namespace reflexq;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

// Desk experiment: 20 s white-noise record, delayed actuation and sensing.
const char* kDesk =
    "record.synthetic.kind = white_noise\n"
    "record.synthetic.amplitude = 3\n"
    "record.synthetic.duration = 20\n"
    "train.steps_per_episode = 0\n"
    "train.episodes = 150\n"
    "delay.mode = force_and_excitation\n";

ExperimentConfig desk(const std::string& extra) {
  ConfigMap m;
  m.load_text(kDesk, "desk");
  m.load_text(extra, "case");
  return resolve(m);
}

struct DeskRun {
  double best = 0.0;  // best evaluated displacement improvement (%)
  double mean = 0.0;  // mean displacement improvement over all evaluations (%)
  std::string error;
};

DeskRun desk_run(const std::string& method, double delay, std::size_t seed) {
  DeskRun out;
  try {
    const ExperimentConfig c = desk("method = " + method + "\ndelay.seconds = " + text::format_double(delay) +
                                    "\ntrain.seed = " + std::to_string(seed) + "\n");
    TrainingLog log;
    run(c, log);
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& e : log.episodes) {
      if (!e.eval_improvement) continue;
      sum += e.eval_improvement->displacement;
      ++n;
    }
    out.mean = n ? sum / static_cast<double>(n) : 0.0;
    out.best = best_improvement(log).value_or(Improvement{}).displacement;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

// Runs are cached so criteria 6 and 7 share the delayed runs.
std::map<std::tuple<std::string, double, std::size_t>, DeskRun> g_runs;

void ensure_runs(const std::vector<std::tuple<std::string, double, std::size_t>>& keys) {
  std::vector<std::tuple<std::string, double, std::size_t>> todo;
  for (const auto& k : keys) {
    if (!g_runs.count(k)) todo.push_back(k);
  }
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t i = 0; i < todo.size(); i += workers) {
    std::vector<std::future<DeskRun>> batch;
    for (std::size_t j = i; j < std::min(todo.size(), i + workers); ++j) {
      const auto [m, d, s] = todo[j];
      batch.push_back(std::async(std::launch::async, desk_run, m, d, s));
    }
    for (std::size_t j = 0; j < batch.size(); ++j) g_runs[todo[i + j]] = batch[j].get();
  }
}

const std::vector<std::size_t> kSeeds{1, 2, 3, 4, 5};
constexpr double kDeskDelay = 1.0;

int run_cli(const std::string& args) {
  const std::string cmd = std::string(REFLEXQ_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome zoh_free_decay() {
  const auto t0 = Clock::now();
  const SdofParams p;
  const oracle::Sdof o{p.mass, p.stiffness, p.damping};
  const DiscreteModel model = discretize(p, 0.01);
  const double x0 = 0.01;
  StateVector x{x0, 0.0};
  double worst = 0.0;
  for (std::size_t i = 1; i <= 1000; ++i) {
    x = step(model, x, 0.0, 0.0, i).state;
    const double t = 0.01 * static_cast<double>(i);
    const double scale = x0 * std::exp(-o.zeta() * o.omega() * t);
    worst = std::max(worst, std::abs(x.displacement - oracle::free_decay(o, x0, 0.0, t)) / scale);
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-8 && secs < 1.0, "max relative error " + fmt(worst) + ", " + fmt(secs) + " s"};
}

Outcome gradient_check() {
  double worst = 0.0;
  const std::size_t cases = 12;
  for (std::size_t s = 0; s < cases; ++s) {
    const auto c = gradcheck::random_case({6, 40, 40, 11}, 100 + s);
    worst = std::max(worst, gradcheck::max_relative_error(c.net, c.input, c.action, c.target));
  }
  return {worst <= 1e-4, std::to_string(cases) + " networks, max relative error " + fmt(worst)};
}

Outcome one_step_reduction() {
  const auto t0 = Clock::now();
  const std::string common = "train.episodes = 50\ntrain.seed = 7\ndelay.seconds = 0\n";
  const ExperimentConfig orig = desk(common + "method = original\n");
  const ExperimentConfig enh = desk(common + "method = enhanced\nfilter.override = one_step\n");
  TrainingLog a, b;
  run(orig, a);
  run(enh, b);
  const std::string la = report::training_log_csv(a), lb = report::training_log_csv(b);
  const double secs = seconds_since(t0);
  return {la == lb && secs < 120.0, std::string(la == lb ? "logs identical" : "logs differ") + ", " +
                                        std::to_string(a.episodes.size()) + " episodes, " + fmt(secs) + " s"};
}

Outcome filter_invariants() {
  Rng rng(2024);
  std::size_t built = 0;
  for (int i = 0; i < 100; ++i) {
    const auto o = props::random_oscillation(rng);
    const double p = uniform(rng, 1.0, 60.0);
    const CutoffRule rule = i % 2 ? CutoffRule::DropTo : CutoffRule::DropBy;
    try {
      const ReflexiveGamma f = gamma_filter::build(o.response, p, 0.01, rule);
      const std::string v = props::filter_violation(f, p, rule);
      if (!v.empty()) return {false, "case " + std::to_string(i) + ": " + v};
      ++built;
    } catch (const std::exception& e) {
      return {false, "case " + std::to_string(i) + ": " + e.what()};
    }
  }
  return {built == 100, std::to_string(built) + "/100 filters satisfy every invariant"};
}

Outcome published_tables() {
  struct Row {
    const char* label;
    double u, c, printed;
  };
  // displacement (cm), velocity (m/s), acceleration (m/s^2) for delays 0, 5, 10 s
  const Row rows[] = {
      {"d0 original dis", 4.39, 4.06, 7.1},    {"d0 original vel", 0.91, 0.83, 8.7},
      {"d0 original acc", 22.97, 16.84, 26.7}, {"d0 enhanced dis", 4.39, 2.36, 46.1},
      {"d0 enhanced vel", 0.91, 0.54, 41.0},   {"d0 enhanced acc", 22.97, 14.28, 37.8},
      {"d5 original dis", 4.39, 4.24, 3.4},    {"d5 original vel", 0.91, 0.85, 6.5},
      {"d5 original acc", 22.93, 20.0, 12.8},  {"d5 enhanced dis", 4.39, 3.06, 30.2},
      {"d5 enhanced vel", 0.91, 0.62, 32.2},   {"d5 enhanced acc", 22.93, 16.38, 28.5},
      {"d10 original dis", 4.39, 4.37, 0.41},  {"d10 original vel", 0.91, 0.89, 1.81},
      {"d10 original acc", 22.93, 22.31, 2.70}, {"d10 enhanced dis", 4.39, 3.15, 28.2},
      {"d10 enhanced vel", 0.91, 0.66, 26.9},  {"d10 enhanced acc", 22.93, 17.65, 23.0},
  };
  std::size_t ok = 0;
  std::string misses;
  for (const auto& r : rows) {
    const double v = improvement_pct(r.u, r.c);
    if (std::abs(v - r.printed) <= 0.5) {
      ++ok;
    } else {
      misses += std::string(misses.empty() ? "" : "; ") + r.label + " computes " + fmt(v, 4) + " vs " +
                fmt(r.printed, 4);
    }
  }
  return {ok == std::size(rows), std::to_string(ok) + "/18 rows within 0.5 pp" + (misses.empty() ? "" : ": " + misses)};
}

std::string run_error(const std::vector<std::tuple<std::string, double, std::size_t>>& keys) {
  for (const auto& k : keys) {
    if (!g_runs[k].error.empty()) return std::get<0>(k) + " seed " + std::to_string(std::get<2>(k)) + ": " + g_runs[k].error;
  }
  return {};
}

Outcome desk_comparison() {
  const auto t0 = Clock::now();
  std::vector<std::tuple<std::string, double, std::size_t>> keys;
  for (auto s : kSeeds) {
    keys.emplace_back("original", kDeskDelay, s);
    keys.emplace_back("enhanced", kDeskDelay, s);
  }
  ensure_runs(keys);
  if (auto e = run_error(keys); !e.empty()) return {false, e};
  std::size_t wins = 0;
  double mean_o = 0.0, mean_e = 0.0;
  std::ostringstream per;
  for (auto s : kSeeds) {
    const double o = g_runs[{"original", kDeskDelay, s}].best;
    const double e = g_runs[{"enhanced", kDeskDelay, s}].best;
    wins += e > o;
    mean_o += o / kSeeds.size();
    mean_e += e / kSeeds.size();
    per << (s == kSeeds.front() ? "" : " ") << fmt(e) << "/" << fmt(o);
  }
  const double secs = seconds_since(t0);
  return {wins >= 4 && mean_e > mean_o && secs < 900.0,
          "enhanced beats original in " + std::to_string(wins) + "/5 seeds (best dis. % enh/orig: " + per.str() +
              "), means " + fmt(mean_e) + " vs " + fmt(mean_o) + ", " + fmt(secs) + " s"};
}

Outcome delay_degradation() {
  std::vector<std::tuple<std::string, double, std::size_t>> keys;
  for (auto s : kSeeds) {
    for (const char* m : {"original", "enhanced"}) {
      keys.emplace_back(m, 0.0, s);
      keys.emplace_back(m, kDeskDelay, s);
    }
  }
  ensure_runs(keys);
  if (auto e = run_error(keys); !e.empty()) return {false, e};
  auto degradation = [](const std::string& m, std::size_t s) {
    const double i0 = g_runs[{m, 0.0, s}].mean, i1 = g_runs[{m, kDeskDelay, s}].mean;
    return i0 == 0.0 ? 0.0 : (i0 - i1) / std::abs(i0);
  };
  std::size_t wins = 0;
  std::ostringstream per;
  for (auto s : kSeeds) {
    const double o = degradation("original", s), e = degradation("enhanced", s);
    wins += o > e;
    per << (s == kSeeds.front() ? "" : " ") << fmt(o) << "/" << fmt(e);
  }
  return {wins >= 4, "original degrades more in " + std::to_string(wins) +
                         "/5 seeds (relative degradation orig/enh: " + per.str() + ")"};
}

Outcome cli_reproducibility() {
  TempDir dir;
  const std::string args =
      "train --method enhanced --delay 0.2 --seed 11 --episodes 4 --set record.synthetic.duration=5 "
      "--set train.steps_per_episode=0 --set train.eval_every=2 --out ";
  if (run_cli(args + (dir / "a").string()) != 0 || run_cli(args + (dir / "b").string()) != 0) {
    return {false, "train exited with an error"};
  }
  std::size_t same = 0, total = 0;
  std::string differ;
  for (const auto& entry : std::filesystem::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename().string();
    if (name == "manifest.json") continue;  // timestamp and wall clock
    ++total;
    const auto other = dir / "b" / name;
    if (std::filesystem::exists(other) && text::read_file(entry.path()) == text::read_file(other)) {
      ++same;
    } else {
      differ += " " + name;
    }
  }
  return {total >= 8 && same == total,
          std::to_string(same) + "/" + std::to_string(total) + " artifacts byte-identical" +
              (differ.empty() ? "" : ", differing:" + differ)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"ZOH free decay matches closed form", zoh_free_decay},
      {"MLP gradients match finite differences", gradient_check},
      {"one-step filter reproduces the original method", one_step_reduction},
      {"reflexive filter invariants", filter_invariants},
      {"published improvement percentages", published_tables},
      {"enhanced beats original under delay", desk_comparison},
      {"original degrades more with delay", delay_degradation},
      {"CLI runs are reproducible", cli_reproducibility},
  };
  std::set<std::size_t> only;
  for (int i = 1; i < argc; ++i) only.insert(std::strtoul(argv[i], nullptr, 10));
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.count(i + 1)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return all ? 0 : 1;
}
