// reflexq: structural-control Q-learning with a reflexive gamma filter.
//
//   reflexq simulate-uncontrolled --config F --record R --out DIR
//   reflexq build-filter --config F --delay D --out DIR
//   reflexq train --config F --method {original|enhanced} --delay D --seed S --out DIR
//   reflexq report --runs DIR... --out FILE
//   reflexq evaluate --model M --config F --out DIR

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "reflexq/config.hpp"
#include "reflexq/errors.hpp"
#include "reflexq/gamma_filter.hpp"
#include "reflexq/report.hpp"
#include "reflexq/text_io.hpp"
#include "reflexq/trainer.hpp"

namespace fs = std::filesystem;
using namespace reflexq;

namespace {

struct CommonOptions {
  std::string config;
  std::string record;
  std::vector<std::string> sets;
  std::optional<double> delay;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "config file with 'key = value' lines");
  cmd->add_option("--set", o.sets, "override a config key (key=value), repeatable");
}

ConfigMap build_config(const CommonOptions& o) {
  ConfigMap map;
  if (!o.config.empty()) map.load_file(o.config);
  for (const auto& s : o.sets) map.set_assignment(s, ValueOrigin::Flag);
  if (!o.record.empty()) map.set("record.path", o.record, ValueOrigin::Flag);
  if (o.delay) map.set("delay.seconds", text::format_double(*o.delay), ValueOrigin::Flag);
  return map;
}

void check_record(const ConfigMap& map) {
  const auto& path = map.get("record.path");
  if (!path.empty() && !fs::exists(path)) throw InputError("record file not found: " + path);
}

int simulate_uncontrolled(const CommonOptions& o, const fs::path& out, const std::string& command) {
  ConfigMap map = build_config(o);
  // The baseline trace covers the whole record unless an episode length was requested explicitly.
  if (map.entry("train.steps_per_episode").origin == ValueOrigin::Default) {
    map.set("train.steps_per_episode", "0", ValueOrigin::Default);
  }
  check_record(map);
  const ExperimentConfig cfg = resolve(map);
  const Environment env = prepare_environment(cfg);
  const auto trace = simulate(env.model, env.motion, null_controller, env.delay.steps, env.delay_mode);
  fs::create_directories(out);
  text::write_file(out / "uncontrolled_trace.csv", report::trace_csv(trace));
  nlohmann::ordered_json peaks = {{"displacement_m", env.uncontrolled.displacement},
                                  {"velocity_m_s", env.uncontrolled.velocity},
                                  {"acceleration_m_s2", env.uncontrolled.acceleration},
                                  {"samples", trace.size()},
                                  {"dt", env.model.dt}};
  text::write_file(out / "peaks.json", peaks.dump(2) + "\n");
  text::write_file(out / "manifest.json", report::manifest_json({command, &map, &env, {}, 0.0}));
  std::cout << "uncontrolled peaks: u=" << env.uncontrolled.displacement << " m, v=" << env.uncontrolled.velocity
            << " m/s, a=" << env.uncontrolled.acceleration << " m/s^2 (" << trace.size() << " samples)\n";
  return 0;
}

int build_filter(const CommonOptions& o, const fs::path& out, const std::string& command) {
  ConfigMap map = build_config(o);
  check_record(map);
  const ExperimentConfig cfg = resolve(map);
  const SdofParams& p = cfg.structure;
  const DiscreteModel model = discretize(p, cfg.dt());
  const DelayRounding delay = delay_steps_for(cfg.delay_seconds, cfg.dt());
  auto settings = cfg.probe;
  settings.probe_force = cfg.probe_force();
  const auto result = gamma_filter::probe_and_build(model, delay.steps, settings);
  fs::create_directories(out);
  gamma_filter::write_csv(result.filter, out / "filter.csv");
  text::write_file(out / "probe.csv", report::probe_csv(result.response, cfg.dt()));
  text::write_file(out / "manifest.json", report::manifest_json({command, &map, nullptr, {}, 0.0}));
  std::cout << "filter: " << result.filter.window() << " weights (peak at step " << result.filter.peak_index
            << "), bootstrap " << result.filter.bootstrap_gamma << ", delay " << delay.steps << " steps\n";
  return 0;
}

void train_one(ConfigMap map, const fs::path& out, const std::string& command) {
  const ExperimentConfig cfg = resolve(map);
  TrainingLog log;
  const auto start = std::chrono::steady_clock::now();
  try {
    const RunResult result = run(cfg, log);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report::write_run_artifacts(out, cfg, log, result, {command, &map, &result.env, result.notes, secs});
  } catch (...) {
    fs::create_directories(out);
    text::write_file(out / "training_log.partial.csv", report::training_log_csv(log));
    throw;
  }
}

int train(const CommonOptions& o, const std::string& method, const std::string& seeds, std::optional<long> episodes,
          unsigned jobs, const fs::path& out, const std::string& command) {
  ConfigMap base = build_config(o);
  if (!method.empty()) base.set("method", method, ValueOrigin::Flag);
  if (episodes) base.set("train.episodes", std::to_string(*episodes), ValueOrigin::Flag);
  check_record(base);
  resolve(base);  // fail fast on a bad config before spawning workers

  std::vector<std::string> seed_list = seeds.empty() ? std::vector<std::string>{} : text::split(seeds, ',');
  if (seed_list.size() <= 1) {
    if (!seed_list.empty()) base.set("train.seed", seed_list.front(), ValueOrigin::Flag);
    train_one(base, out, command);
    std::cout << "run written to " << out.string() << "\n";
    return 0;
  }

  // Independent seeds fan out over isolated workers; each owns its config, RNG, buffer and nets.
  std::vector<std::string> errors(seed_list.size());
  std::size_t next = 0;
  std::mutex mu;
  auto worker = [&] {
    while (true) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next >= seed_list.size()) return;
        i = next++;
      }
      try {
        ConfigMap map = base;
        map.set("train.seed", seed_list[i], ValueOrigin::Flag);
        train_one(map, out / ("seed_" + seed_list[i]), command);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned j = 0; j < std::max(1u, jobs); ++j) pool.emplace_back(worker);
  pool.clear();
  int status = 0;
  for (std::size_t i = 0; i < seed_list.size(); ++i) {
    if (!errors[i].empty()) {
      std::cerr << "seed " << seed_list[i] << ": " << errors[i] << "\n";
      status = 1;
    }
  }
  if (status == 0) std::cout << seed_list.size() << " runs written under " << out.string() << "\n";
  return status;
}

int evaluate_model(const CommonOptions& o, const std::string& model_path, const fs::path& out,
                   const std::string& command) {
  ConfigMap map = build_config(o);
  check_record(map);
  const ExperimentConfig cfg = resolve(map);
  const Environment env = prepare_environment(cfg);
  if (!fs::exists(model_path)) throw InputError("model file not found: " + model_path);
  const ModelCheckpoint model = load_model(model_path);
  const Evaluation e = evaluate(model, env);
  fs::create_directories(out);
  text::write_file(out / "eval_trace.csv", report::trace_csv(e.trace));
  const auto rows = report::summary_rows(to_string(cfg.method), cfg.delay_seconds, env.uncontrolled, e.peaks);
  text::write_file(out / "summary.csv", report::summary_csv(rows));
  text::write_file(out / "summary.txt", report::summary_table(rows));
  text::write_file(out / "manifest.json", report::manifest_json({command, &map, &env, {}, 0.0}));
  std::cout << report::summary_table(rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reflexq: Q-learning with a reflexive gamma filter for delayed structural control"};
  app.require_subcommand(1);
  std::string command;
  for (int i = 0; i < argc; ++i) command += (i ? " " : "") + std::string(argv[i]);

  CommonOptions sim_opts, filter_opts, train_opts, eval_opts;
  std::string out_dir, method, seeds, model_path, report_out;
  std::vector<std::string> runs;
  long episodes_flag = -1;
  unsigned jobs = 1;
  double filter_delay = 0.0, train_delay = 0.0, eval_delay = 0.0;

  auto* sim = app.add_subcommand("simulate-uncontrolled", "uncontrolled response trace and peaks");
  add_common(sim, sim_opts);
  sim->add_option("--record", sim_opts.record, "ground-motion record (.csv or .AT2)");
  sim->add_option("--out", out_dir, "output directory")->required();

  auto* filt = app.add_subcommand("build-filter", "probe the structure and build the reflexive gamma filter");
  add_common(filt, filter_opts);
  auto* filt_delay = filt->add_option("--delay", filter_delay, "action-effect delay (s)");
  filt->add_option("--out", out_dir, "output directory")->required();

  auto* tr = app.add_subcommand("train", "train a controller");
  add_common(tr, train_opts);
  tr->add_option("--record", train_opts.record, "ground-motion record (.csv or .AT2)");
  tr->add_option("--method", method, "original | enhanced")->check(CLI::IsMember({"original", "enhanced"}));
  auto* tr_delay = tr->add_option("--delay", train_delay, "action-effect delay (s)");
  tr->add_option("--seed", seeds, "seed, or comma-separated seeds run as isolated workers");
  tr->add_option("--episodes", episodes_flag, "override train.episodes");
  tr->add_option("--jobs", jobs, "parallel workers for multiple seeds");
  tr->add_option("--out", out_dir, "output directory")->required();

  auto* rep = app.add_subcommand("report", "merge run summaries into one comparison table");
  rep->add_option("--runs", runs, "run directories")->required()->expected(1, -1);
  rep->add_option("--out", report_out, "output table (CSV)")->required();

  auto* ev = app.add_subcommand("evaluate", "greedy rollout of a saved model");
  add_common(ev, eval_opts);
  ev->add_option("--record", eval_opts.record, "ground-motion record (.csv or .AT2)");
  ev->add_option("--model", model_path, "model checkpoint")->required();
  auto* ev_delay = ev->add_option("--delay", eval_delay, "action-effect delay (s)");
  ev->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*filt_delay) filter_opts.delay = filter_delay;
    if (*tr_delay) train_opts.delay = train_delay;
    if (*ev_delay) eval_opts.delay = eval_delay;
    if (sim->parsed()) return simulate_uncontrolled(sim_opts, out_dir, command);
    if (filt->parsed()) return build_filter(filter_opts, out_dir, command);
    if (tr->parsed()) {
      std::optional<long> episodes;
      if (episodes_flag >= 0) episodes = episodes_flag;
      return train(train_opts, method, seeds, episodes, jobs, out_dir, command);
    }
    if (rep->parsed()) {
      std::vector<fs::path> dirs(runs.begin(), runs.end());
      const auto agg = report::aggregate(dirs);
      report::write_report(agg, report_out);
      std::cout << report::summary_table(agg.rows);
      return 0;
    }
    if (ev->parsed()) return evaluate_model(eval_opts, model_path, out_dir, command);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
