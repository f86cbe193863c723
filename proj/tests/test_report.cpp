#include <doctest.h>

#include <json.hpp>

#include "reflexq/errors.hpp"
#include "reflexq/report.hpp"
#include "reflexq/text_io.hpp"
#include "temp_dir.hpp"

using namespace reflexq;

namespace {

ExperimentConfig tiny(ConfigMap& m, const std::string& extra) {
  m.load_text(
      "record.synthetic.duration = 1\n"
      "train.steps_per_episode = 0\n"
      "train.episodes = 2\n"
      "train.batch_size = 5\n"
      "train.eval_every = 1\n"
      "net.hidden = 4,4\n" +
          extra,
      "test");
  return resolve(m);
}

std::filesystem::path make_run(const TempDir& dir, const std::string& name, const std::string& extra) {
  ConfigMap m;
  const ExperimentConfig c = tiny(m, extra);
  TrainingLog log;
  const RunResult r = run(c, log);
  const auto out = dir / name;
  report::write_run_artifacts(out, c, log, r, {"test", &m, &r.env, r.notes, 0.0});
  return out;
}

}  // namespace

TEST_CASE("summary rows and csv round trip") {
  const auto rows = report::summary_rows("enhanced", 10.0, {0.0439, 0.91, 22.93}, {0.0315, 0.66, 17.65});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].metric == "peak_displacement_m");
  CHECK(std::abs(rows[0].improvement_pct - 28.2) <= 0.3);
  const std::string csv = report::summary_csv(rows);
  CHECK(csv.rfind(std::string(report::kSummaryHeader) + "\n", 0) == 0);
  const auto back = report::parse_summary_csv(csv);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].uncontrolled == rows[i].uncontrolled);
    CHECK(back[i].controlled == rows[i].controlled);
    CHECK(back[i].improvement_pct == rows[i].improvement_pct);
  }
  const std::string table = report::summary_table(rows);
  CHECK(table.find("Dis. (cm)") != std::string::npos);
  CHECK(table.find("4.39") != std::string::npos);
}

TEST_CASE("summary parser rechecks the improvement column") {
  std::string csv = std::string(report::kSummaryHeader) + "\noriginal,0,peak_velocity_m_s,0.91,0.83,9.5\n";
  CHECK_THROWS_AS(report::parse_summary_csv(csv), InputError);
  CHECK_THROWS_AS(report::parse_summary_csv("method,delay\n"), InputError);
}

TEST_CASE("trace csv round trip") {
  std::vector<ResponseSample> trace(3);
  for (int i = 0; i < 3; ++i) trace[i] = {0.01 * (i + 1), 1e-4 * i, -0.3 * i, 2.5 / (i + 1), 1000.0 * i, 0.1 / 3.0};
  const auto back = report::parse_trace_csv(report::trace_csv(trace));
  REQUIRE(back.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(back[i].time == trace[i].time);
    CHECK(back[i].displacement == trace[i].displacement);
    CHECK(back[i].ground_accel == trace[i].ground_accel);
  }
}

TEST_CASE("run artifacts") {
  TempDir dir;
  const auto out = make_run(dir, "run", "method = enhanced\ndelay.seconds = 0.1\n");
  for (const char* f : {"manifest.json", "training_log.csv", "uncontrolled_trace.csv", "model.txt", "model_best.txt",
                        "eval_trace.csv", "summary.csv", "summary.txt", "filter.csv", "probe.csv"}) {
    CHECK_MESSAGE(std::filesystem::exists(out / f), f);
  }
  const auto manifest = nlohmann::json::parse(text::read_file(out / "manifest.json"));
  CHECK(manifest["config"]["train.episodes"]["value"] == "2");
  CHECK(manifest["config"]["train.episodes"]["origin"] == "file");
  CHECK(manifest["config"]["train.buffer_capacity"]["basis"] == "paper");
  CHECK(manifest["environment"]["delay_steps"] == 10);
  CHECK(manifest.contains("created_utc"));

  const auto log = text::read_file(out / "training_log.csv");
  CHECK(report::parse_mean_rewards(log).size() == 2);
  const auto trace = report::parse_trace_csv(text::read_file(out / "uncontrolled_trace.csv"));
  CHECK(trace.size() == 100);
  CHECK(report::parse_summary_csv(text::read_file(out / "summary.csv")).size() == 3);
  const ModelCheckpoint best = load_model(out / "model_best.txt");
  CHECK(best.action_forces.size() == 11);
  const auto filter = gamma_filter::load_csv(out / "filter.csv");
  CHECK(filter.gammas[9] == 0.0);
}

TEST_CASE("report merges compatible runs") {
  TempDir dir;
  const auto a = make_run(dir, "a", "method = original\ntrain.seed = 4\n");
  const auto b = make_run(dir, "b", "method = enhanced\ntrain.seed = 4\n");
  const auto agg = report::aggregate({a, b});
  CHECK(agg.rows.size() == 6);
  CHECK(agg.labels == std::vector<std::string>{"original_d0_s4", "enhanced_d0_s4"});
  report::write_report(agg, dir / "table.csv");
  CHECK(report::parse_summary_csv(text::read_file(dir / "table.csv")).size() == 6);
  CHECK(std::filesystem::exists(dir / "table.csv.txt"));
  const auto rewards = text::read_file(dir / "table_rewards.csv");
  CHECK(rewards.rfind("episode,original_d0_s4,enhanced_d0_s4\n", 0) == 0);

  CHECK(report::aggregate({a}).rows.size() == 3);

  const auto other = make_run(dir, "c", "structure.mass = 3000\n");
  CHECK_THROWS_AS(report::aggregate({a, other}), InputError);
  const auto other_record = make_run(dir, "d", "record.synthetic.seed = 9\n");
  CHECK_THROWS_AS(report::aggregate({a, other_record}), InputError);
  CHECK_THROWS_AS(report::aggregate({dir / "missing"}), InputError);
}
