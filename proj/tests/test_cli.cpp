#include <doctest.h>

#include <cstdlib>
#include <string>
#include <sys/wait.h>

#include "reflexq/gamma_filter.hpp"
#include "reflexq/report.hpp"
#include "reflexq/text_io.hpp"
#include "temp_dir.hpp"

using namespace reflexq;
namespace fs = std::filesystem;

namespace {

int cli(const std::string& args, const TempDir& dir) {
  const std::string cmd = std::string(REFLEXQ_CLI) + " " + args + " >" + (dir / "stdout.txt").string() + " 2>" +
                          (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string stderr_of(const TempDir& dir) { return text::read_file(dir / "stderr.txt"); }

const std::string kSmall =
    "--set record.synthetic.duration=2 --set train.steps_per_episode=0 --set train.batch_size=10 "
    "--set net.hidden=8,8 --set train.eval_every=1";

}  // namespace

TEST_CASE("simulate-uncontrolled") {
  TempDir dir;
  text::write_file(dir / "quiet.csv", "0,0\n0.01,0\n0.02,0\n");
  CHECK(cli("simulate-uncontrolled --record " + (dir / "quiet.csv").string() + " --out " + (dir / "q").string(), dir) == 2);
  CHECK(stderr_of(dir).find("error") != std::string::npos);

  std::string rows = "# time,accel\n";
  for (int i = 0; i < 250; ++i) rows += text::format_double(0.01 * i) + "," + (i % 17 == 3 ? "1.5" : "0.1") + "\n";
  text::write_file(dir / "rec.csv", rows);
  const std::string args = "simulate-uncontrolled --record " + (dir / "rec.csv").string() + " --out ";
  REQUIRE(cli(args + (dir / "u1").string(), dir) == 0);
  const auto trace = report::parse_trace_csv(text::read_file(dir / "u1" / "uncontrolled_trace.csv"));
  CHECK(trace.size() == 250);
  REQUIRE(cli(args + (dir / "u2").string(), dir) == 0);
  CHECK(text::read_file(dir / "u1" / "uncontrolled_trace.csv") == text::read_file(dir / "u2" / "uncontrolled_trace.csv"));
  CHECK(text::read_file(dir / "u1" / "peaks.json") == text::read_file(dir / "u2" / "peaks.json"));
}

TEST_CASE("build-filter") {
  TempDir dir;
  REQUIRE(cli("build-filter --delay 0 --out " + (dir / "f0").string(), dir) == 0);
  REQUIRE(cli("build-filter --delay 5 --out " + (dir / "f5").string(), dir) == 0);
  const auto f0 = gamma_filter::load_csv(dir / "f0" / "filter.csv");
  const auto f5 = gamma_filter::load_csv(dir / "f5" / "filter.csv");
  CHECK(f5.peak_index == f0.peak_index + 500);
  REQUIRE(f5.window() == f0.window() + 500);
  for (std::size_t j = 0; j < 500; ++j) CHECK(f5.gammas[j] == 0.0);
  CHECK(*std::max_element(f5.gammas.begin(), f5.gammas.end()) == 1.0);
  CHECK(gamma_filter::to_csv(f5) == text::read_file(dir / "f5" / "filter.csv"));
  CHECK(fs::exists(dir / "f5" / "probe.csv"));
  CHECK(cli("build-filter --delay 0 --set filter.cap_periods=1 --set filter.horizon_periods=0.5 "
            "--set filter.cutoff_rule=to --set filter.cutoff_percent=1e-300 --out " + (dir / "bad").string(), dir) == 1);
  CHECK(stderr_of(dir).find("probe failed") != std::string::npos);
}

TEST_CASE("train smoke run, determinism and errors") {
  TempDir dir;
  const std::string base = "train " + kSmall + " --method enhanced --delay 0.1 --seed 3 --episodes 1 --out ";
  REQUIRE(cli(base + (dir / "r1").string(), dir) == 0);
  for (const char* f : {"manifest.json", "training_log.csv", "uncontrolled_trace.csv", "model.txt", "model_best.txt",
                        "eval_trace.csv", "summary.csv", "summary.txt", "filter.csv", "probe.csv"}) {
    CHECK_MESSAGE(fs::exists(dir / "r1" / f), f);
  }
  REQUIRE(cli(base + (dir / "r2").string(), dir) == 0);
  for (const char* f : {"training_log.csv", "model.txt", "model_best.txt", "summary.csv", "eval_trace.csv", "filter.csv"}) {
    CHECK_MESSAGE(text::read_file(dir / "r1" / f) == text::read_file(dir / "r2" / f), f);
  }

  CHECK(cli("train --record /no/such/record.csv --out " + (dir / "x").string(), dir) == 2);
  CHECK(stderr_of(dir).find("/no/such/record.csv") != std::string::npos);
  CHECK(cli("train --method sarsa --out " + (dir / "x").string(), dir) == 2);
  CHECK(cli("train --set no.such=1 --out " + (dir / "x").string(), dir) == 2);
  CHECK(cli("frobnicate", dir) == 2);
  CHECK(cli("train --config " + (dir / "missing.cfg").string() + " --out " + (dir / "x").string(), dir) == 2);
}

TEST_CASE("config file with flag precedence") {
  TempDir dir;
  text::write_file(dir / "run.cfg", "train.episodes = 3\ntrain.seed = 5\nmethod = original\n");
  REQUIRE(cli("train " + kSmall + " --config " + (dir / "run.cfg").string() + " --episodes 2 --out " +
                  (dir / "r").string(), dir) == 0);
  CHECK(report::parse_mean_rewards(text::read_file(dir / "r" / "training_log.csv")).size() == 2);
  const std::string manifest = text::read_file(dir / "r" / "manifest.json");
  CHECK(manifest.find("\"origin\": \"flag\"") != std::string::npos);
  CHECK(manifest.find("\"origin\": \"file\"") != std::string::npos);
}

TEST_CASE("multi-seed fan-out and report") {
  TempDir dir;
  REQUIRE(cli("train " + kSmall + " --method original --seed 1,2 --jobs 2 --episodes 1 --out " + (dir / "o").string(), dir) == 0);
  REQUIRE(cli("train " + kSmall + " --method enhanced --seed 1 --episodes 1 --out " + (dir / "e").string(), dir) == 0);
  CHECK(fs::exists(dir / "o" / "seed_1" / "summary.csv"));
  CHECK(fs::exists(dir / "o" / "seed_2" / "summary.csv"));
  REQUIRE(cli("report --runs " + (dir / "o" / "seed_1").string() + " " + (dir / "e").string() + " --out " +
                  (dir / "table.csv").string(), dir) == 0);
  const auto rows = report::parse_summary_csv(text::read_file(dir / "table.csv"));
  CHECK(rows.size() == 6);
  CHECK(fs::exists(dir / "table_rewards.csv"));

  REQUIRE(cli("evaluate " + kSmall + " --model " + (dir / "e" / "model.txt").string() + " --out " +
                  (dir / "ev").string(), dir) == 0);
  CHECK(fs::exists(dir / "ev" / "eval_trace.csv"));
}
