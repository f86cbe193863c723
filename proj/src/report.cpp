#include "reflexq/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <json.hpp>
#include <sstream>

#include "reflexq/errors.hpp"
#include "reflexq/text_io.hpp"

namespace reflexq::report {

using text::format_double;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kMetrics[] = {"peak_displacement_m", "peak_velocity_m_s", "peak_acceleration_m_s2"};

std::vector<std::vector<std::string>> data_rows(const std::string& contents) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(contents);
  std::string line;
  while (std::getline(in, line)) {
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    rows.push_back(text::split(body, ','));
  }
  return rows;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string optional_number(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

std::vector<SummaryRow> summary_rows(const std::string& method, double delay_s, const ResponsePeaks& u,
                                     const ResponsePeaks& c) {
  const double unc[] = {u.displacement, u.velocity, u.acceleration};
  const double con[] = {c.displacement, c.velocity, c.acceleration};
  std::vector<SummaryRow> rows;
  for (int i = 0; i < 3; ++i) {
    rows.push_back({method, delay_s, kMetrics[i], unc[i], con[i], improvement_pct(unc[i], con[i])});
  }
  return rows;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = std::string(kSummaryHeader) + "\n";
  for (const auto& r : rows) {
    out += r.method + "," + format_double(r.delay_s) + "," + r.metric + "," + format_double(r.uncontrolled) + "," +
           format_double(r.controlled) + "," + format_double(r.improvement_pct) + "\n";
  }
  return out;
}

std::vector<SummaryRow> parse_summary_csv(const std::string& contents) {
  std::vector<SummaryRow> rows;
  for (const auto& cols : data_rows(contents)) {
    if (cols.size() != 6) throw InputError("summary csv: expected 6 columns");
    if (cols[0] == "method") continue;
    SummaryRow r;
    r.method = cols[0];
    r.delay_s = text::parse_double(cols[1], "delay_s");
    r.metric = cols[2];
    r.uncontrolled = text::parse_double(cols[3], "uncontrolled");
    r.controlled = text::parse_double(cols[4], "controlled");
    r.improvement_pct = text::parse_double(cols[5], "improvement_pct");
    if (improvement_pct(r.uncontrolled, r.controlled) != r.improvement_pct) {
      throw InputError("summary csv: improvement column for " + r.method + "/" + r.metric +
                       " does not match its peak columns");
    }
    rows.push_back(r);
  }
  return rows;
}

std::string summary_table(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %8s  %-10s %12s %12s %12s\n", "method", "delay_s", "response", "Uncontrol.",
                "Controlled", "Improvement");
  out << line;
  std::string last_group;
  for (const auto& r : rows) {
    const std::string group = r.method + "@" + format_double(r.delay_s);
    if (group != last_group && !last_group.empty()) out << '\n';
    last_group = group;
    std::string label = r.metric;
    double scale = 1.0;
    if (r.metric == kMetrics[0]) label = "Dis. (cm)", scale = 100.0;
    else if (r.metric == kMetrics[1]) label = "Vel. (m/s)";
    else if (r.metric == kMetrics[2]) label = "Acc. (m/s2)";
    std::snprintf(line, sizeof line, "%-10s %8.2f  %-10s %12.4g %12.4g %11.2f%%\n", r.method.c_str(), r.delay_s,
                  label.c_str(), r.uncontrolled * scale, r.controlled * scale, r.improvement_pct);
    out << line;
  }
  return out.str();
}

std::string training_log_csv(const TrainingLog& log) {
  std::string out = "# uncontrolled peaks: displacement_m=" + format_double(log.uncontrolled.displacement) +
                    " velocity_m_s=" + format_double(log.uncontrolled.velocity) +
                    " acceleration_m_s2=" + format_double(log.uncontrolled.acceleration) + "\n";
  out +=
      "episode,epsilon,mean_reward,mean_squared_td,updates,eval_peak_u,eval_peak_v,eval_peak_a,"
      "improvement_u_pct,improvement_v_pct,improvement_a_pct\n";
  for (const auto& r : log.episodes) {
    out += std::to_string(r.episode) + "," + format_double(r.epsilon) + "," + format_double(r.mean_reward) + "," +
           format_double(r.mean_squared_td) + "," + std::to_string(r.updates);
    const auto& p = r.eval_peaks;
    const auto& i = r.eval_improvement;
    out += "," + optional_number(p ? std::optional(p->displacement) : std::nullopt);
    out += "," + optional_number(p ? std::optional(p->velocity) : std::nullopt);
    out += "," + optional_number(p ? std::optional(p->acceleration) : std::nullopt);
    out += "," + optional_number(i ? std::optional(i->displacement) : std::nullopt);
    out += "," + optional_number(i ? std::optional(i->velocity) : std::nullopt);
    out += "," + optional_number(i ? std::optional(i->acceleration) : std::nullopt);
    out += "\n";
  }
  return out;
}

std::vector<double> parse_mean_rewards(const std::string& contents) {
  std::vector<double> rewards;
  for (const auto& cols : data_rows(contents)) {
    if (cols.size() < 3) throw InputError("training log: expected at least 3 columns");
    if (cols[0] == "episode") continue;
    rewards.push_back(text::parse_double(cols[2], "mean_reward"));
  }
  return rewards;
}

std::string trace_csv(const std::vector<ResponseSample>& trace) {
  std::string out = "# time,u,v,a,force,ground_accel\n";
  for (const auto& s : trace) {
    out += format_double(s.time) + "," + format_double(s.displacement) + "," + format_double(s.velocity) + "," +
           format_double(s.acceleration) + "," + format_double(s.applied_force) + "," +
           format_double(s.ground_accel) + "\n";
  }
  return out;
}

std::vector<ResponseSample> parse_trace_csv(const std::string& contents) {
  std::vector<ResponseSample> trace;
  for (const auto& cols : data_rows(contents)) {
    if (cols.size() != 6) throw InputError("trace csv: expected 6 columns");
    ResponseSample s;
    s.time = text::parse_double(cols[0], "time");
    s.displacement = text::parse_double(cols[1], "u");
    s.velocity = text::parse_double(cols[2], "v");
    s.acceleration = text::parse_double(cols[3], "a");
    s.applied_force = text::parse_double(cols[4], "force");
    s.ground_accel = text::parse_double(cols[5], "ground_accel");
    trace.push_back(s);
  }
  return trace;
}

std::string probe_csv(const std::vector<double>& response, double dt) {
  std::string out = "# step_index,time,abs_displacement,envelope\n";
  std::vector<double> env;
  try {
    env = gamma_filter::envelope(response);
  } catch (const InputError&) {
    env.assign(response.size(), 0.0);
  }
  for (std::size_t k = 0; k < response.size(); ++k) {
    out += std::to_string(k) + "," + format_double(static_cast<double>(k + 1) * dt) + "," +
           format_double(response[k]) + "," + format_double(env[k]) + "\n";
  }
  return out;
}

std::string manifest_json(const ManifestInputs& in) {
  json j;
  j["tool"] = "reflexq";
  j["version"] = REFLEXQ_VERSION;
  j["created_utc"] = utc_now();
  j["command"] = in.command;
  if (in.config) {
    json cfg = json::object();
    json assumptions = json::array();
    for (const auto& [key, e] : in.config->entries()) {
      cfg[key] = {{"value", e.value}, {"origin", to_string(e.origin)}, {"basis", to_string(e.basis)}};
      if (e.basis == ValueBasis::Assumed) assumptions.push_back(key + " = " + e.value + " (" + e.help + ")");
    }
    j["config"] = cfg;
    j["assumptions"] = assumptions;
    const auto& path = in.config->get("record.path");
    json inputs = json::object();
    if (!path.empty() && std::filesystem::exists(path)) inputs["record_file_sha256"] = text::sha256_file(path);
    j["inputs"] = inputs;
  }
  if (in.env) {
    const Environment& env = *in.env;
    const auto& p = env.model.params;
    j["environment"] = {
        {"structure", {{"mass", p.mass}, {"stiffness", p.stiffness}, {"damping", p.damping}}},
        {"natural_frequency_rad_s", p.natural_frequency()},
        {"period_s", p.period()},
        {"damping_ratio", p.damping_ratio()},
        {"dt", env.model.dt},
        {"record_name", env.motion.name},
        {"record_samples", env.motion.samples.size()},
        {"record_digest", text::sha256_hex(excitation::to_csv(env.motion))},
        {"delay_steps", env.delay.steps},
        {"delay_rounding_error_s", env.delay.rounding_error},
        {"uncontrolled_peaks",
         {{"displacement_m", env.uncontrolled.displacement},
          {"velocity_m_s", env.uncontrolled.velocity},
          {"acceleration_m_s2", env.uncontrolled.acceleration}}},
    };
  }
  j["notes"] = in.notes;
  j["wall_clock_seconds"] = in.wall_clock_seconds;
  return j.dump(2) + "\n";
}

void write_run_artifacts(const std::filesystem::path& dir, const ExperimentConfig& config, const TrainingLog& log,
                         const RunResult& result, const ManifestInputs& manifest) {
  std::filesystem::create_directories(dir);
  text::write_file(dir / "manifest.json", manifest_json(manifest));
  text::write_file(dir / "training_log.csv", training_log_csv(log));
  text::write_file(dir / "uncontrolled_trace.csv",
                   trace_csv(simulate(result.env.model, result.env.motion, null_controller, result.env.delay.steps,
                                      result.env.delay_mode)));
  save_model(result.final_model, dir / "model.txt");
  const ModelCheckpoint& chosen = result.best_model ? *result.best_model : result.final_model;
  if (result.best_model) save_model(*result.best_model, dir / "model_best.txt");
  const Evaluation e = evaluate(chosen, result.env);
  text::write_file(dir / "eval_trace.csv", trace_csv(e.trace));
  const auto rows = summary_rows(to_string(config.method), config.delay_seconds, result.env.uncontrolled, e.peaks);
  text::write_file(dir / "summary.csv", summary_csv(rows));
  text::write_file(dir / "summary.txt", summary_table(rows));
  if (result.filter) gamma_filter::write_csv(*result.filter, dir / "filter.csv");
  if (!result.probe_response.empty()) {
    text::write_file(dir / "probe.csv", probe_csv(result.probe_response, result.env.model.dt));
  }
}

AggregateOutput aggregate(const std::vector<std::filesystem::path>& runs) {
  if (runs.empty()) throw InputError("report: no run directories given");
  AggregateOutput out;
  json reference;
  std::filesystem::path reference_dir;
  for (const auto& dir : runs) {
    for (const char* name : {"manifest.json", "summary.csv", "training_log.csv"}) {
      if (!std::filesystem::exists(dir / name)) throw InputError("report: " + (dir / name).string() + " not found");
    }
    json manifest;
    try {
      manifest = json::parse(text::read_file(dir / "manifest.json"));
    } catch (const json::exception& e) {
      throw InputError("report: unreadable manifest in " + dir.string() + ": " + e.what());
    }
    const json env = manifest.value("environment", json::object());
    const json key = {{"structure", env.value("structure", json())}, {"record", env.value("record_digest", json())}};
    if (reference.is_null()) {
      reference = key;
      reference_dir = dir;
    } else if (key != reference) {
      throw InputError("report: run " + dir.string() + " uses a different structure or record than " +
                       reference_dir.string());
    }
    const auto rows = parse_summary_csv(text::read_file(dir / "summary.csv"));
    out.rows.insert(out.rows.end(), rows.begin(), rows.end());
    const auto cfg = manifest.value("config", json::object());
    std::string seed = cfg.contains("train.seed") ? cfg["train.seed"].value("value", "?") : "?";
    const std::string label = (rows.empty() ? std::string("run") : rows.front().method) + "_d" +
                              (rows.empty() ? std::string("?") : format_double(rows.front().delay_s)) + "_s" + seed;
    out.labels.push_back(label);
    out.rewards.push_back(parse_mean_rewards(text::read_file(dir / "training_log.csv")));
  }
  return out;
}

void write_report(const AggregateOutput& agg, const std::filesystem::path& out) {
  text::write_file(out, summary_csv(agg.rows));
  text::write_file(out.string() + ".txt", summary_table(agg.rows));
  std::size_t episodes = 0;
  for (const auto& r : agg.rewards) episodes = std::max(episodes, r.size());
  std::string csv = "episode";
  for (const auto& l : agg.labels) csv += "," + l;
  csv += "\n";
  for (std::size_t e = 0; e < episodes; ++e) {
    csv += std::to_string(e);
    for (const auto& r : agg.rewards) csv += "," + (e < r.size() ? format_double(r[e]) : std::string());
    csv += "\n";
  }
  auto rewards_path = out;
  rewards_path.replace_filename(out.stem().string() + "_rewards.csv");
  text::write_file(rewards_path, csv);
}

}  // namespace reflexq::report
