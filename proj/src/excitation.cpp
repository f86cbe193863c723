#include "reflexq/excitation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <regex>
#include <sstream>

#include "reflexq/errors.hpp"
#include "reflexq/random.hpp"
#include "reflexq/text_io.hpp"

namespace reflexq {

double GroundMotion::peak_abs() const {
  double peak = 0.0;
  for (double v : samples) peak = std::max(peak, std::abs(v));
  return peak;
}

void GroundMotion::validate() const {
  if (!(std::isfinite(dt) && dt > 0.0)) throw InputError("ground motion '" + name + "': invalid interval, dt must be > 0");
  if (samples.empty()) throw InputError("ground motion '" + name + "' is empty");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      throw InputError("ground motion '" + name + "': non-finite sample at index " + std::to_string(i));
    }
  }
}

namespace excitation {

GroundMotion load_csv(const std::filesystem::path& path) {
  const std::string contents = text::read_file(path);
  std::istringstream in(contents);
  std::string line;
  std::vector<double> times;
  GroundMotion motion;
  motion.name = path.filename().string();
  motion.source = MotionSource::Csv;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto cols = text::split(body, ',');
    if (cols.size() != 2) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": malformed row, expected 'time,accel'");
    }
    const std::string where = path.string() + ":" + std::to_string(line_no);
    times.push_back(text::parse_double(cols[0], where + " time"));
    motion.samples.push_back(text::parse_double(cols[1], where + " acceleration"));
  }
  if (motion.samples.empty()) throw InputError(path.string() + ": empty record");
  if (motion.samples.size() < 2) throw InputError(path.string() + ": need at least two rows to infer dt");
  motion.dt = times[1] - times[0];
  if (!(motion.dt > 0.0)) throw InputError(path.string() + ": invalid interval, time must increase");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs((times[i] - times[i - 1]) - motion.dt) > kSpacingTolerance) {
      throw InputError(path.string() + ": non-uniform spacing at data row " + std::to_string(i + 1));
    }
  }
  motion.validate();
  return motion;
}

GroundMotion load_at2(const std::filesystem::path& path) {
  const std::string contents = text::read_file(path);
  std::istringstream in(contents);
  std::string line;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(in, line)) throw InputError(path.string() + ": truncated AT2 header");
  }
  if (!std::getline(in, line)) throw InputError(path.string() + ": missing NPTS/DT line");

  static const std::regex npts_re(R"(NPTS\s*=\s*([0-9]+))", std::regex::icase);
  static const std::regex dt_re(R"(DT\s*=\s*([-+0-9.eE]+))", std::regex::icase);
  std::smatch m;
  long long npts = -1;
  double dt = 0.0;
  if (std::regex_search(line, m, npts_re)) {
    npts = text::parse_int(m[1].str(), "NPTS");
    if (!std::regex_search(line, m, dt_re)) throw InputError(path.string() + ": DT not parseable");
    dt = text::parse_double(m[1].str(), "DT");
  } else {
    // Older layout: "<npts> <dt> NPTS, DT".
    std::istringstream fields(line);
    std::string a, b;
    if (!(fields >> a >> b)) throw InputError(path.string() + ": NPTS/DT not parseable");
    npts = text::parse_int(a, "NPTS");
    dt = text::parse_double(b, "DT");
  }
  if (npts < 1) throw InputError(path.string() + ": NPTS must be positive");
  if (!(std::isfinite(dt) && dt > 0.0)) throw InputError(path.string() + ": invalid interval DT");

  GroundMotion motion;
  motion.dt = dt;
  motion.name = path.filename().string();
  motion.source = MotionSource::At2;
  std::string token;
  while (in >> token) motion.samples.push_back(text::parse_double(token, "AT2 value") * kStandardGravity);
  if (motion.samples.size() != static_cast<std::size_t>(npts)) {
    throw InputError(path.string() + ": count mismatch, NPTS=" + std::to_string(npts) + " but " +
                     std::to_string(motion.samples.size()) + " values present");
  }
  motion.validate();
  return motion;
}

GroundMotion load_record(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InputError("record file not found: " + path.string());
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".at2" ? load_at2(path) : load_csv(path);
}

std::string to_csv(const GroundMotion& motion) {
  std::string out = "# ground motion: " + motion.name + " (" + to_string(motion.source) + ")\n";
  out += "# time_s,accel_m_s2\n";
  for (std::size_t i = 0; i < motion.samples.size(); ++i) {
    out += text::format_double(static_cast<double>(i) * motion.dt);
    out += ',';
    out += text::format_double(motion.samples[i]);
    out += '\n';
  }
  return out;
}

void write_csv(const GroundMotion& motion, const std::filesystem::path& path) {
  text::write_file(path, to_csv(motion));
}

GroundMotion resample(const GroundMotion& motion, double target_dt) {
  if (!(std::isfinite(target_dt) && target_dt > 0.0)) throw InputError("resample: target dt must be > 0");
  motion.validate();
  if (std::abs(target_dt - motion.dt) <= 1e-12 * motion.dt) return motion;

  const std::size_t n = motion.samples.size();
  const double span = static_cast<double>(n - 1) * motion.dt;
  const auto count = static_cast<std::size_t>(std::floor(span / target_dt + 1e-9)) + 1;
  GroundMotion out;
  out.dt = target_dt;
  out.name = motion.name;
  out.source = motion.source;
  out.samples.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double pos = static_cast<double>(k) * target_dt / motion.dt;
    auto i = static_cast<std::size_t>(std::floor(pos));
    if (i >= n - 1) {
      out.samples[k] = motion.samples[n - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(i);
    out.samples[k] = motion.samples[i] + frac * (motion.samples[i + 1] - motion.samples[i]);
  }
  return out;
}

GroundMotion synth(const SynthParams& p) {
  if (!(p.duration > 0.0) || !(p.dt > 0.0) || !(p.amplitude > 0.0)) {
    throw InputError("synth: duration, dt and amplitude must be > 0");
  }
  const auto n = static_cast<std::size_t>(std::llround(p.duration / p.dt));
  if (n == 0) throw InputError("synth: duration shorter than one sample");
  GroundMotion motion;
  motion.dt = p.dt;
  motion.source = MotionSource::Synthetic;
  motion.name = to_string(p.kind) + "-seed" + std::to_string(p.seed);
  motion.samples.resize(n);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  switch (p.kind) {
    case SynthKind::Sine:
      for (std::size_t i = 0; i < n; ++i) {
        motion.samples[i] = p.amplitude * std::sin(two_pi * p.frequency * static_cast<double>(i) * p.dt);
      }
      break;
    case SynthKind::Sweep: {
      const double rate = (p.frequency_end - p.frequency) / p.duration;
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * p.dt;
        motion.samples[i] = p.amplitude * std::sin(two_pi * (p.frequency * t + 0.5 * rate * t * t));
      }
      break;
    }
    case SynthKind::WhiteNoise: {
      // Uniform on [-sqrt(3) a, sqrt(3) a) has standard deviation a.
      Rng rng(p.seed);
      const double half_width = std::sqrt(3.0) * p.amplitude;
      for (double& v : motion.samples) v = uniform(rng, -half_width, half_width);
      break;
    }
  }
  return motion;
}

GroundMotion fit_length(const GroundMotion& motion, std::size_t samples) {
  GroundMotion out = motion;
  out.samples.resize(samples, 0.0);
  return out;
}

SynthKind parse_synth_kind(const std::string& name) {
  if (name == "sine") return SynthKind::Sine;
  if (name == "sweep") return SynthKind::Sweep;
  if (name == "white_noise") return SynthKind::WhiteNoise;
  throw InputError("unknown synthetic record kind '" + name + "' (sine|sweep|white_noise)");
}

std::string to_string(SynthKind kind) {
  switch (kind) {
    case SynthKind::Sine: return "sine";
    case SynthKind::Sweep: return "sweep";
    case SynthKind::WhiteNoise: return "white_noise";
  }
  return "unknown";
}

std::string to_string(MotionSource source) {
  switch (source) {
    case MotionSource::Csv: return "csv";
    case MotionSource::At2: return "at2";
    case MotionSource::Synthetic: return "synthetic";
  }
  return "unknown";
}

}  // namespace excitation
}  // namespace reflexq
