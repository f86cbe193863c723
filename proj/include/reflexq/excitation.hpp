#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace reflexq {

enum class MotionSource { Csv, At2, Synthetic };

/// Uniformly sampled ground-acceleration record in m/s^2.
struct GroundMotion {
  double dt = 0.0;
  std::vector<double> samples;
  std::string name;
  MotionSource source = MotionSource::Synthetic;

  double duration() const { return dt * static_cast<double>(samples.size()); }
  double peak_abs() const;
  /// Throws InputError unless dt > 0, non-empty, and every sample finite.
  void validate() const;
};

namespace excitation {

inline constexpr double kStandardGravity = 9.80665;
inline constexpr double kSpacingTolerance = 1e-6;

enum class SynthKind { Sine, Sweep, WhiteNoise };

struct SynthParams {
  SynthKind kind = SynthKind::WhiteNoise;
  double duration = 20.0;
  double dt = 0.01;
  /// Peak for sine/sweep, standard deviation for white noise.
  double amplitude = 1.0;
  std::uint64_t seed = 1;
  /// Sine frequency, or sweep start frequency (Hz).
  double frequency = 1.0;
  /// Sweep end frequency (Hz).
  double frequency_end = 20.0;
};

GroundMotion load_csv(const std::filesystem::path& path);
GroundMotion load_at2(const std::filesystem::path& path);
/// Dispatches on extension: ".at2" (any case) is AT2, anything else CSV.
GroundMotion load_record(const std::filesystem::path& path);

/// '#'-prefixed header, "time,accel" rows in shortest round-trip precision.
std::string to_csv(const GroundMotion& motion);
void write_csv(const GroundMotion& motion, const std::filesystem::path& path);

GroundMotion resample(const GroundMotion& motion, double target_dt);
GroundMotion synth(const SynthParams& params);

/// Trims or zero-pads to exactly `samples` entries.
GroundMotion fit_length(const GroundMotion& motion, std::size_t samples);

SynthKind parse_synth_kind(const std::string& name);
std::string to_string(SynthKind kind);
std::string to_string(MotionSource source);

}  // namespace excitation
}  // namespace reflexq
