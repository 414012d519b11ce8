#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "wavesense/types.hpp"

namespace wavesense {

inline constexpr double kSpeedOfLightMps = 299792458.0;

/// Reference power for RSSI quantization (0 dBm).
inline constexpr double kReferencePowerMw = 1.0;

/// Transmit power assumed when deriving RSSI from synthesized gains.
inline constexpr double kDefaultTxPowerMw = 1.0;

struct Vec2 {
  double x{0.0};
  double y{0.0};
};

double distance(const Vec2& a, const Vec2& b);

/// Two-path propagation model: a fixed line-of-sight gain plus one
/// weaker reflection whose path length the scenarios modulate. The
/// per-subcarrier gain at excess-path delay tau is
///
///   g_k = los_gain + reflected_gain_magnitude * exp(-j 2 pi f_k tau)
///
/// with optional i.i.d. circularly symmetric complex Gaussian noise at
/// noise_snr_db relative to |los_gain|^2 (absent = noiseless). Noise is
/// fully determined by rng_seed.
struct ChannelModel {
  std::complex<double> los_gain{1.0, 0.0};
  double reflected_gain_magnitude{0.3};
  double static_path_length_m{2.2};
  std::optional<double> noise_snr_db{};
  std::uint64_t rng_seed{0};

  void validate() const;
};

struct HoldInterval {
  double start_s{0.0};
  double end_s{0.0};
};

/// Sinusoidal chest displacement at breath_rate_hz with optional
/// breath-hold windows. During a hold the displacement freezes at the
/// value it had when the hold began, and the breathing phase stops
/// advancing, so both hold entry and resumption are step-free.
struct RespirationScenario {
  double breath_rate_hz{0.25};
  double chest_amplitude_m{0.005};
  std::vector<HoldInterval> hold_intervals{};
  double duration_s{60.0};

  void validate() const;
};

/// A person walking a waypoint path between a fixed Tx and Rx, pausing
/// dwell_s at every waypoint (including the first) and staying at the
/// last waypoint once the path is exhausted.
struct MotionScenario {
  std::vector<Vec2> waypoints{};
  double speed_mps{1.0};
  Vec2 tx_position{0.0, 0.0};
  Vec2 rx_position{3.0, 0.0};
  double dwell_s{0.0};
  double duration_s{30.0};

  void validate() const;
};

/// Synthesizes round(duration_s * sample_rate_hz) CFR frames plus the
/// paired RSSI stream. The reflected path length is
/// static_path_length_m + 2 * displacement(t). Requires
/// sample_rate_hz >= 4 * breath_rate_hz (config_error otherwise).
Trace synthesize_respiration(const RespirationScenario& scenario, const ChannelModel& channel,
                             const SubcarrierGrid& grid, double sample_rate_hz);

/// Same sampling scheme with the reflected path following the walker:
/// path(t) = |tx - p(t)| + |p(t) - rx|.
Trace synthesize_motion(const MotionScenario& scenario, const ChannelModel& channel,
                        const SubcarrierGrid& grid, double sample_rate_hz);

/// Mean received power of one frame in milliwatts:
/// tx_power_mw * mean_k |g_k|^2.
double received_power(const CfrFrame& frame, double tx_power_mw = kDefaultTxPowerMw);

/// Whole-dB RSSI: round-half-to-even of 10*log10(power_mw / 1 mW).
/// Throws std::domain_error for power_mw <= 0 or non-finite.
int quantize_rssi(double power_mw);

/// Closed-form peak-to-peak phase excursion (radians) of the reflected
/// path under sinusoidal chest motion: 2 pi f * (4 * amplitude) / c.
/// The chest sweeps 2*amplitude, and the reflection travels the extra
/// distance twice.
double respiration_phase_excursion(double carrier_frequency_hz, double chest_amplitude_m);

}  // namespace wavesense
