#include "wavesense/sim.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include "wavesense/errors.hpp"

namespace wavesense {

double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

void ChannelModel::validate() const {
  if (!std::isfinite(los_gain.real()) || !std::isfinite(los_gain.imag()) ||
      !(std::abs(los_gain) > 0.0)) {
    throw config_error("channel: los_gain must be finite and non-zero");
  }
  if (!(reflected_gain_magnitude >= 0.0) || !std::isfinite(reflected_gain_magnitude)) {
    throw config_error("channel: reflected_gain_magnitude must be non-negative");
  }
  if (!(reflected_gain_magnitude < std::abs(los_gain))) {
    throw config_error("channel: reflected_gain_magnitude must stay below |los_gain|");
  }
  if (!(static_path_length_m > 0.0) || !std::isfinite(static_path_length_m)) {
    throw config_error("channel: static_path_length_m must be positive");
  }
  if (noise_snr_db && !std::isfinite(*noise_snr_db)) {
    throw config_error("channel: noise_snr_db must be finite");
  }
}

void RespirationScenario::validate() const {
  if (!(breath_rate_hz > 0.0) || !std::isfinite(breath_rate_hz)) {
    throw config_error("respiration: breath_rate_hz must be positive");
  }
  if (!(chest_amplitude_m >= 0.0) || !std::isfinite(chest_amplitude_m)) {
    throw config_error("respiration: chest_amplitude_m must be non-negative");
  }
  if (chest_amplitude_m > 0.05) {
    throw config_error("respiration: chest_amplitude_m above 0.05 m is not plausible");
  }
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) {
    throw config_error("respiration: duration_s must be positive");
  }
  double prev_end = 0.0;
  for (const auto& hold : hold_intervals) {
    if (!(hold.start_s >= 0.0) || !(hold.end_s > hold.start_s)) {
      throw config_error("respiration: hold interval must satisfy 0 <= start < end");
    }
    if (hold.start_s < prev_end) {
      throw config_error("respiration: hold intervals must be ordered and disjoint");
    }
    if (hold.end_s > duration_s) {
      throw config_error("respiration: hold interval extends past duration_s");
    }
    prev_end = hold.end_s;
  }
}

void MotionScenario::validate() const {
  if (waypoints.size() < 2) {
    throw config_error("motion: at least 2 waypoints required");
  }
  for (const auto& w : waypoints) {
    if (!std::isfinite(w.x) || !std::isfinite(w.y)) {
      throw config_error("motion: waypoint coordinates must be finite");
    }
  }
  if (!(speed_mps > 0.0) || !std::isfinite(speed_mps)) {
    throw config_error("motion: speed_mps must be positive");
  }
  if (!std::isfinite(tx_position.x) || !std::isfinite(tx_position.y) ||
      !std::isfinite(rx_position.x) || !std::isfinite(rx_position.y)) {
    throw config_error("motion: tx/rx positions must be finite");
  }
  if (!(dwell_s >= 0.0) || !std::isfinite(dwell_s)) {
    throw config_error("motion: dwell_s must be non-negative");
  }
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) {
    throw config_error("motion: duration_s must be positive");
  }
}

namespace {

// Core sampling loop shared by both scenario kinds: evaluates the
// reflected path length per slot, forms the two-path gains, adds
// seeded noise, and derives the paired RSSI stream from the same
// (noisy) frame.
Trace synthesize(const ChannelModel& channel, const SubcarrierGrid& grid,
                 double sample_rate_hz, double duration_s,
                 const std::function<double(double)>& reflected_path_length_m,
                 std::string label) {
  channel.validate();
  grid.validate();
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw config_error("sim: sample_rate_hz must be positive");
  }
  const auto slot_count = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
  if (slot_count == 0) {
    throw config_error("sim: duration_s too short to produce any samples");
  }

  const std::size_t num_subcarriers = grid.num_subcarriers;
  std::vector<double> tone_hz(num_subcarriers);
  for (std::size_t k = 0; k < num_subcarriers; ++k) {
    tone_hz[k] = subcarrier_frequency(grid, k);
  }

  std::mt19937_64 rng(channel.rng_seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  // Per-component standard deviation for the requested SNR relative to
  // the line-of-sight power.
  double noise_sigma = 0.0;
  if (channel.noise_snr_db) {
    const double noise_power =
        std::norm(channel.los_gain) * std::pow(10.0, -*channel.noise_snr_db / 10.0);
    noise_sigma = std::sqrt(noise_power / 2.0);
  }

  Trace trace;
  trace.grid = grid;
  trace.sample_rate_hz = sample_rate_hz;
  trace.label = std::move(label);
  trace.cfr_frames.reserve(slot_count);
  trace.rssi_samples.reserve(slot_count);

  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < slot_count; ++i) {
    const double t = static_cast<double>(i) / sample_rate_hz;
    const double tau = reflected_path_length_m(t) / kSpeedOfLightMps;
    CfrFrame frame;
    frame.timestamp_s = t;
    frame.gains.resize(num_subcarriers);
    for (std::size_t k = 0; k < num_subcarriers; ++k) {
      std::complex<double> g =
          channel.los_gain + std::polar(channel.reflected_gain_magnitude, -two_pi * tone_hz[k] * tau);
      if (noise_sigma > 0.0) {
        g += std::complex<double>(noise_sigma * unit_normal(rng), noise_sigma * unit_normal(rng));
      }
      frame.gains[k] = g;
    }
    trace.rssi_samples.push_back({t, quantize_rssi(received_power(frame))});
    trace.cfr_frames.push_back(std::move(frame));
  }
  return trace;
}

// Breathing-phase clock: advances with wall time outside holds and
// stands still inside them, which freezes the displacement at its
// hold-entry value and resumes it without a step.
double breathing_time(double t, const std::vector<HoldInterval>& holds) {
  double paused = 0.0;
  for (const auto& hold : holds) {
    if (t <= hold.start_s) {
      break;
    }
    paused += std::min(t, hold.end_s) - hold.start_s;
  }
  return t - paused;
}

}  // namespace

Trace synthesize_respiration(const RespirationScenario& scenario, const ChannelModel& channel,
                             const SubcarrierGrid& grid, double sample_rate_hz) {
  scenario.validate();
  if (sample_rate_hz < 4.0 * scenario.breath_rate_hz) {
    throw config_error(
        "sim: sample_rate_hz below 4x breath_rate_hz would alias the breathing motion");
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;
  auto path_length = [&](double t) {
    const double displacement =
        scenario.chest_amplitude_m *
        std::sin(two_pi * scenario.breath_rate_hz * breathing_time(t, scenario.hold_intervals));
    return channel.static_path_length_m + 2.0 * displacement;
  };
  return synthesize(channel, grid, sample_rate_hz, scenario.duration_s, path_length,
                    "respiration " + std::to_string(scenario.breath_rate_hz) + " Hz");
}

Trace synthesize_motion(const MotionScenario& scenario, const ChannelModel& channel,
                        const SubcarrierGrid& grid, double sample_rate_hz) {
  scenario.validate();

  // Flatten the waypoint plan into time-ordered segments; dwells are
  // zero-displacement segments and zero-length hops are skipped.
  struct Segment {
    double t0, t1;
    Vec2 a, b;
  };
  std::vector<Segment> segments;
  double cursor = 0.0;
  for (std::size_t i = 0; i < scenario.waypoints.size(); ++i) {
    if (scenario.dwell_s > 0.0) {
      segments.push_back({cursor, cursor + scenario.dwell_s, scenario.waypoints[i],
                          scenario.waypoints[i]});
      cursor += scenario.dwell_s;
    }
    if (i + 1 < scenario.waypoints.size()) {
      const double hop = distance(scenario.waypoints[i], scenario.waypoints[i + 1]);
      if (hop > 0.0) {
        const double walk_s = hop / scenario.speed_mps;
        segments.push_back({cursor, cursor + walk_s, scenario.waypoints[i],
                            scenario.waypoints[i + 1]});
        cursor += walk_s;
      }
    }
  }
  const Vec2 final_pos = scenario.waypoints.back();

  auto position = [segments, final_pos](double t) -> Vec2 {
    for (const auto& seg : segments) {
      if (t < seg.t1) {
        if (seg.a.x == seg.b.x && seg.a.y == seg.b.y) {
          return seg.a;
        }
        const double u = (t - seg.t0) / (seg.t1 - seg.t0);
        return {seg.a.x + (seg.b.x - seg.a.x) * u, seg.a.y + (seg.b.y - seg.a.y) * u};
      }
    }
    return final_pos;
  };

  auto path_length = [&, position](double t) {
    const Vec2 p = position(t);
    return distance(scenario.tx_position, p) + distance(p, scenario.rx_position);
  };
  return synthesize(channel, grid, sample_rate_hz, scenario.duration_s, path_length, "motion");
}

double received_power(const CfrFrame& frame, double tx_power_mw) {
  if (frame.gains.empty()) {
    throw std::invalid_argument("received_power: frame has no gains");
  }
  if (!(tx_power_mw > 0.0) || !std::isfinite(tx_power_mw)) {
    throw std::invalid_argument("received_power: tx_power_mw must be positive");
  }
  double sum = 0.0;
  for (const auto& g : frame.gains) {
    sum += std::norm(g);
  }
  return tx_power_mw * sum / static_cast<double>(frame.gains.size());
}

int quantize_rssi(double power_mw) {
  if (!(power_mw > 0.0) || !std::isfinite(power_mw)) {
    throw std::domain_error("quantize_rssi: power_mw must be positive");
  }
  const double db = 10.0 * std::log10(power_mw / kReferencePowerMw);
  // nearbyint under the default rounding mode gives ties-to-even.
  return static_cast<int>(std::nearbyint(db));
}

double respiration_phase_excursion(double carrier_frequency_hz, double chest_amplitude_m) {
  if (!(carrier_frequency_hz > 0.0) || !std::isfinite(carrier_frequency_hz)) {
    throw config_error("phase excursion: carrier_frequency_hz must be positive");
  }
  if (!(chest_amplitude_m >= 0.0) || !std::isfinite(chest_amplitude_m)) {
    throw config_error("phase excursion: chest_amplitude_m must be non-negative");
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return two_pi * carrier_frequency_hz * (4.0 * chest_amplitude_m) / kSpeedOfLightMps;
}

}  // namespace wavesense
