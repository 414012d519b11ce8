#pragma once

#include <span>
#include <vector>

namespace wavesense {

enum class EventKind { breath_hold, motion };

/// One detected event on a series' own time axis (t = index / fs,
/// starting at 0).
struct EventInterval {
  double start_s{0.0};
  double end_s{0.0};
  EventKind kind{EventKind::breath_hold};
  double score{0.0};
};

/// Detector thresholds. The variance and prominence thresholds are
/// relative to statistics of the series itself, so the respiration-rate
/// and breath-hold detectors are invariant under scaling and offset;
/// motion_energy_threshold is an absolute fluctuation energy in squared
/// amplitude units, tuned for a unit line-of-sight gain at SNRs around
/// 20 dB (noise parks the 1 s variance near 5e-3 there, a walker near
/// 5e-2). Rescale it with the channel if those assumptions change.
/// validate() throws std::invalid_argument.
struct DetectorParams {
  double flat_var_threshold{0.1};
  double min_hold_s{10.0};
  double motion_energy_threshold{0.02};
  double hysteresis_ratio{0.5};
  double min_peak_distance_s{2.0};
  double min_prominence{0.2};

  void validate() const;
};

/// Breathing rate in Hz from peak spacing: qualifying local maxima need
/// prominence >= min_prominence * (series peak-to-peak) and pairwise
/// spacing >= min_peak_distance_s; the rate is
/// (peak_count - 1) / (t_last_peak - t_first_peak).
/// Because the first and last qualifying peaks anchor the span, transients at
/// the edges of the series (e.g. a smoothing filter still warming up) can
/// skew the estimate; prefer passing a span that starts past such regions.
/// Throws no_periodicity_error when fewer than two peaks qualify.
double estimate_respiration_rate(std::span<const double> series, double sample_rate_hz,
                                 const DetectorParams& params = {});

/// Breath-hold (apnea) intervals: spans where the sliding variance
/// (window = min_hold_s / 2) stays below flat_var_threshold times the
/// variance of the first 10 s for at least min_hold_s, with hysteresis
/// (an open interval survives until the variance exceeds
/// threshold / hysteresis_ratio). Interval edges are then refined to
/// where the series leaves the flat plateau, which undoes the variance
/// window's lag. Requires at least 10 s of leading baseline breathing.
std::vector<EventInterval> detect_breath_holds(std::span<const double> series,
                                               double sample_rate_hz,
                                               const DetectorParams& params = {});

/// Motion intervals: spans where the series' 1 s sliding variance (its
/// short-term fluctuation energy) exceeds motion_energy_threshold,
/// closing below hysteresis_ratio * threshold. Feed it one responsive
/// subcarrier's amplitude, unsmoothed. Reported edges are compensated
/// for the variance window's group delay; intervals shorter than 0.5 s
/// are dropped. A constant or empty series yields no events.
std::vector<EventInterval> detect_motion(std::span<const double> series, double sample_rate_hz,
                                         const DetectorParams& params = {});

/// Peak-to-peak of the high-band series divided by peak-to-peak of the
/// low-band series. Both series must be the same length; a constant
/// low-band series throws std::invalid_argument.
double band_sensitivity_ratio(std::span<const double> series_low_band,
                              std::span<const double> series_high_band);

}  // namespace wavesense
