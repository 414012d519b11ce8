#include "wavesense/detect.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include "wavesense/dsp.hpp"
#include "wavesense/errors.hpp"

namespace wavesense {

void DetectorParams::validate() const {
  const bool positive = flat_var_threshold > 0.0 && min_hold_s > 0.0 &&
                        motion_energy_threshold > 0.0 && hysteresis_ratio > 0.0 &&
                        min_peak_distance_s > 0.0 && min_prominence > 0.0;
  if (!positive) {
    throw std::invalid_argument("detector params: all thresholds must be positive");
  }
  if (!(hysteresis_ratio < 1.0)) {
    throw std::invalid_argument("detector params: hysteresis_ratio must be below 1");
  }
}

namespace {

void check_series_args(std::span<const double> series, double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw std::invalid_argument("detector: sample_rate_hz must be positive");
  }
  for (double v : series) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("detector: series must be finite");
    }
  }
}

struct PeakCandidate {
  std::size_t index;
  double height;
};

// Local maxima with plateau support: a flat top counts once, at its
// middle sample.
std::vector<PeakCandidate> local_maxima(std::span<const double> s) {
  std::vector<PeakCandidate> out;
  const std::size_t n = s.size();
  if (n < 3) {
    return out;
  }
  std::size_t i = 1;
  while (i + 1 < n) {
    if (s[i] > s[i - 1]) {
      std::size_t j = i;
      while (j + 1 < n && s[j + 1] == s[i]) {
        ++j;
      }
      if (j + 1 < n && s[j + 1] < s[i]) {
        out.push_back({(i + j) / 2, s[i]});
      }
      i = j + 1;
    } else {
      ++i;
    }
  }
  return out;
}

// Topographic prominence: walk outward until terrain higher than the
// peak (or the series edge), take the deepest valley on each side, and
// measure the drop to the higher of the two.
double prominence(std::span<const double> s, std::size_t peak) {
  double left_min = s[peak];
  for (std::size_t i = peak; i-- > 0;) {
    if (s[i] > s[peak]) {
      break;
    }
    left_min = std::min(left_min, s[i]);
  }
  double right_min = s[peak];
  for (std::size_t i = peak + 1; i < s.size(); ++i) {
    if (s[i] > s[peak]) {
      break;
    }
    right_min = std::min(right_min, s[i]);
  }
  return s[peak] - std::max(left_min, right_min);
}

// Trailing-window population variance; entries before the window fills
// are +inf so threshold logic ignores the warm-up. The series is
// centered on its global mean first to keep the sum-of-squares path
// well conditioned (and offset-invariant).
std::vector<double> sliding_variance(std::span<const double> s, std::size_t window) {
  const std::size_t n = s.size();
  std::vector<double> out(n, std::numeric_limits<double>::infinity());
  if (n < window || window == 0) {
    return out;
  }
  double mean = 0.0;
  for (double v : s) {
    mean += v;
  }
  mean /= static_cast<double>(n);

  std::vector<double> sum(n + 1, 0.0);
  std::vector<double> sum_sq(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = s[i] - mean;
    sum[i + 1] = sum[i] + c;
    sum_sq[i + 1] = sum_sq[i] + c * c;
  }
  const double len = static_cast<double>(window);
  for (std::size_t i = window - 1; i < n; ++i) {
    const double m = (sum[i + 1] - sum[i + 1 - window]) / len;
    const double v = (sum_sq[i + 1] - sum_sq[i + 1 - window]) / len - m * m;
    out[i] = std::max(v, 0.0);
  }
  return out;
}

std::size_t to_samples(double seconds, double sample_rate_hz) {
  return static_cast<std::size_t>(std::llround(seconds * sample_rate_hz));
}

}  // namespace

double estimate_respiration_rate(std::span<const double> series, double sample_rate_hz,
                                 const DetectorParams& params) {
  params.validate();
  check_series_args(series, sample_rate_hz);
  if (series.size() < 3) {
    throw no_periodicity_error("respiration rate: series too short for peak detection");
  }

  const auto [min_it, max_it] = std::minmax_element(series.begin(), series.end());
  const double peak_to_peak = *max_it - *min_it;
  const double min_prom = params.min_prominence * peak_to_peak;

  std::vector<PeakCandidate> peaks;
  for (const auto& cand : local_maxima(series)) {
    if (prominence(series, cand.index) >= min_prom) {
      peaks.push_back(cand);
    }
  }

  // Enforce spacing greedily from the tallest down, like a classic
  // peak-picker: a shorter peak too close to an accepted one is dropped.
  std::stable_sort(peaks.begin(), peaks.end(), [](const PeakCandidate& a, const PeakCandidate& b) {
    return a.height > b.height;
  });
  const double min_gap = params.min_peak_distance_s * sample_rate_hz;
  std::vector<std::size_t> kept;
  for (const auto& cand : peaks) {
    bool ok = true;
    for (std::size_t k : kept) {
      const double gap = cand.index > k ? static_cast<double>(cand.index - k)
                                        : static_cast<double>(k - cand.index);
      if (gap < min_gap) {
        ok = false;
        break;
      }
    }
    if (ok) {
      kept.push_back(cand.index);
    }
  }
  if (kept.size() < 2) {
    throw no_periodicity_error("respiration rate: fewer than two qualifying peaks");
  }
  std::sort(kept.begin(), kept.end());
  const double span_s = static_cast<double>(kept.back() - kept.front()) / sample_rate_hz;
  return static_cast<double>(kept.size() - 1) / span_s;
}

namespace {

// Expands a confirmed flat core outward to where the series leaves the
// plateau value for good (a sustained excursion beyond tol), recovering
// the true hold edges from the lag of the variance window.
std::pair<std::size_t, std::size_t> refine_plateau(std::span<const double> s, std::size_t lo,
                                                   std::size_t hi, double plateau, double tol,
                                                   std::size_t max_gap) {
  const std::size_t center = lo + (hi - lo) / 2;
  std::size_t left = center;
  std::size_t excess = 0;
  for (std::size_t i = center + 1; i-- > 0;) {
    if (std::abs(s[i] - plateau) <= tol) {
      left = i;
      excess = 0;
    } else if (++excess >= max_gap) {
      break;
    }
  }
  std::size_t right = center;
  excess = 0;
  for (std::size_t i = center; i < s.size(); ++i) {
    if (std::abs(s[i] - plateau) <= tol) {
      right = i;
      excess = 0;
    } else if (++excess >= max_gap) {
      break;
    }
  }
  return {left, right};
}

}  // namespace

std::vector<EventInterval> detect_breath_holds(std::span<const double> series,
                                               double sample_rate_hz,
                                               const DetectorParams& params) {
  params.validate();
  check_series_args(series, sample_rate_hz);

  constexpr double kCalibrationS = 10.0;
  const std::size_t n = series.size();
  const std::size_t calib = to_samples(kCalibrationS, sample_rate_hz);
  if (n < calib || calib < 2) {
    throw std::invalid_argument("breath holds: series shorter than the 10 s baseline window");
  }

  double baseline_mean = 0.0;
  for (std::size_t i = 0; i < calib; ++i) {
    baseline_mean += series[i];
  }
  baseline_mean /= static_cast<double>(calib);
  double baseline_var = 0.0;
  for (std::size_t i = 0; i < calib; ++i) {
    const double d = series[i] - baseline_mean;
    baseline_var += d * d;
  }
  baseline_var /= static_cast<double>(calib);
  if (baseline_var == 0.0) {
    // Nothing to calibrate against; a perfectly flat baseline gives no
    // contrast between breathing and holding.
    return {};
  }

  const std::size_t var_window =
      std::max<std::size_t>(2, to_samples(params.min_hold_s / 2.0, sample_rate_hz));
  if (n < var_window) {
    return {};
  }
  const std::vector<double> var = sliding_variance(series, var_window);

  const double open_threshold = params.flat_var_threshold * baseline_var;
  const double close_threshold = open_threshold / params.hysteresis_ratio;
  const std::size_t min_run = std::max<std::size_t>(1, to_samples(params.min_hold_s, sample_rate_hz));

  // Hysteresis pass over the variance track: a candidate run of
  // below-threshold windows must last min_hold_s to be confirmed, and a
  // confirmed run survives until the variance climbs past the close
  // threshold.
  struct Core {
    std::size_t first_below;
    std::size_t last_index;
  };
  std::vector<Core> cores;
  bool open = false;
  std::size_t below_start = 0;
  bool in_below_run = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!open) {
      if (var[i] < open_threshold) {
        if (!in_below_run) {
          in_below_run = true;
          below_start = i;
        }
        if (i - below_start + 1 >= min_run) {
          open = true;
        }
      } else {
        in_below_run = false;
      }
    } else if (var[i] > close_threshold) {
      cores.push_back({below_start, i});
      open = false;
      in_below_run = false;
    }
  }
  if (open) {
    cores.push_back({below_start, n - 1});
  }

  const double tol = std::sqrt(close_threshold);
  const std::size_t max_gap = std::max<std::size_t>(1, to_samples(0.2, sample_rate_hz));

  std::vector<EventInterval> events;
  for (const auto& core : cores) {
    // Samples covered by the below-threshold variance windows.
    const std::size_t span_lo = core.first_below >= var_window - 1
                                    ? core.first_below - (var_window - 1)
                                    : 0;
    const std::size_t span_hi = core.last_index;
    // Plateau level from the middle half of the span, clear of any
    // breathing contamination at the edges.
    const std::size_t quarter = (span_hi - span_lo) / 4;
    const std::size_t mid_lo = span_lo + quarter;
    const std::size_t mid_hi = std::max(span_hi - quarter, mid_lo);
    double plateau = 0.0;
    for (std::size_t i = mid_lo; i <= mid_hi; ++i) {
      plateau += series[i];
    }
    plateau /= static_cast<double>(mid_hi - mid_lo + 1);

    const auto [left, right] = refine_plateau(series, span_lo, span_hi, plateau, tol, max_gap);

    double mean_var = 0.0;
    std::size_t var_count = 0;
    for (std::size_t i = core.first_below; i <= core.last_index; ++i) {
      if (std::isfinite(var[i])) {
        mean_var += var[i];
        ++var_count;
      }
    }
    const double score =
        var_count > 0 ? std::max(0.0, 1.0 - (mean_var / static_cast<double>(var_count)) / baseline_var)
                      : 0.0;

    events.push_back({static_cast<double>(left) / sample_rate_hz,
                      static_cast<double>(right) / sample_rate_hz, EventKind::breath_hold, score});
  }

  // Merge any overlap the refinement introduced.
  std::vector<EventInterval> merged;
  for (const auto& e : events) {
    if (!merged.empty() && e.start_s <= merged.back().end_s) {
      merged.back().end_s = std::max(merged.back().end_s, e.end_s);
      merged.back().score = std::max(merged.back().score, e.score);
    } else {
      merged.push_back(e);
    }
  }
  return merged;
}

std::vector<EventInterval> detect_motion(std::span<const double> series, double sample_rate_hz,
                                         const DetectorParams& params) {
  params.validate();
  check_series_args(series, sample_rate_hz);
  const std::size_t n = series.size();

  // A walker sweeps the reflected-path phase through many cycles, so
  // any single subcarrier's amplitude oscillates across its whole range
  // and the 1 s windowed variance jumps two orders of magnitude over
  // the noise floor. Per-sample difference energy cannot do this: at
  // practical rates the sample-to-sample noise steps are as large as
  // the signal steps, and band-averaged series lose the oscillation
  // entirely once the path stretches beyond the band's coherence
  // length.
  const std::size_t var_window = std::max<std::size_t>(2, to_samples(1.0, sample_rate_hz));
  if (n < var_window) {
    return {};
  }
  const std::vector<double> var = sliding_variance(series, var_window);

  const double open_threshold = params.motion_energy_threshold;
  const double close_threshold = params.hysteresis_ratio * params.motion_energy_threshold;
  // The trailing variance window reports a crossing about half a window
  // after the change it reacts to; shift edges back accordingly.
  const double group_delay_s = (static_cast<double>(var_window - 1) / 2.0 + 0.5) / sample_rate_hz;
  const double t_end = static_cast<double>(n - 1) / sample_rate_hz;

  std::vector<EventInterval> events;
  bool open = false;
  double open_t = 0.0;
  double open_var_sum = 0.0;
  std::size_t open_var_count = 0;

  for (std::size_t i = var_window - 1; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate_hz;
    if (!open) {
      if (var[i] > open_threshold) {
        open = true;
        open_t = t;
        open_var_sum = var[i];
        open_var_count = 1;
      }
    } else {
      open_var_sum += var[i];
      ++open_var_count;
      if (var[i] < close_threshold) {
        const double start = std::clamp(open_t - group_delay_s, 0.0, t_end);
        const double end = std::clamp(t - group_delay_s, 0.0, t_end);
        events.push_back({start, end, EventKind::motion,
                          open_var_sum / static_cast<double>(open_var_count)});
        open = false;
      }
    }
  }
  if (open) {
    // Ran off the end while active; close at the last sample without
    // delay compensation (the motion genuinely extends to the edge).
    events.push_back({std::clamp(open_t - group_delay_s, 0.0, t_end), t_end, EventKind::motion,
                      open_var_sum / static_cast<double>(open_var_count)});
  }

  std::vector<EventInterval> kept;
  for (const auto& e : events) {
    if (e.end_s - e.start_s >= 0.5) {
      kept.push_back(e);
    }
  }
  return kept;
}

double band_sensitivity_ratio(std::span<const double> series_low_band,
                              std::span<const double> series_high_band) {
  if (series_low_band.size() != series_high_band.size()) {
    throw std::invalid_argument("band sensitivity: series must cover the same duration");
  }
  if (series_low_band.empty()) {
    throw std::invalid_argument("band sensitivity: series must be non-empty");
  }
  auto peak_to_peak = [](std::span<const double> s) {
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    return *hi - *lo;
  };
  const double low = peak_to_peak(series_low_band);
  if (low == 0.0) {
    throw std::invalid_argument("band sensitivity: low-band series is constant");
  }
  return peak_to_peak(series_high_band) / low;
}

}  // namespace wavesense
