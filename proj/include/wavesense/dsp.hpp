#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "wavesense/types.hpp"

namespace wavesense {

/// Streaming boxcar filter with a warm-up prefix. For the t-th input
/// (1-based) the output is the mean of all inputs seen so far while
/// t <= window_len, and the mean of the last window_len inputs after
/// that. Updates are amortized O(1): a running sum is maintained and
/// recomputed from the buffered window every million updates to bound
/// floating-point drift.
class MovingAverage {
 public:
  /// window_len must be >= 1 (std::invalid_argument otherwise).
  explicit MovingAverage(std::size_t window_len);

  /// Pushes one sample and returns the current mean. Non-finite input
  /// throws std::invalid_argument and leaves the state untouched.
  double update(double value);

  std::size_t window_len() const { return window_len_; }

  /// Total number of samples consumed.
  std::uint64_t count() const { return count_; }

  /// Current running sum over the buffered window.
  double running_sum() const { return running_sum_; }

  /// Buffered window contents, oldest first (size = min(count, window_len)).
  const std::deque<double>& window() const { return window_; }

 private:
  void recompute_sum();

  static constexpr std::uint64_t kRecomputeInterval = 1'000'000;

  std::size_t window_len_;
  std::deque<double> window_;
  double running_sum_{0.0};
  std::uint64_t count_{0};
  std::uint64_t updates_since_recompute_{0};
};

/// Runs the whole series through a fresh MovingAverage; output has the
/// same length as the input. window_len must be >= 1.
std::vector<double> smooth_series(std::span<const double> series, std::size_t window_len);

/// Subtracts a long moving average from the series, leaving the
/// short-term fluctuation. long_window must be >= 2.
std::vector<double> detrend(std::span<const double> series, std::size_t long_window);

/// Index of the subcarrier whose amplitude varies most over the first
/// window_s seconds of the trace (ties break toward the smallest
/// index). The trace must contain CFR frames spanning at least
/// window_s; throws std::invalid_argument otherwise.
std::size_t select_subcarrier(const Trace& trace, double window_s);

/// How aggregate_amplitude reduces a frame's K amplitudes to a scalar.
struct AggregateMethod {
  enum class Kind { mean, single, max_variance };

  Kind kind{Kind::max_variance};
  std::size_t subcarrier{0};  // used by Kind::single

  static AggregateMethod mean() { return {Kind::mean, 0}; }
  static AggregateMethod single(std::size_t k) { return {Kind::single, k}; }
  static AggregateMethod max_variance() { return {Kind::max_variance, 0}; }
};

/// Scalar amplitude series for a trace: per-frame mean amplitude, one
/// fixed subcarrier, or the subcarrier with maximal amplitude variance
/// over the whole trace. Requires a non-empty CFR stream.
std::vector<double> aggregate_amplitude(const Trace& trace, const AggregateMethod& method);

/// RSSI readings as a double series (convenience for the processing
/// pipeline; RSSI is already a scalar stream).
std::vector<double> rssi_series(const Trace& trace);

}  // namespace wavesense
