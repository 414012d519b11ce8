#include "wavesense/dsp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace wavesense {

MovingAverage::MovingAverage(std::size_t window_len) : window_len_(window_len) {
  if (window_len_ < 1) {
    throw std::invalid_argument("MovingAverage: window_len must be >= 1");
  }
}

double MovingAverage::update(double value) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("MovingAverage: input must be finite");
  }
  if (window_.size() == window_len_) {
    running_sum_ -= window_.front();
    window_.pop_front();
  }
  window_.push_back(value);
  running_sum_ += value;
  ++count_;
  if (++updates_since_recompute_ >= kRecomputeInterval) {
    recompute_sum();
    updates_since_recompute_ = 0;
  }
  return running_sum_ / static_cast<double>(window_.size());
}

void MovingAverage::recompute_sum() {
  double sum = 0.0;
  for (double v : window_) {
    sum += v;
  }
  running_sum_ = sum;
}

std::vector<double> smooth_series(std::span<const double> series, std::size_t window_len) {
  MovingAverage filter(window_len);
  std::vector<double> out;
  out.reserve(series.size());
  for (double v : series) {
    out.push_back(filter.update(v));
  }
  return out;
}

std::vector<double> detrend(std::span<const double> series, std::size_t long_window) {
  if (long_window < 2) {
    throw std::invalid_argument("detrend: long_window must be >= 2");
  }
  std::vector<double> trend = smooth_series(series, long_window);
  for (std::size_t i = 0; i < trend.size(); ++i) {
    trend[i] = series[i] - trend[i];
  }
  return trend;
}

namespace {

// Population variance of one subcarrier's amplitude across frames
// [begin, end). Two-pass for numerical robustness.
double amplitude_variance(const std::vector<CfrFrame>& frames, std::size_t k,
                          std::size_t begin, std::size_t end) {
  const std::size_t n = end - begin;
  double mean = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    mean += std::abs(frames[i].gains[k]);
  }
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double d = std::abs(frames[i].gains[k]) - mean;
    var += d * d;
  }
  return var / static_cast<double>(n);
}

// Highest-variance subcarrier over frames [0, end); ties go to the
// smallest index.
std::size_t max_variance_index(const std::vector<CfrFrame>& frames, std::size_t num_subcarriers,
                               std::size_t end) {
  std::size_t best = 0;
  double best_var = -1.0;
  for (std::size_t k = 0; k < num_subcarriers; ++k) {
    const double var = amplitude_variance(frames, k, 0, end);
    if (var > best_var) {
      best_var = var;
      best = k;
    }
  }
  return best;
}

}  // namespace

std::size_t select_subcarrier(const Trace& trace, double window_s) {
  if (!(window_s > 0.0) || !std::isfinite(window_s)) {
    throw std::invalid_argument("select_subcarrier: window_s must be positive");
  }
  const auto& frames = trace.cfr_frames;
  if (frames.empty()) {
    throw std::invalid_argument("select_subcarrier: trace has no CFR frames");
  }
  const double t0 = frames.front().timestamp_s;
  const double span = frames.back().timestamp_s - t0;
  if (span < window_s) {
    throw std::invalid_argument("select_subcarrier: trace shorter than window_s");
  }
  std::size_t end = frames.size();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].timestamp_s - t0 > window_s) {
      end = i;
      break;
    }
  }
  return max_variance_index(frames, trace.grid.num_subcarriers, end);
}

std::vector<double> aggregate_amplitude(const Trace& trace, const AggregateMethod& method) {
  const auto& frames = trace.cfr_frames;
  if (frames.empty()) {
    throw std::invalid_argument("aggregate_amplitude: trace has no CFR frames");
  }
  std::vector<double> out;
  out.reserve(frames.size());
  switch (method.kind) {
    case AggregateMethod::Kind::mean:
      for (const auto& frame : frames) {
        double sum = 0.0;
        for (const auto& g : frame.gains) {
          sum += std::abs(g);
        }
        out.push_back(sum / static_cast<double>(frame.gains.size()));
      }
      break;
    case AggregateMethod::Kind::single: {
      if (method.subcarrier >= trace.grid.num_subcarriers) {
        throw std::out_of_range("aggregate_amplitude: subcarrier index out of range");
      }
      for (const auto& frame : frames) {
        out.push_back(std::abs(frame.gains[method.subcarrier]));
      }
      break;
    }
    case AggregateMethod::Kind::max_variance: {
      const std::size_t k =
          max_variance_index(frames, trace.grid.num_subcarriers, frames.size());
      for (const auto& frame : frames) {
        out.push_back(std::abs(frame.gains[k]));
      }
      break;
    }
  }
  return out;
}

std::vector<double> rssi_series(const Trace& trace) {
  std::vector<double> out;
  out.reserve(trace.rssi_samples.size());
  for (const auto& s : trace.rssi_samples) {
    out.push_back(static_cast<double>(s.rssi_db));
  }
  return out;
}

}  // namespace wavesense
