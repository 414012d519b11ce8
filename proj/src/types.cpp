#include "wavesense/types.hpp"

#include <cmath>
#include <stdexcept>

#include "wavesense/errors.hpp"

namespace wavesense {

void SubcarrierGrid::validate() const {
  if (!(center_frequency_hz > 0.0) || !std::isfinite(center_frequency_hz)) {
    throw config_error("grid: center_frequency_hz must be a positive finite value");
  }
  if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) {
    throw config_error("grid: bandwidth_hz must be a positive finite value");
  }
  if (num_subcarriers < 1) {
    throw config_error("grid: num_subcarriers must be at least 1");
  }
  if (!(subcarrier_spacing_hz > 0.0) || !std::isfinite(subcarrier_spacing_hz)) {
    throw config_error("grid: subcarrier_spacing_hz must be a positive finite value");
  }
  const double span = subcarrier_spacing_hz * static_cast<double>(num_subcarriers - 1);
  if (span > bandwidth_hz) {
    throw config_error("grid: populated span exceeds bandwidth_hz");
  }
}

double subcarrier_frequency(const SubcarrierGrid& grid, std::size_t k) {
  if (k >= grid.num_subcarriers) {
    throw std::out_of_range("subcarrier_frequency: index out of range");
  }
  const double centered_index =
      static_cast<double>(k) - static_cast<double>(grid.num_subcarriers - 1) / 2.0;
  return grid.center_frequency_hz + centered_index * grid.subcarrier_spacing_hz;
}

SubcarrierGrid default_grid(double center_frequency_hz) {
  SubcarrierGrid grid;
  grid.center_frequency_hz = center_frequency_hz;
  return grid;
}

std::vector<double> amplitudes(const CfrFrame& frame) {
  std::vector<double> out;
  out.reserve(frame.gains.size());
  for (const auto& g : frame.gains) {
    out.push_back(std::abs(g));
  }
  return out;
}

namespace {

// Shared timestamp checks for both streams: strictly increasing and
// uniform at the nominal sample interval within 1e-6 relative.
template <typename Seq, typename GetTime>
void check_timestamps(const Seq& seq, GetTime get_time, double sample_rate_hz,
                      const char* stream_name) {
  const double nominal_dt = 1.0 / sample_rate_hz;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const double t = get_time(seq[i]);
    if (!std::isfinite(t)) {
      throw validation_error(std::string("trace: non-finite timestamp in ") + stream_name);
    }
    if (i > 0) {
      const double dt = t - get_time(seq[i - 1]);
      if (!(dt > 0.0)) {
        throw validation_error(std::string("trace: timestamps not strictly increasing in ") +
                               stream_name);
      }
      if (std::abs(dt - nominal_dt) > 1e-6 * nominal_dt) {
        throw validation_error(std::string("trace: non-uniform sample interval in ") +
                               stream_name);
      }
    }
  }
}

}  // namespace

void Trace::validate() const {
  grid.validate();
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw validation_error("trace: sample_rate_hz must be a positive finite value");
  }
  for (const auto& frame : cfr_frames) {
    if (frame.gains.size() != grid.num_subcarriers) {
      throw validation_error("trace: frame gain count does not match grid");
    }
    for (const auto& g : frame.gains) {
      if (!std::isfinite(g.real()) || !std::isfinite(g.imag())) {
        throw validation_error("trace: non-finite gain");
      }
    }
  }
  check_timestamps(cfr_frames, [](const CfrFrame& f) { return f.timestamp_s; },
                   sample_rate_hz, "cfr stream");
  check_timestamps(rssi_samples, [](const RssiSample& s) { return s.timestamp_s; },
                   sample_rate_hz, "rssi stream");
  if (!cfr_frames.empty() && !rssi_samples.empty()) {
    if (cfr_frames.size() != rssi_samples.size()) {
      throw validation_error("trace: cfr and rssi streams differ in length");
    }
    for (std::size_t i = 0; i < cfr_frames.size(); ++i) {
      if (cfr_frames[i].timestamp_s != rssi_samples[i].timestamp_s) {
        throw validation_error("trace: cfr and rssi timestamps diverge");
      }
    }
  }
}

std::size_t Trace::slot_count() const {
  return std::max(cfr_frames.size(), rssi_samples.size());
}

}  // namespace wavesense
