#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace wavesense {

/// Frequency-domain layout of an OFDM sounding signal: num_subcarriers
/// tones spaced evenly and centered on center_frequency_hz.
///
/// The default matches a 20 MHz channel reporting 245 usable tones at
/// 78.125 kHz spacing (20 MHz / 256).
struct SubcarrierGrid {
  double center_frequency_hz{2.4e9};
  double bandwidth_hz{20e6};
  std::size_t num_subcarriers{245};
  double subcarrier_spacing_hz{78.125e3};

  /// Throws config_error if any field is non-positive or the populated
  /// span subcarrier_spacing_hz * (num_subcarriers - 1) exceeds
  /// bandwidth_hz.
  void validate() const;
};

/// Absolute frequency of subcarrier k. Tones are indexed symmetrically
/// around the center: f_k = center + (k - (K - 1) / 2) * spacing, so an
/// odd K puts the middle tone exactly on the center frequency.
/// Throws std::out_of_range for k >= num_subcarriers.
double subcarrier_frequency(const SubcarrierGrid& grid, std::size_t k);

/// 20 MHz / 245-tone grid at the given center frequency.
SubcarrierGrid default_grid(double center_frequency_hz);

/// One time slot of complex channel gains, one entry per subcarrier.
struct CfrFrame {
  double timestamp_s{0.0};
  std::vector<std::complex<double>> gains;
};

/// Per-subcarrier gain magnitudes of one frame.
std::vector<double> amplitudes(const CfrFrame& frame);

/// One received-signal-strength reading, quantized to whole dBm.
struct RssiSample {
  double timestamp_s{0.0};
  int rssi_db{0};
};

/// A uniformly sampled measurement stream from one link: per-slot CFR
/// frames and/or RSSI readings plus the grid they were captured on.
///
/// Invariants (checked by validate):
///  - timestamps strictly increase within each stream;
///  - consecutive timestamps differ by 1 / sample_rate_hz within a
///    relative tolerance of 1e-6;
///  - when both streams are non-empty they are the same length with
///    pairwise identical timestamps;
///  - every frame carries exactly grid.num_subcarriers finite gains.
///
/// Traces are value types; treat them as immutable once filled in and
/// they are safe to share across threads.
struct Trace {
  SubcarrierGrid grid;
  double sample_rate_hz{100.0};
  std::vector<CfrFrame> cfr_frames;
  std::vector<RssiSample> rssi_samples;
  std::string label;

  /// Throws validation_error (or config_error for a bad grid) on any
  /// invariant violation.
  void validate() const;

  /// Number of time slots (max of the two stream lengths).
  std::size_t slot_count() const;
};

}  // namespace wavesense
