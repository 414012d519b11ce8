#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>

#include "wavesense/types.hpp"

namespace wavesense {

enum class TraceFormat { binary, csv };

// Binary trace layout, all fields little-endian:
//
//   magic              8 bytes  "WVSENSE1"
//   schema_version     u32      currently 1
//   num_subcarriers    u32
//   sample_rate_hz     f64
//   center_frequency_hz f64
//   bandwidth_hz       f64
//   frame_count        u64
//   label_length       u32      followed by that many UTF-8 bytes
//
// then frame_count records of:
//
//   timestamp_s        f64
//   rssi_db            i16      INT16_MIN marks an absent RSSI stream
//   gains              num_subcarriers x (f32 re, f32 im)
//
// Subcarrier spacing is not stored; readers derive it as
// bandwidth_hz / 256, the fraction populated grids use. Gains are
// stored at single precision, so doubles that are not exactly
// representable as f32 round on write.
struct TraceFileHeader {
  static constexpr char kMagic[8] = {'W', 'V', 'S', 'E', 'N', 'S', 'E', '1'};
  static constexpr std::uint32_t kSchemaVersion = 1;

  std::uint32_t schema_version{kSchemaVersion};
  std::uint32_t num_subcarriers{0};
  double sample_rate_hz{0.0};
  double center_frequency_hz{0.0};
  double bandwidth_hz{0.0};
  std::uint64_t frame_count{0};
  std::string label;
};

inline constexpr std::int16_t kRssiAbsent = std::numeric_limits<std::int16_t>::min();

/// Serializes a valid trace; returns the number of bytes written.
/// CSV rows are t_s, rssi_db, a_0..a_{K-1} with amplitudes only
/// (phases are dropped) at 9 significant digits. An RSSI-only trace is
/// rejected (io_error): both formats key records off the CFR stream.
std::size_t write_trace(const Trace& trace, std::ostream& out, TraceFormat format);
std::size_t write_trace_file(const Trace& trace, const std::filesystem::path& path,
                             TraceFormat format);

/// Parses a trace and validates it fully; a trace that would violate
/// the core invariants never escapes (validation_error). Bad magic,
/// version, or truncation raise io_error with the failing byte offset
/// where applicable. CSV input reconstructs amplitude-only gains, takes
/// the sample rate from the timestamp spacing, and assumes the default
/// 2.4 GHz / 20 MHz grid parameters (the text format does not carry
/// them).
Trace read_trace(std::istream& in, TraceFormat format);
Trace read_trace_file(const std::filesystem::path& path, TraceFormat format);

/// One delivery during replay. Pointers are null for streams the trace
/// does not carry; they point into the trace and are valid only for the
/// duration of the callback.
struct ReplaySlot {
  std::size_t index{0};
  double timestamp_s{0.0};
  const CfrFrame* cfr{nullptr};
  const RssiSample* rssi{nullptr};
};

struct ReplayResult {
  std::size_t slots_delivered{0};
  double elapsed_s{0.0};
  bool completed{false};
};

/// Feeds the trace's slots to the consumer in order, pacing inter-slot
/// gaps at recorded-dt / speed_factor against absolute deadlines (late
/// slots do not accumulate drift). An infinite speed_factor disables
/// pacing. The consumer returns false to abort; the result reports how
/// many slots it received either way. The trace must be non-empty and
/// speed_factor positive.
ReplayResult replay(const Trace& trace, double speed_factor,
                    const std::function<bool(const ReplaySlot&)>& consumer);

}  // namespace wavesense
