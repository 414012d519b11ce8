#include "wavesense/trace_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

#include "wavesense/errors.hpp"

namespace wavesense {

namespace {

constexpr std::size_t kMaxLabelBytes = 1 << 20;

// ---- little-endian packing -------------------------------------------------

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
void put_i16(std::string& out, std::int16_t v) { put_u16(out, static_cast<std::uint16_t>(v)); }

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) {
    v = (v << 8) | p[i];
  }
  return v;
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) {
    v = (v << 8) | p[i];
  }
  return v;
}

float get_f32(const unsigned char* p) { return std::bit_cast<float>(get_u32(p)); }
double get_f64(const unsigned char* p) { return std::bit_cast<double>(get_u64(p)); }
std::int16_t get_i16(const unsigned char* p) { return static_cast<std::int16_t>(get_u16(p)); }

// Reads exactly n bytes or reports the truncation offset.
void read_exact(std::istream& in, unsigned char* dst, std::size_t n, std::size_t offset,
                const char* what) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw io_error("trace: truncated " + std::string(what) + " at byte " +
                   std::to_string(offset + static_cast<std::size_t>(in.gcount())));
  }
}

// ---- binary ----------------------------------------------------------------

std::size_t write_binary(const Trace& trace, std::ostream& out) {
  const std::size_t num_subcarriers = trace.grid.num_subcarriers;
  const bool have_cfr = !trace.cfr_frames.empty();
  const bool have_rssi = !trace.rssi_samples.empty();
  if (!have_cfr && have_rssi) {
    throw io_error("trace: the binary format keys records off the CFR stream; "
                   "RSSI-only traces are not serializable");
  }
  const std::size_t frame_count = trace.cfr_frames.size();

  std::string buf;
  buf.reserve(64 + trace.label.size() + frame_count * (10 + 8 * num_subcarriers));
  buf.append(TraceFileHeader::kMagic, sizeof(TraceFileHeader::kMagic));
  put_u32(buf, TraceFileHeader::kSchemaVersion);
  put_u32(buf, static_cast<std::uint32_t>(num_subcarriers));
  put_f64(buf, trace.sample_rate_hz);
  put_f64(buf, trace.grid.center_frequency_hz);
  put_f64(buf, trace.grid.bandwidth_hz);
  put_u64(buf, frame_count);
  if (trace.label.size() > kMaxLabelBytes) {
    throw io_error("trace: label too long");
  }
  put_u32(buf, static_cast<std::uint32_t>(trace.label.size()));
  buf.append(trace.label);

  for (std::size_t i = 0; i < frame_count; ++i) {
    const auto& frame = trace.cfr_frames[i];
    put_f64(buf, frame.timestamp_s);
    if (have_rssi) {
      const int rssi = trace.rssi_samples[i].rssi_db;
      if (rssi < -32767 || rssi > 32767) {
        throw io_error("trace: rssi_db out of int16 range");
      }
      put_i16(buf, static_cast<std::int16_t>(rssi));
    } else {
      put_i16(buf, kRssiAbsent);
    }
    for (const auto& g : frame.gains) {
      put_f32(buf, static_cast<float>(g.real()));
      put_f32(buf, static_cast<float>(g.imag()));
    }
  }

  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) {
    throw io_error("trace: write failed");
  }
  return buf.size();
}

Trace read_binary(std::istream& in) {
  std::size_t offset = 0;
  unsigned char fixed[48];
  read_exact(in, fixed, 48, offset, "header");
  if (std::memcmp(fixed, TraceFileHeader::kMagic, 8) != 0) {
    throw io_error("trace: bad magic, not a trace file");
  }
  const std::uint32_t version = get_u32(fixed + 8);
  if (version != TraceFileHeader::kSchemaVersion) {
    throw io_error("trace: unsupported schema version " + std::to_string(version));
  }
  const std::uint32_t num_subcarriers = get_u32(fixed + 12);
  const double sample_rate_hz = get_f64(fixed + 16);
  const double center_hz = get_f64(fixed + 24);
  const double bandwidth_hz = get_f64(fixed + 32);
  const std::uint64_t frame_count = get_u64(fixed + 40);
  offset += 48;

  unsigned char len_bytes[4];
  read_exact(in, len_bytes, 4, offset, "header");
  const std::uint32_t label_len = get_u32(len_bytes);
  offset += 4;
  if (label_len > kMaxLabelBytes) {
    throw io_error("trace: implausible label length at byte " + std::to_string(offset - 4));
  }
  std::string label(label_len, '\0');
  if (label_len > 0) {
    read_exact(in, reinterpret_cast<unsigned char*>(label.data()), label_len, offset, "label");
    offset += label_len;
  }

  Trace trace;
  trace.grid.center_frequency_hz = center_hz;
  trace.grid.bandwidth_hz = bandwidth_hz;
  trace.grid.num_subcarriers = num_subcarriers;
  trace.grid.subcarrier_spacing_hz = bandwidth_hz / 256.0;
  trace.sample_rate_hz = sample_rate_hz;
  trace.label = std::move(label);

  const std::size_t record_size = 10 + 8 * static_cast<std::size_t>(num_subcarriers);
  std::vector<unsigned char> record(record_size);
  bool all_rssi_absent = frame_count > 0;
  trace.cfr_frames.reserve(frame_count);
  trace.rssi_samples.reserve(frame_count);
  for (std::uint64_t i = 0; i < frame_count; ++i) {
    read_exact(in, record.data(), record_size, offset, "record");
    offset += record_size;
    CfrFrame frame;
    frame.timestamp_s = get_f64(record.data());
    const std::int16_t rssi = get_i16(record.data() + 8);
    if (rssi != kRssiAbsent) {
      all_rssi_absent = false;
    }
    frame.gains.resize(num_subcarriers);
    for (std::size_t k = 0; k < num_subcarriers; ++k) {
      const unsigned char* p = record.data() + 10 + 8 * k;
      frame.gains[k] = {static_cast<double>(get_f32(p)), static_cast<double>(get_f32(p + 4))};
    }
    trace.rssi_samples.push_back({frame.timestamp_s, rssi});
    trace.cfr_frames.push_back(std::move(frame));
  }
  if (all_rssi_absent) {
    trace.rssi_samples.clear();
  } else {
    for (const auto& s : trace.rssi_samples) {
      if (s.rssi_db == kRssiAbsent) {
        throw io_error("trace: mixed absent/present rssi records");
      }
    }
  }

  try {
    trace.validate();
  } catch (const config_error& e) {
    throw validation_error(std::string("trace: decoded data invalid: ") + e.what());
  }
  return trace;
}

// ---- csv -------------------------------------------------------------------

std::size_t write_csv(const Trace& trace, std::ostream& out) {
  const bool have_cfr = !trace.cfr_frames.empty();
  const bool have_rssi = !trace.rssi_samples.empty();
  if (!have_cfr && have_rssi) {
    throw io_error("trace: the csv format keys rows off the CFR stream; "
                   "RSSI-only traces are not serializable");
  }

  std::string buf;
  buf += "t_s,rssi_db";
  for (std::size_t k = 0; k < trace.grid.num_subcarriers; ++k) {
    buf += ",a_" + std::to_string(k);
  }
  buf += '\n';

  char field[64];
  for (std::size_t i = 0; i < trace.cfr_frames.size(); ++i) {
    const auto& frame = trace.cfr_frames[i];
    std::snprintf(field, sizeof(field), "%.9f", frame.timestamp_s);
    buf += field;
    buf += ',';
    if (have_rssi) {
      buf += std::to_string(trace.rssi_samples[i].rssi_db);
    }
    for (const auto& g : frame.gains) {
      std::snprintf(field, sizeof(field), ",%.9g", std::abs(g));
      buf += field;
    }
    buf += '\n';
  }

  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) {
    throw io_error("trace: write failed");
  }
  return buf.size();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

double parse_double(const std::string& field, std::size_t line_no, const char* what) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw io_error("trace: bad " + std::string(what) + " on csv line " + std::to_string(line_no));
  }
  return value;
}

Trace read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw io_error("trace: empty csv input");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "t_s" || header[1] != "rssi_db") {
    throw io_error("trace: csv header must start with t_s,rssi_db,a_0");
  }
  const std::size_t num_subcarriers = header.size() - 2;
  for (std::size_t k = 0; k < num_subcarriers; ++k) {
    if (header[k + 2] != "a_" + std::to_string(k)) {
      throw io_error("trace: unexpected csv amplitude column " + header[k + 2]);
    }
  }

  Trace trace;
  trace.grid.num_subcarriers = num_subcarriers;
  trace.grid.subcarrier_spacing_hz = trace.grid.bandwidth_hz / 256.0;

  bool any_rssi = false;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw io_error("trace: wrong field count on csv line " + std::to_string(line_no));
    }
    CfrFrame frame;
    frame.timestamp_s = parse_double(fields[0], line_no, "timestamp");
    frame.gains.reserve(num_subcarriers);
    for (std::size_t k = 0; k < num_subcarriers; ++k) {
      const double a = parse_double(fields[k + 2], line_no, "amplitude");
      if (a < 0.0) {
        throw io_error("trace: negative amplitude on csv line " + std::to_string(line_no));
      }
      frame.gains.emplace_back(a, 0.0);
    }
    if (!fields[1].empty()) {
      any_rssi = true;
      trace.rssi_samples.push_back(
          {frame.timestamp_s, static_cast<int>(parse_double(fields[1], line_no, "rssi"))});
    } else if (any_rssi) {
      throw io_error("trace: mixed present/absent rssi cells in csv");
    }
    trace.cfr_frames.push_back(std::move(frame));
  }
  if (!any_rssi) {
    trace.rssi_samples.clear();
  } else if (trace.rssi_samples.size() != trace.cfr_frames.size()) {
    throw io_error("trace: mixed present/absent rssi cells in csv");
  }

  // The text format carries no rate metadata; recover it from the
  // median timestamp step.
  if (trace.cfr_frames.size() >= 2) {
    std::vector<double> deltas;
    deltas.reserve(trace.cfr_frames.size() - 1);
    for (std::size_t i = 1; i < trace.cfr_frames.size(); ++i) {
      deltas.push_back(trace.cfr_frames[i].timestamp_s - trace.cfr_frames[i - 1].timestamp_s);
    }
    std::nth_element(deltas.begin(), deltas.begin() + deltas.size() / 2, deltas.end());
    const double dt = deltas[deltas.size() / 2];
    if (!(dt > 0.0)) {
      throw validation_error("trace: csv timestamps not strictly increasing");
    }
    trace.sample_rate_hz = 1.0 / dt;
  }

  try {
    trace.validate();
  } catch (const config_error& e) {
    throw validation_error(std::string("trace: decoded data invalid: ") + e.what());
  }
  return trace;
}

}  // namespace

std::size_t write_trace(const Trace& trace, std::ostream& out, TraceFormat format) {
  try {
    trace.validate();
  } catch (const config_error& e) {
    throw validation_error(std::string("trace: refusing to serialize invalid trace: ") + e.what());
  }
  return format == TraceFormat::binary ? write_binary(trace, out) : write_csv(trace, out);
}

std::size_t write_trace_file(const Trace& trace, const std::filesystem::path& path,
                             TraceFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw io_error("trace: cannot open " + path.string() + " for writing");
  }
  return write_trace(trace, out, format);
}

Trace read_trace(std::istream& in, TraceFormat format) {
  return format == TraceFormat::binary ? read_binary(in) : read_csv(in);
}

Trace read_trace_file(const std::filesystem::path& path, TraceFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw io_error("trace: cannot open " + path.string() + " for reading");
  }
  return read_trace(in, format);
}

ReplayResult replay(const Trace& trace, double speed_factor,
                    const std::function<bool(const ReplaySlot&)>& consumer) {
  if (std::isnan(speed_factor) || !(speed_factor > 0.0)) {
    throw std::invalid_argument("replay: speed_factor must be positive");
  }
  if (!consumer) {
    throw std::invalid_argument("replay: consumer must be callable");
  }
  const std::size_t slots = trace.slot_count();
  if (slots == 0) {
    throw std::invalid_argument("replay: trace is empty");
  }
  const bool have_cfr = !trace.cfr_frames.empty();
  const bool have_rssi = !trace.rssi_samples.empty();
  const bool paced = std::isfinite(speed_factor);

  const auto start = std::chrono::steady_clock::now();
  const double t0 = have_cfr ? trace.cfr_frames.front().timestamp_s
                             : trace.rssi_samples.front().timestamp_s;
  ReplayResult result;
  for (std::size_t i = 0; i < slots; ++i) {
    ReplaySlot slot;
    slot.index = i;
    slot.cfr = have_cfr ? &trace.cfr_frames[i] : nullptr;
    slot.rssi = have_rssi ? &trace.rssi_samples[i] : nullptr;
    slot.timestamp_s = have_cfr ? trace.cfr_frames[i].timestamp_s
                                : trace.rssi_samples[i].timestamp_s;
    if (paced) {
      const auto deadline =
          start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>((slot.timestamp_s - t0) / speed_factor));
      std::this_thread::sleep_until(deadline);
    }
    const bool keep_going = consumer(slot);
    result.slots_delivered = i + 1;
    if (!keep_going) {
      result.completed = false;
      result.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      return result;
    }
  }
  result.completed = true;
  result.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace wavesense
