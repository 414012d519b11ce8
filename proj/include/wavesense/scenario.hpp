#pragma once

#include <filesystem>
#include <string>

#include "wavesense/sim.hpp"

namespace wavesense {

inline constexpr int kScenarioSchemaVersion = 1;

/// A parsed scenario file: exactly one of the two scenario kinds plus
/// the channel it runs over. The RNG seed is intentionally not part of
/// the file; callers inject it (the CLI requires --seed).
struct Scenario {
  enum class Kind { respiration, motion };

  Kind kind{Kind::respiration};
  RespirationScenario respiration{};
  MotionScenario motion{};
  ChannelModel channel{};
  double sample_rate_hz{100.0};
};

/// Parses and validates scenario JSON. See scenarios/ for the schema by
/// example; the layout is
///
///   {
///     "schema_version": 1,
///     "kind": "respiration" | "motion",
///     "sample_rate_hz": 100.0,              // optional, default 100
///     "channel": {
///       "los_gain": [re, im],
///       "reflected_gain_magnitude": 0.3,
///       "static_path_length_m": 2.2,
///       "noise_snr_db": 20.0                // number, "noiseless", or null
///     },
///     "respiration": { "breath_rate_hz": .., "chest_amplitude_m": ..,
///                      "duration_s": .., "hold_intervals": [[s, e], ..] },
///     "motion":      { "waypoints": [[x, y], ..], "speed_mps": ..,
///                      "tx_position": [x, y], "rx_position": [x, y],
///                      "dwell_s": .., "duration_s": .. }
///   }
///
/// Only the section matching "kind" is required. Malformed input throws
/// config_error naming the offending field.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace wavesense
