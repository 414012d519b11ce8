#include "wavesense/scenario.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wavesense/errors.hpp"

namespace wavesense {

namespace {

using nlohmann::json;

double number_field(const json& obj, const char* section, const char* name) {
  if (!obj.contains(name)) {
    throw config_error(std::string("scenario: missing field ") + section + "." + name);
  }
  const auto& v = obj.at(name);
  if (!v.is_number()) {
    throw config_error(std::string("scenario: field ") + section + "." + name +
                       " must be a number");
  }
  return v.get<double>();
}

Vec2 point_field(const json& obj, const char* section, const char* name) {
  if (!obj.contains(name)) {
    throw config_error(std::string("scenario: missing field ") + section + "." + name);
  }
  const auto& v = obj.at(name);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw config_error(std::string("scenario: field ") + section + "." + name +
                       " must be a [x, y] pair");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

ChannelModel parse_channel(const json& root) {
  if (!root.contains("channel") || !root.at("channel").is_object()) {
    throw config_error("scenario: missing object field channel");
  }
  const auto& c = root.at("channel");
  ChannelModel channel;
  if (c.contains("los_gain")) {
    const auto& g = c.at("los_gain");
    if (!g.is_array() || g.size() != 2 || !g[0].is_number() || !g[1].is_number()) {
      throw config_error("scenario: channel.los_gain must be a [re, im] pair");
    }
    channel.los_gain = {g[0].get<double>(), g[1].get<double>()};
  }
  if (c.contains("reflected_gain_magnitude")) {
    channel.reflected_gain_magnitude = number_field(c, "channel", "reflected_gain_magnitude");
  }
  if (c.contains("static_path_length_m")) {
    channel.static_path_length_m = number_field(c, "channel", "static_path_length_m");
  }
  if (c.contains("noise_snr_db")) {
    const auto& snr = c.at("noise_snr_db");
    if (snr.is_null() || (snr.is_string() && snr.get<std::string>() == "noiseless")) {
      channel.noise_snr_db.reset();
    } else if (snr.is_number()) {
      channel.noise_snr_db = snr.get<double>();
    } else {
      throw config_error("scenario: channel.noise_snr_db must be a number, null, or \"noiseless\"");
    }
  }
  channel.validate();
  return channel;
}

RespirationScenario parse_respiration(const json& root) {
  if (!root.contains("respiration") || !root.at("respiration").is_object()) {
    throw config_error("scenario: kind is respiration but object field respiration is missing");
  }
  const auto& r = root.at("respiration");
  RespirationScenario scenario;
  scenario.breath_rate_hz = number_field(r, "respiration", "breath_rate_hz");
  scenario.chest_amplitude_m = number_field(r, "respiration", "chest_amplitude_m");
  scenario.duration_s = number_field(r, "respiration", "duration_s");
  if (r.contains("hold_intervals")) {
    const auto& holds = r.at("hold_intervals");
    if (!holds.is_array()) {
      throw config_error("scenario: respiration.hold_intervals must be an array of [start, end]");
    }
    for (const auto& h : holds) {
      if (!h.is_array() || h.size() != 2 || !h[0].is_number() || !h[1].is_number()) {
        throw config_error("scenario: respiration.hold_intervals entries must be [start, end]");
      }
      scenario.hold_intervals.push_back({h[0].get<double>(), h[1].get<double>()});
    }
  }
  scenario.validate();
  return scenario;
}

MotionScenario parse_motion(const json& root) {
  if (!root.contains("motion") || !root.at("motion").is_object()) {
    throw config_error("scenario: kind is motion but object field motion is missing");
  }
  const auto& m = root.at("motion");
  MotionScenario scenario;
  if (!m.contains("waypoints") || !m.at("waypoints").is_array()) {
    throw config_error("scenario: missing array field motion.waypoints");
  }
  for (const auto& w : m.at("waypoints")) {
    if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
      throw config_error("scenario: motion.waypoints entries must be [x, y] pairs");
    }
    scenario.waypoints.push_back({w[0].get<double>(), w[1].get<double>()});
  }
  scenario.speed_mps = number_field(m, "motion", "speed_mps");
  scenario.tx_position = point_field(m, "motion", "tx_position");
  scenario.rx_position = point_field(m, "motion", "rx_position");
  if (m.contains("dwell_s")) {
    scenario.dwell_s = number_field(m, "motion", "dwell_s");
  }
  scenario.duration_s = number_field(m, "motion", "duration_s");
  scenario.validate();
  return scenario;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("scenario: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) {
    throw config_error("scenario: top level must be an object");
  }
  if (!root.contains("schema_version")) {
    throw config_error("scenario: missing field schema_version");
  }
  if (!root.at("schema_version").is_number_integer() ||
      root.at("schema_version").get<int>() != kScenarioSchemaVersion) {
    throw config_error("scenario: unsupported schema_version (expected " +
                       std::to_string(kScenarioSchemaVersion) + ")");
  }
  if (!root.contains("kind") || !root.at("kind").is_string()) {
    throw config_error("scenario: missing string field kind");
  }

  Scenario scenario;
  const std::string kind = root.at("kind").get<std::string>();
  if (kind == "respiration") {
    scenario.kind = Scenario::Kind::respiration;
    scenario.respiration = parse_respiration(root);
  } else if (kind == "motion") {
    scenario.kind = Scenario::Kind::motion;
    scenario.motion = parse_motion(root);
  } else {
    throw config_error("scenario: kind must be \"respiration\" or \"motion\", got \"" + kind +
                       "\"");
  }
  scenario.channel = parse_channel(root);
  if (root.contains("sample_rate_hz")) {
    scenario.sample_rate_hz = number_field(root, "<root>", "sample_rate_hz");
  }
  if (!(scenario.sample_rate_hz > 0.0)) {
    throw config_error("scenario: sample_rate_hz must be positive");
  }
  return scenario;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw io_error("scenario: cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace wavesense
