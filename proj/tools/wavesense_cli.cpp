// Command-line front end: simulate scenario files into trace files,
// turn traces into plot-ready CSV, run the detectors, and compare the
// 2.4 GHz and 6 GHz bands on one scenario.
//
// Exit codes: 0 success, 2 configuration error, 3 respiration mode
// found no periodicity, 4 I/O error. Machine-readable JSON reports go
// to stdout; human-readable summaries go to stderr.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wavesense/detect.hpp"
#include "wavesense/dsp.hpp"
#include "wavesense/errors.hpp"
#include "wavesense/scenario.hpp"
#include "wavesense/sim.hpp"
#include "wavesense/trace_io.hpp"
#include "wavesense/types.hpp"

namespace {

using nlohmann::json;
using namespace wavesense;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNoDetection = 3;
constexpr int kExitIo = 4;

double band_to_center_hz(const std::string& band) {
  if (band == "2.4GHz") {
    return 2.4e9;
  }
  if (band == "6GHz") {
    return 6.0e9;
  }
  throw config_error("band must be 2.4GHz or 6GHz");
}

TraceFormat format_for_path(const std::string& path) {
  return path.size() >= 4 && path.substr(path.size() - 4) == ".csv" ? TraceFormat::csv
                                                                    : TraceFormat::binary;
}

AggregateMethod parse_aggregate(const std::string& spec) {
  if (spec == "mean") {
    return AggregateMethod::mean();
  }
  if (spec == "max_variance") {
    return AggregateMethod::max_variance();
  }
  if (spec.rfind("single:", 0) == 0) {
    try {
      return AggregateMethod::single(std::stoul(spec.substr(7)));
    } catch (const std::exception&) {
      throw config_error("aggregate: bad subcarrier index in \"" + spec + "\"");
    }
  }
  throw config_error("aggregate must be mean, max_variance, or single:<k>");
}

Trace run_scenario(const Scenario& scenario, double center_hz, std::uint64_t seed) {
  ChannelModel channel = scenario.channel;
  channel.rng_seed = seed;
  const SubcarrierGrid grid = default_grid(center_hz);
  if (scenario.kind == Scenario::Kind::respiration) {
    return synthesize_respiration(scenario.respiration, channel, grid, scenario.sample_rate_hz);
  }
  return synthesize_motion(scenario.motion, channel, grid, scenario.sample_rate_hz);
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

json event_to_json(const EventInterval& e) {
  return json{{"kind", e.kind == EventKind::breath_hold ? "breath_hold" : "motion"},
              {"start_s", e.start_s},
              {"end_s", e.end_s},
              {"score", e.score}};
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string scenario_path;
  std::string out_path;
  std::string band{"2.4GHz"};
  std::uint64_t seed{0};
};

int cmd_simulate(const SimulateArgs& args) {
  const Scenario scenario = load_scenario(args.scenario_path);
  const Trace trace = run_scenario(scenario, band_to_center_hz(args.band), args.seed);
  const std::size_t bytes = write_trace_file(trace, args.out_path, format_for_path(args.out_path));

  json report{{"command", "simulate"},
              {"scenario", args.scenario_path},
              {"out", args.out_path},
              {"band", args.band},
              {"seed", args.seed},
              {"frames", trace.cfr_frames.size()},
              {"sample_rate_hz", trace.sample_rate_hz},
              {"bytes_written", bytes}};
  std::cout << report.dump(2) << "\n";
  std::cerr << "wrote " << trace.cfr_frames.size() << " frames ("
            << (trace.cfr_frames.empty()
                    ? 0.0
                    : trace.cfr_frames.back().timestamp_s + 1.0 / trace.sample_rate_hz)
            << " s at " << trace.sample_rate_hz << " Hz, " << args.band << ") to "
            << args.out_path << "\n";
  return kExitOk;
}

// ---- process ----------------------------------------------------------------

struct ProcessArgs {
  std::string in_path;
  std::string out_path;
  std::size_t window{100};
  std::string aggregate{"max_variance"};
};

int cmd_process(const ProcessArgs& args) {
  const auto t_start = std::chrono::steady_clock::now();
  const Trace trace = read_trace_file(args.in_path, format_for_path(args.in_path));

  const bool have_cfr = !trace.cfr_frames.empty();
  const bool have_rssi = !trace.rssi_samples.empty();
  if (!have_cfr) {
    std::cerr << "warning: trace has no CFR stream; CFR columns left empty\n";
  }
  if (!have_rssi) {
    std::cerr << "warning: trace has no RSSI stream; RSSI columns left empty\n";
  }
  if (!have_cfr && !have_rssi) {
    throw io_error("process: trace has no streams at all");
  }

  std::vector<double> cfr_raw, cfr_smooth, rssi_raw, rssi_smooth;
  if (have_cfr) {
    cfr_raw = aggregate_amplitude(trace, parse_aggregate(args.aggregate));
    cfr_smooth = smooth_series(cfr_raw, args.window);
  }
  if (have_rssi) {
    rssi_raw = rssi_series(trace);
    rssi_smooth = smooth_series(rssi_raw, args.window);
  }

  const std::size_t rows = std::max(cfr_raw.size(), rssi_raw.size());
  const double t0 = have_cfr ? trace.cfr_frames.front().timestamp_s
                             : trace.rssi_samples.front().timestamp_s;

  std::FILE* out = std::fopen(args.out_path.c_str(), "wb");
  if (out == nullptr) {
    throw io_error("process: cannot open " + args.out_path + " for writing");
  }
  std::fputs("t_s,cfr_raw,cfr_smooth,rssi_raw,rssi_smooth\n", out);
  for (std::size_t i = 0; i < rows; ++i) {
    std::fprintf(out, "%.9f", t0 + static_cast<double>(i) / trace.sample_rate_hz);
    if (i < cfr_raw.size()) {
      std::fprintf(out, ",%.9g,%.9g", cfr_raw[i], cfr_smooth[i]);
    } else {
      std::fputs(",,", out);
    }
    if (i < rssi_raw.size()) {
      std::fprintf(out, ",%.9g,%.9g", rssi_raw[i], rssi_smooth[i]);
    } else {
      std::fputs(",,", out);
    }
    std::fputc('\n', out);
  }
  if (std::fclose(out) != 0) {
    throw io_error("process: write failed for " + args.out_path);
  }

  json report{{"command", "process"},
              {"in", args.in_path},
              {"out", args.out_path},
              {"window", args.window},
              {"aggregate", args.aggregate},
              {"rows", rows},
              {"cfr_present", have_cfr},
              {"rssi_present", have_rssi},
              {"elapsed_ms", elapsed_ms(t_start)}};
  std::cout << report.dump(2) << "\n";
  std::cerr << "wrote " << rows << " rows to " << args.out_path << "\n";
  return kExitOk;
}

// ---- detect -----------------------------------------------------------------

struct DetectArgs {
  std::string in_path;
  std::string mode;
  std::string stream{"auto"};
  std::string aggregate{"max_variance"};
  std::optional<std::size_t> window;
  DetectorParams params{};
};

int cmd_detect(const DetectArgs& args) {
  const auto t_read = std::chrono::steady_clock::now();
  const Trace trace = read_trace_file(args.in_path, format_for_path(args.in_path));
  const double read_ms = elapsed_ms(t_read);

  const bool respiration = args.mode == "respiration";
  // Respiration rides the 1 s smoother; motion energy lives in the
  // sample-to-sample differences a long smoother would flatten, and the
  // detector already averages energy over 1 s internally.
  const std::size_t window = args.window.value_or(respiration ? 100 : 1);

  std::string stream = args.stream;
  if (stream == "auto") {
    stream = trace.cfr_frames.empty() ? "rssi" : "cfr";
  }
  const auto t_prep = std::chrono::steady_clock::now();
  std::vector<double> raw;
  if (stream == "cfr") {
    raw = aggregate_amplitude(trace, parse_aggregate(args.aggregate));
  } else if (stream == "rssi") {
    if (trace.rssi_samples.empty()) {
      throw io_error("detect: trace has no RSSI stream");
    }
    raw = rssi_series(trace);
  } else {
    throw config_error("detect: stream must be auto, cfr, or rssi");
  }
  const std::vector<double> smooth = smooth_series(raw, window);
  const double prep_ms = elapsed_ms(t_prep);

  const auto t_detect = std::chrono::steady_clock::now();
  json report{{"command", "detect"},
              {"in", args.in_path},
              {"mode", args.mode},
              {"stream", stream},
              {"window", window},
              {"aggregate", args.aggregate},
              {"params",
               {{"flat_var_threshold", args.params.flat_var_threshold},
                {"min_hold_s", args.params.min_hold_s},
                {"motion_energy_threshold", args.params.motion_energy_threshold},
                {"hysteresis_ratio", args.params.hysteresis_ratio},
                {"min_peak_distance_s", args.params.min_peak_distance_s},
                {"min_prominence", args.params.min_prominence}}}};

  std::vector<EventInterval> events;
  int exit_code = kExitOk;
  if (respiration) {
    events = detect_breath_holds(smooth, trace.sample_rate_hz, args.params);

    // Rate the subject's actual breathing: holds would dilute the
    // peak-spacing estimate, so measure the longest hold-free stretch.
    std::size_t seg_lo = 0, seg_hi = 0;
    std::size_t prev = 0;
    auto consider = [&](std::size_t lo, std::size_t hi) {
      if (hi > lo && hi - lo > seg_hi - seg_lo) {
        seg_lo = lo;
        seg_hi = hi;
      }
    };
    for (const auto& hold : events) {
      const auto lo = static_cast<std::size_t>(std::llround(hold.start_s * trace.sample_rate_hz));
      const auto hi = static_cast<std::size_t>(std::llround(hold.end_s * trace.sample_rate_hz));
      consider(prev, std::min(lo, smooth.size()));
      prev = std::max(prev, std::min(hi, smooth.size()));
    }
    consider(prev, smooth.size());
    if (seg_hi == seg_lo) {  // fully covered by holds: fall back to everything
      seg_lo = 0;
      seg_hi = smooth.size();
    }

    try {
      const double rate = estimate_respiration_rate(
          std::span<const double>(smooth).subspan(seg_lo, seg_hi - seg_lo), trace.sample_rate_hz,
          args.params);
      report["rate_hz"] = rate;
      report["rate_bpm"] = rate * 60.0;
      report["rate_segment_s"] = {static_cast<double>(seg_lo) / trace.sample_rate_hz,
                                  static_cast<double>(seg_hi) / trace.sample_rate_hz};
      std::cerr << "respiration rate: " << rate << " Hz (" << rate * 60.0 << " breaths/min)\n";
    } catch (const no_periodicity_error& e) {
      report["rate_hz"] = nullptr;
      report["error"] = e.what();
      std::cerr << "no periodic breathing found: " << e.what() << "\n";
      exit_code = kExitNoDetection;
    }
  } else if (args.mode == "motion") {
    events = detect_motion(smooth, trace.sample_rate_hz, args.params);
  } else {
    throw config_error("detect: mode must be respiration or motion");
  }
  const double detect_ms = elapsed_ms(t_detect);

  json events_json = json::array();
  for (const auto& e : events) {
    events_json.push_back(event_to_json(e));
    std::cerr << (e.kind == EventKind::breath_hold ? "breath hold" : "motion") << " ["
              << e.start_s << ", " << e.end_s << "] s (score " << e.score << ")\n";
  }
  if (events.empty()) {
    std::cerr << "no " << (respiration ? "breath-hold" : "motion") << " events\n";
  }
  report["events"] = events_json;
  report["timings_ms"] = {{"read", read_ms}, {"prepare", prep_ms}, {"detect", detect_ms}};
  std::cout << report.dump(2) << "\n";
  return exit_code;
}

// ---- compare-bands ----------------------------------------------------------

struct CompareArgs {
  std::string scenario_path;
  std::uint64_t seed{0};
  std::size_t num_paths{50};
};

int cmd_compare_bands(const CompareArgs& args) {
  const Scenario scenario = load_scenario(args.scenario_path);
  if (scenario.kind != Scenario::Kind::respiration) {
    throw config_error("compare-bands: scenario kind must be respiration");
  }
  if (args.num_paths == 0) {
    throw config_error("compare-bands: num-paths must be at least 1");
  }

  // Fluctuation is compared noiselessly: peak-to-peak is what the band
  // changes, and noise would swamp it at random.
  ChannelModel channel = scenario.channel;
  channel.noise_snr_db.reset();
  channel.rng_seed = args.seed;

  std::mt19937_64 rng(args.seed);
  std::uniform_real_distribution<double> path_length_m(1.5, 6.0);

  const SubcarrierGrid grid_low = default_grid(2.4e9);
  const SubcarrierGrid grid_high = default_grid(6.0e9);

  double ratio_sum = 0.0;
  double pp_low_sum = 0.0;
  double pp_high_sum = 0.0;
  for (std::size_t i = 0; i < args.num_paths; ++i) {
    channel.static_path_length_m = path_length_m(rng);
    const Trace low = synthesize_respiration(scenario.respiration, channel, grid_low,
                                             scenario.sample_rate_hz);
    const Trace high = synthesize_respiration(scenario.respiration, channel, grid_high,
                                              scenario.sample_rate_hz);
    const std::vector<double> series_low = aggregate_amplitude(low, AggregateMethod::max_variance());
    const std::vector<double> series_high =
        aggregate_amplitude(high, AggregateMethod::max_variance());
    try {
      ratio_sum += band_sensitivity_ratio(series_low, series_high);
    } catch (const std::invalid_argument& e) {
      throw config_error(std::string("compare-bands: ") + e.what() +
                         " (does the scenario move the chest at all?)");
    }
    const auto [lo_l, hi_l] = std::minmax_element(series_low.begin(), series_low.end());
    const auto [lo_h, hi_h] = std::minmax_element(series_high.begin(), series_high.end());
    pp_low_sum += *hi_l - *lo_l;
    pp_high_sum += *hi_h - *lo_h;
  }

  const double mean_ratio = ratio_sum / static_cast<double>(args.num_paths);
  const double excursion_low = respiration_phase_excursion(2.4e9, scenario.respiration.chest_amplitude_m);
  const double excursion_high = respiration_phase_excursion(6.0e9, scenario.respiration.chest_amplitude_m);

  json report{{"command", "compare-bands"},
              {"scenario", args.scenario_path},
              {"seed", args.seed},
              {"num_paths", args.num_paths},
              {"bands", {"2.4GHz", "6GHz"}},
              {"mean_peak_to_peak", {{"2.4GHz", pp_low_sum / static_cast<double>(args.num_paths)},
                                     {"6GHz", pp_high_sum / static_cast<double>(args.num_paths)}}},
              {"mean_band_sensitivity_ratio", mean_ratio},
              {"phase_excursion_rad", {{"2.4GHz", excursion_low}, {"6GHz", excursion_high}}},
              {"phase_excursion_ratio", excursion_high / excursion_low}};
  std::cout << report.dump(2) << "\n";
  std::cerr << "mean peak-to-peak ratio 6GHz/2.4GHz over " << args.num_paths
            << " path lengths: " << mean_ratio << "\n"
            << "closed-form phase excursion ratio: " << excursion_high / excursion_low << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wi-Fi channel-response sensing toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Synthesize a trace from a scenario file");
  sim_cmd->add_option("--scenario", sim_args.scenario_path, "Scenario JSON file")->required();
  sim_cmd->add_option("--out", sim_args.out_path, "Output trace (.csv for text, else binary)")
      ->required();
  sim_cmd->add_option("--band", sim_args.band, "Carrier band")
      ->check(CLI::IsMember({"2.4GHz", "6GHz"}))
      ->capture_default_str();
  sim_cmd->add_option("--seed", sim_args.seed, "RNG seed (required: runs must be reproducible)")
      ->required();

  ProcessArgs proc_args;
  auto* proc_cmd = app.add_subcommand("process", "Turn a trace into plot-ready CSV");
  proc_cmd->add_option("--in", proc_args.in_path, "Input trace")->required();
  proc_cmd->add_option("--out", proc_args.out_path, "Output CSV")->required();
  proc_cmd->add_option("--window", proc_args.window, "Moving-average window length (samples)")
      ->capture_default_str();
  proc_cmd->add_option("--aggregate", proc_args.aggregate,
                       "CFR aggregation: mean, max_variance, or single:<k>")
      ->capture_default_str();

  DetectArgs det_args;
  auto* det_cmd = app.add_subcommand("detect", "Run a detector over a trace");
  det_cmd->add_option("--in", det_args.in_path, "Input trace")->required();
  det_cmd->add_option("--mode", det_args.mode, "respiration or motion")
      ->check(CLI::IsMember({"respiration", "motion"}))
      ->required();
  det_cmd->add_option("--stream", det_args.stream, "auto, cfr, or rssi")->capture_default_str();
  det_cmd->add_option("--aggregate", det_args.aggregate,
                      "CFR aggregation: mean, max_variance, or single:<k>")
      ->capture_default_str();
  std::size_t window_override = 0;
  auto* window_opt = det_cmd->add_option("--window", window_override,
                                         "Smoothing window (default: 100 for respiration, 1 for motion)");
  det_cmd->add_option("--flat-var-threshold", det_args.params.flat_var_threshold,
                      "Breath-hold variance threshold (fraction of baseline)")
      ->capture_default_str();
  det_cmd->add_option("--min-hold-s", det_args.params.min_hold_s, "Minimum breath-hold length")
      ->capture_default_str();
  det_cmd->add_option("--motion-threshold", det_args.params.motion_energy_threshold,
                      "Motion threshold on the 1 s sliding variance")
      ->capture_default_str();
  det_cmd->add_option("--hysteresis", det_args.params.hysteresis_ratio, "Hysteresis ratio (0, 1)")
      ->capture_default_str();
  det_cmd->add_option("--min-peak-distance", det_args.params.min_peak_distance_s,
                      "Minimum breathing peak spacing (s)")
      ->capture_default_str();
  det_cmd->add_option("--min-prominence", det_args.params.min_prominence,
                      "Peak prominence (fraction of peak-to-peak)")
      ->capture_default_str();

  CompareArgs cmp_args;
  auto* cmp_cmd = app.add_subcommand("compare-bands",
                                     "Compare 2.4 GHz vs 6 GHz sensitivity on one scenario");
  cmp_cmd->add_option("--scenario", cmp_args.scenario_path, "Respiration scenario JSON file")
      ->required();
  cmp_cmd->add_option("--seed", cmp_args.seed, "RNG seed for the path-length sweep")->required();
  cmp_cmd->add_option("--num-paths", cmp_args.num_paths, "Static path lengths to average over")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (sim_cmd->parsed()) {
      return cmd_simulate(sim_args);
    }
    if (proc_cmd->parsed()) {
      return cmd_process(proc_args);
    }
    if (det_cmd->parsed()) {
      if (window_opt->count() > 0) {
        det_args.window = window_override;
      }
      return cmd_detect(det_args);
    }
    if (cmp_cmd->parsed()) {
      return cmd_compare_bands(cmp_args);
    }
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const no_periodicity_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoDetection;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
