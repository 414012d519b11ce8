// End-to-end tests that drive the installed CLI binary the way a user
// would: each case shells out, captures stdout, and checks the exit
// code and the JSON report. The binary path and the scenario directory
// come in as compile definitions from the build.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavesense/trace_io.hpp"
#include "wavesense/types.hpp"

using nlohmann::json;
using namespace wavesense;

namespace {

struct RunResult {
  int exit_code{-1};
  std::string out;
};

// Runs a shell command, captures stdout, returns the exit code. Stderr
// is dropped so human-readable chatter cannot upset JSON parsing.
RunResult run(const std::string& args) {
  const std::string command = std::string(WAVESENSE_CLI_PATH) + " " + args + " 2>/dev/null";
  std::FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  char buffer[4096];
  std::size_t n = 0;
  while ((n = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) {
    result.out.append(buffer, n);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::filesystem::path scenario(const std::string& name) {
  return std::filesystem::path(WAVESENSE_SCENARIO_DIR) / name;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string q(const std::filesystem::path& path) { return "\"" + path.string() + "\""; }

struct TempFiles {
  std::vector<std::filesystem::path> paths;
  std::filesystem::path add(const std::string& name) {
    paths.push_back(temp_file(name));
    return paths.back();
  }
  ~TempFiles() {
    for (const auto& p : paths) {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
  }
};

}  // namespace

TEST_CASE("simulate is reproducible for a fixed seed") {
  TempFiles tmp;
  const auto out_a = tmp.add("cli_sim_a.wvt");
  const auto out_b = tmp.add("cli_sim_b.wvt");
  const auto out_c = tmp.add("cli_sim_c.wvt");
  const std::string base = "simulate --scenario " + q(scenario("respiration.json")) + " --seed 42";

  REQUIRE(run(base + " --out " + q(out_a)).exit_code == 0);
  REQUIRE(run(base + " --out " + q(out_b)).exit_code == 0);
  CHECK(slurp(out_a) == slurp(out_b));

  REQUIRE(run("simulate --scenario " + q(scenario("respiration.json")) + " --seed 43 --out " +
              q(out_c))
              .exit_code == 0);
  CHECK(slurp(out_a) != slurp(out_c));
}

TEST_CASE("simulate honors the band flag") {
  TempFiles tmp;
  const auto out = tmp.add("cli_sim_band.wvt");
  const RunResult r = run("simulate --scenario " + q(scenario("motion.json")) +
                          " --seed 7 --band 6GHz --out " + q(out));
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.out);
  CHECK(report["band"] == "6GHz");
  const Trace trace = read_trace_file(out, TraceFormat::binary);
  CHECK(trace.grid.center_frequency_hz == 6.0e9);
  CHECK(trace.cfr_frames.size() == report["frames"].get<std::size_t>());
}

TEST_CASE("simulate can write text traces") {
  TempFiles tmp;
  const auto out = tmp.add("cli_sim_text.csv");
  REQUIRE(run("simulate --scenario " + q(scenario("motion.json")) + " --seed 9 --out " + q(out))
              .exit_code == 0);
  const Trace trace = read_trace_file(out, TraceFormat::csv);
  CHECK(trace.cfr_frames.size() == 4000);  // 40 s at 100 Hz
  CHECK(trace.sample_rate_hz == doctest::Approx(100.0).epsilon(1e-6));
}

TEST_CASE("usage errors exit with the configuration code") {
  TempFiles tmp;
  const auto out = tmp.add("cli_usage.wvt");

  SUBCASE("missing required --seed") {
    CHECK(run("simulate --scenario " + q(scenario("respiration.json")) + " --out " + q(out))
              .exit_code == 2);
    CHECK_FALSE(std::filesystem::exists(out));
  }

  SUBCASE("unknown band") {
    CHECK(run("simulate --scenario " + q(scenario("respiration.json")) +
              " --seed 1 --band 5GHz --out " + q(out))
              .exit_code == 2);
  }

  SUBCASE("unknown subcommand") {
    CHECK(run("transmogrify").exit_code == 2);
  }

  SUBCASE("malformed scenario file") {
    const auto bad = tmp.add("cli_bad_scenario.json");
    std::ofstream(bad) << "{ \"schema_version\": 1, \"kind\": \"respiration\" ";  // truncated
    CHECK(run("simulate --scenario " + q(bad) + " --seed 1 --out " + q(out)).exit_code == 2);
    CHECK_FALSE(std::filesystem::exists(out));
  }
}

TEST_CASE("a missing input file exits with the IO code") {
  CHECK(run("detect --in /nonexistent/trace.wvt --mode motion").exit_code == 4);
  CHECK(run("process --in /nonexistent/trace.wvt --out /tmp/x.csv").exit_code == 4);
}

TEST_CASE("process writes the five-column series") {
  TempFiles tmp;
  const auto trace_path = tmp.add("cli_proc_in.wvt");
  const auto csv_path = tmp.add("cli_proc_out.csv");
  REQUIRE(run("simulate --scenario " + q(scenario("respiration.json")) + " --seed 3 --out " +
              q(trace_path))
              .exit_code == 0);

  const RunResult r = run("process --in " + q(trace_path) + " --out " + q(csv_path) +
                          " --window 1 --aggregate single:0");
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.out);
  CHECK(report["rows"] == 17000);  // 170 s at 100 Hz
  CHECK(report["cfr_present"] == true);
  CHECK(report["rssi_present"] == true);

  std::ifstream csv(csv_path);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t_s,cfr_raw,cfr_smooth,rssi_raw,rssi_smooth");

  // Window 1 means smoothed equals raw, and the values must match an
  // in-process recomputation.
  const Trace trace = read_trace_file(trace_path, TraceFormat::binary);
  std::string line;
  std::size_t i = 0;
  while (std::getline(csv, line) && i < 50) {
    double t, cfr_raw, cfr_smooth, rssi_raw, rssi_smooth;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &t, &cfr_raw, &cfr_smooth, &rssi_raw,
                        &rssi_smooth) == 5);
    CHECK(cfr_smooth == doctest::Approx(cfr_raw).epsilon(1e-12));
    CHECK(cfr_raw == doctest::Approx(std::abs(trace.cfr_frames[i].gains[0])).epsilon(1e-8));
    CHECK(rssi_raw == doctest::Approx(trace.rssi_samples[i].rssi_db).epsilon(1e-12));
    CHECK(rssi_smooth == doctest::Approx(rssi_raw).epsilon(1e-12));
    ++i;
  }
  CHECK(i == 50);
}

TEST_CASE("process tolerates a trace without RSSI") {
  TempFiles tmp;
  const auto trace_path = tmp.add("cli_proc_norssi.wvt");
  const auto csv_path = tmp.add("cli_proc_norssi.csv");

  Trace trace;
  trace.grid.num_subcarriers = 3;
  trace.sample_rate_hz = 100.0;
  for (int i = 0; i < 200; ++i) {
    CfrFrame frame;
    frame.timestamp_s = i / 100.0;
    frame.gains = {{1.0, 0.0}, {0.5, 0.5}, {0.25, 0.0}};
    trace.cfr_frames.push_back(frame);
  }
  write_trace_file(trace, trace_path, TraceFormat::binary);

  const RunResult r = run("process --in " + q(trace_path) + " --out " + q(csv_path));
  CHECK(r.exit_code == 0);
  const json report = json::parse(r.out);
  CHECK(report["rssi_present"] == false);
  std::ifstream csv(csv_path);
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(row.substr(row.size() - 2) == ",,");  // empty RSSI columns
}

TEST_CASE("detect respiration reports the rate and both holds") {
  TempFiles tmp;
  const auto trace_path = tmp.add("cli_detect_resp.wvt");
  REQUIRE(run("simulate --scenario " + q(scenario("respiration.json")) + " --seed 12 --out " +
              q(trace_path))
              .exit_code == 0);

  const RunResult r = run("detect --in " + q(trace_path) + " --mode respiration");
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.out);
  CHECK(report["mode"] == "respiration");
  CHECK(report["stream"] == "cfr");
  CHECK(report["window"] == 100);
  CHECK(report["aggregate"] == "max_variance");

  const double rate = report["rate_hz"].get<double>();
  CHECK(rate == doctest::Approx(0.25).epsilon(0.05));

  REQUIRE(report["events"].size() == 2);
  for (const auto& event : report["events"]) {
    CHECK(event["kind"] == "breath_hold");
  }
  CHECK(std::abs(report["events"][0]["start_s"].get<double>() - 60.0) <= 1.0);
  CHECK(std::abs(report["events"][0]["end_s"].get<double>() - 100.0) <= 1.0);
  CHECK(std::abs(report["events"][1]["start_s"].get<double>() - 130.0) <= 1.0);
}

TEST_CASE("detect exits with the no-detection code when nothing breathes") {
  TempFiles tmp;
  const auto scenario_path = tmp.add("cli_flat_scenario.json");
  const auto trace_path = tmp.add("cli_flat_trace.wvt");
  std::ofstream(scenario_path) << R"({
    "schema_version": 1,
    "kind": "respiration",
    "channel": {
      "los_gain": [1.0, 0.0],
      "reflected_gain_magnitude": 0.3,
      "static_path_length_m": 2.2,
      "noise_snr_db": "noiseless"
    },
    "respiration": {
      "breath_rate_hz": 0.25,
      "chest_amplitude_m": 0.0,
      "duration_s": 60.0,
      "hold_intervals": []
    }
  })";
  REQUIRE(run("simulate --scenario " + q(scenario_path) + " --seed 1 --out " + q(trace_path))
              .exit_code == 0);

  const RunResult r = run("detect --in " + q(trace_path) + " --mode respiration");
  CHECK(r.exit_code == 3);
  const json report = json::parse(r.out);
  CHECK(report["rate_hz"].is_null());
  CHECK(report.contains("error"));
}

TEST_CASE("detect motion finds the walk in the bundled scenario") {
  TempFiles tmp;
  const auto trace_path = tmp.add("cli_detect_motion.wvt");
  REQUIRE(run("simulate --scenario " + q(scenario("motion.json")) + " --seed 21 --out " +
              q(trace_path))
              .exit_code == 0);

  const RunResult r = run("detect --in " + q(trace_path) + " --mode motion");
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.out);
  CHECK(report["aggregate"] == "max_variance");
  CHECK(report["window"] == 1);
  REQUIRE(report["events"].size() == 1);
  const auto& event = report["events"][0];
  CHECK(event["kind"] == "motion");
  CHECK(std::abs(event["start_s"].get<double>() - 10.0) <= 1.5);
  CHECK(std::abs(event["end_s"].get<double>() - 30.0) <= 1.5);
}

TEST_CASE("detect refuses the RSSI stream when the trace lacks it") {
  TempFiles tmp;
  const auto trace_path = tmp.add("cli_detect_norssi.wvt");
  Trace trace;
  trace.grid.num_subcarriers = 2;
  trace.sample_rate_hz = 100.0;
  for (int i = 0; i < 1200; ++i) {
    CfrFrame frame;
    frame.timestamp_s = i / 100.0;
    frame.gains = {{1.0, 0.0}, {1.0, 0.0}};
    trace.cfr_frames.push_back(frame);
  }
  write_trace_file(trace, trace_path, TraceFormat::binary);
  CHECK(run("detect --in " + q(trace_path) + " --mode motion --stream rssi").exit_code == 4);
}

TEST_CASE("compare-bands favors the higher band") {
  const RunResult r =
      run("compare-bands --scenario " + q(scenario("respiration.json")) + " --seed 5");
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.out);
  CHECK(report["num_paths"] == 50);
  CHECK(report["mean_band_sensitivity_ratio"].get<double>() > 1.0);
  CHECK(report["phase_excursion_ratio"].get<double>() == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(report["mean_peak_to_peak"]["6GHz"].get<double>() >
        report["mean_peak_to_peak"]["2.4GHz"].get<double>());
}

TEST_CASE("compare-bands rejects a motionless chest") {
  TempFiles tmp;
  const auto scenario_path = tmp.add("cli_cmp_flat.json");
  std::ofstream(scenario_path) << R"({
    "schema_version": 1,
    "kind": "respiration",
    "channel": {
      "los_gain": [1.0, 0.0],
      "reflected_gain_magnitude": 0.3,
      "static_path_length_m": 2.2,
      "noise_snr_db": null
    },
    "respiration": {
      "breath_rate_hz": 0.25,
      "chest_amplitude_m": 0.0,
      "duration_s": 20.0,
      "hold_intervals": []
    }
  })";
  CHECK(run("compare-bands --scenario " + q(scenario_path) + " --seed 2 --num-paths 3")
            .exit_code == 2);
}

TEST_CASE("compare-bands only accepts respiration scenarios") {
  CHECK(run("compare-bands --scenario " + q(scenario("motion.json")) + " --seed 1").exit_code ==
        2);
}

TEST_CASE("detect accepts single-subcarrier aggregation but rejects bad indices") {
  TempFiles tmp;
  const auto trace_path = tmp.add("cli_detect_single.wvt");
  REQUIRE(run("simulate --scenario " + q(scenario("respiration.json")) + " --seed 30 --out " +
              q(trace_path))
              .exit_code == 0);
  CHECK(run("detect --in " + q(trace_path) + " --mode respiration --aggregate single:999")
            .exit_code == 2);
  CHECK(run("detect --in " + q(trace_path) + " --mode respiration --aggregate nonsense")
            .exit_code == 2);
}
