#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "wavesense/detect.hpp"
#include "wavesense/dsp.hpp"
#include "wavesense/errors.hpp"
#include "wavesense/sim.hpp"
#include "wavesense/types.hpp"

using namespace wavesense;

namespace {

std::vector<double> sinusoid(double freq_hz, double fs, double duration_s, double amplitude = 1.0,
                             double offset = 0.0, double phase = 0.0) {
  const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * fs));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    out[i] = offset + amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * t + phase);
  }
  return out;
}

std::vector<double> respiration_amplitude(const RespirationScenario& scenario, double snr_db,
                                          std::uint64_t seed, double fs = 100.0) {
  ChannelModel channel;
  channel.noise_snr_db = snr_db;
  channel.rng_seed = seed;
  SubcarrierGrid grid;  // 2.4 GHz defaults
  const Trace trace = synthesize_respiration(scenario, channel, grid, fs);
  return smooth_series(aggregate_amplitude(trace, AggregateMethod::max_variance()), 100);
}

}  // namespace

TEST_CASE("a constant series has no periodicity") {
  const std::vector<double> flat(3000, 1.25);
  CHECK_THROWS_AS(estimate_respiration_rate(flat, 100.0), no_periodicity_error);
}

TEST_CASE("a single bump has no periodicity") {
  std::vector<double> series(2000, 0.0);
  for (std::size_t i = 900; i < 1100; ++i) {
    series[i] = std::sin(std::numbers::pi * static_cast<double>(i - 900) / 200.0);
  }
  CHECK_THROWS_AS(estimate_respiration_rate(series, 100.0), no_periodicity_error);
}

TEST_CASE("rate of a clean sinusoid") {
  const auto series = sinusoid(0.2, 100.0, 60.0);
  const double rate = estimate_respiration_rate(series, 100.0);
  CHECK(rate == doctest::Approx(0.2).epsilon(0.02));
}

TEST_CASE("rate estimation is invariant under scale and offset") {
  const auto base = sinusoid(0.3, 50.0, 40.0);
  std::vector<double> transformed(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    transformed[i] = 250.0 * base[i] + 1000.0;
  }
  const double r1 = estimate_respiration_rate(base, 50.0);
  const double r2 = estimate_respiration_rate(transformed, 50.0);
  CHECK(r1 == doctest::Approx(r2).epsilon(1e-12));
}

TEST_CASE("rate survives the full synthesis and smoothing pipeline") {
  RespirationScenario scenario;
  scenario.breath_rate_hz = 0.25;
  scenario.duration_s = 60.0;
  const auto series = respiration_amplitude(scenario, 20.0, 11);
  const double rate = estimate_respiration_rate(series, 100.0);
  CHECK(rate == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("small wiggles below the prominence floor do not count as peaks") {
  // A 0.2 Hz breath with a 5% ripple at 2 Hz: the ripple peaks fail the
  // 20% prominence requirement and the distance filter.
  auto series = sinusoid(0.2, 100.0, 60.0);
  const auto ripple = sinusoid(2.0, 100.0, 60.0, 0.05);
  for (std::size_t i = 0; i < series.size(); ++i) {
    series[i] += ripple[i];
  }
  const double rate = estimate_respiration_rate(series, 100.0);
  CHECK(rate == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("steady breathing contains no holds") {
  const auto series = sinusoid(0.25, 100.0, 120.0, 0.1, 1.0);
  CHECK(detect_breath_holds(series, 100.0).empty());
}

TEST_CASE("breath holds are found with accurate boundaries") {
  RespirationScenario scenario;
  scenario.breath_rate_hz = 0.25;
  scenario.duration_s = 170.0;
  scenario.hold_intervals = {{60.0, 100.0}, {130.0, 170.0}};
  const auto series = respiration_amplitude(scenario, 20.0, 3);
  const auto events = detect_breath_holds(series, 100.0);
  REQUIRE(events.size() == 2);
  CHECK(events[0].kind == EventKind::breath_hold);
  CHECK(std::abs(events[0].start_s - 60.0) <= 1.0);
  CHECK(std::abs(events[0].end_s - 100.0) <= 1.0);
  CHECK(std::abs(events[1].start_s - 130.0) <= 1.0);
  // The trace ends inside the second hold.
  CHECK(events[1].end_s ==
        doctest::Approx(static_cast<double>(series.size()) / 100.0).epsilon(0.01));
  for (const auto& e : events) {
    CHECK(e.score > 0.0);
    CHECK(e.score <= 1.0);
  }
}

TEST_CASE("a flat tail after breathing is reported as one hold") {
  auto series = sinusoid(0.25, 100.0, 30.0, 0.1, 1.0);
  const std::vector<double> tail(2000, series.back());
  series.insert(series.end(), tail.begin(), tail.end());  // 20 s flat
  const auto events = detect_breath_holds(series, 100.0);
  REQUIRE(events.size() == 1);
  CHECK(std::abs(events[0].start_s - 30.0) <= 1.0);
  CHECK(events[0].end_s == doctest::Approx(50.0).epsilon(0.01));
}

TEST_CASE("hold detection is invariant under scale and offset") {
  RespirationScenario scenario;
  scenario.duration_s = 80.0;
  scenario.hold_intervals = {{40.0, 60.0}};
  const auto series = respiration_amplitude(scenario, 25.0, 7);
  std::vector<double> transformed(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    transformed[i] = -3.0 * series[i] + 50.0;
  }
  const auto a = detect_breath_holds(series, 100.0);
  const auto b = detect_breath_holds(transformed, 100.0);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].start_s == doctest::Approx(b[i].start_s).epsilon(1e-9));
    CHECK(a[i].end_s == doctest::Approx(b[i].end_s).epsilon(1e-9));
  }
}

TEST_CASE("short series cannot calibrate a hold baseline") {
  const auto series = sinusoid(0.25, 100.0, 5.0);  // < 10 s
  CHECK_THROWS_AS(detect_breath_holds(series, 100.0), std::invalid_argument);
}

TEST_CASE("holds shorter than the minimum are ignored") {
  RespirationScenario scenario;
  scenario.duration_s = 60.0;
  scenario.hold_intervals = {{30.0, 35.0}};  // 5 s < default 10 s minimum
  const auto series = respiration_amplitude(scenario, 25.0, 2);
  CHECK(detect_breath_holds(series, 100.0).empty());
}

namespace {

std::vector<double> motion_series(const MotionScenario& scenario, std::uint64_t seed,
                                  double fs = 100.0) {
  ChannelModel channel;
  channel.static_path_length_m = 3.0;
  channel.noise_snr_db = 20.0;
  channel.rng_seed = seed;
  SubcarrierGrid grid;
  const Trace trace = synthesize_motion(scenario, channel, grid, fs);
  return aggregate_amplitude(trace, AggregateMethod::max_variance());
}

}  // namespace

TEST_CASE("a constant series contains no motion") {
  const std::vector<double> flat(2000, 1.0);
  CHECK(detect_motion(flat, 100.0).empty());
  CHECK(detect_motion(std::vector<double>{}, 100.0).empty());
}

TEST_CASE("noise alone stays under the motion threshold") {
  MotionScenario scenario;
  scenario.waypoints = {{1.5, 2.0}, {1.5, 2.0}};  // parked
  scenario.duration_s = 20.0;
  const auto series = motion_series(scenario, 17);
  CHECK(detect_motion(series, 100.0).empty());
}

TEST_CASE("still-walk-still produces one interval with accurate edges") {
  MotionScenario scenario;
  scenario.tx_position = {0.0, 0.0};
  scenario.rx_position = {3.0, 0.0};
  scenario.waypoints = {{1.5, 2.0}, {1.5, 12.0}};
  scenario.speed_mps = 0.5;
  scenario.dwell_s = 10.0;  // still for 10 s, walk 20 s, still for 10 s
  scenario.duration_s = 40.0;
  const auto series = motion_series(scenario, 23);
  const auto events = detect_motion(series, 100.0);
  REQUIRE(events.size() == 1);
  CHECK(events[0].kind == EventKind::motion);
  CHECK(std::abs(events[0].start_s - 10.0) <= 1.5);
  CHECK(std::abs(events[0].end_s - 30.0) <= 1.5);
  CHECK(events[0].score > 0.0);
}

TEST_CASE("two walks separated by a dwell give two intervals") {
  MotionScenario scenario;
  scenario.tx_position = {0.0, 0.0};
  scenario.rx_position = {3.0, 0.0};
  scenario.waypoints = {{1.5, 2.0}, {1.5, 12.0}, {1.5, 2.0}};
  scenario.speed_mps = 0.5;
  scenario.dwell_s = 15.0;  // still 15, walk 20, still 15, walk 20, still
  scenario.duration_s = 100.0;
  const auto series = motion_series(scenario, 29);
  const auto events = detect_motion(series, 100.0);
  REQUIRE(events.size() == 2);
  CHECK(std::abs(events[0].start_s - 15.0) <= 1.5);
  CHECK(std::abs(events[0].end_s - 35.0) <= 1.5);
  CHECK(std::abs(events[1].start_s - 50.0) <= 1.5);
  CHECK(std::abs(events[1].end_s - 70.0) <= 1.5);
}

TEST_CASE("motion detection is invariant under a constant offset") {
  MotionScenario scenario;
  scenario.waypoints = {{1.5, 2.0}, {1.5, 8.0}};
  scenario.speed_mps = 0.5;
  scenario.dwell_s = 5.0;
  scenario.duration_s = 25.0;
  const auto series = motion_series(scenario, 31);
  std::vector<double> shifted(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    shifted[i] = series[i] + 123.0;
  }
  const auto a = detect_motion(series, 100.0);
  const auto b = detect_motion(shifted, 100.0);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].start_s == doctest::Approx(b[i].start_s).epsilon(1e-9));
    CHECK(a[i].end_s == doctest::Approx(b[i].end_s).epsilon(1e-9));
  }
}

TEST_CASE("event intervals are ordered, disjoint, and inside the series span") {
  MotionScenario scenario;
  scenario.waypoints = {{1.5, 2.0}, {1.5, 10.0}, {1.5, 2.0}};
  scenario.speed_mps = 1.0;
  scenario.dwell_s = 8.0;
  scenario.duration_s = 50.0;
  const auto series = motion_series(scenario, 37);
  const auto events = detect_motion(series, 100.0);
  const double span_s = static_cast<double>(series.size()) / 100.0;
  double prev_end = 0.0;
  for (const auto& e : events) {
    CHECK(e.start_s >= prev_end);
    CHECK(e.end_s > e.start_s);
    CHECK(e.end_s <= span_s + 1e-9);
    prev_end = e.end_s;
  }
}

TEST_CASE("band sensitivity ratio") {
  const auto low = sinusoid(0.25, 50.0, 20.0, 0.2, 1.0);
  const auto high = sinusoid(0.25, 50.0, 20.0, 0.5, 1.0);

  SUBCASE("measures the peak-to-peak quotient") {
    CHECK(band_sensitivity_ratio(low, high) == doctest::Approx(2.5).epsilon(1e-9));
  }

  SUBCASE("identical series give exactly one") {
    CHECK(band_sensitivity_ratio(low, low) == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("rejects a flat low-band series") {
    const std::vector<double> flat(low.size(), 1.0);
    CHECK_THROWS_AS(band_sensitivity_ratio(flat, high), std::invalid_argument);
  }

  SUBCASE("rejects mismatched lengths and empty input") {
    const std::vector<double> shorter(low.begin(), low.end() - 5);
    CHECK_THROWS_AS(band_sensitivity_ratio(shorter, high), std::invalid_argument);
    CHECK_THROWS_AS(band_sensitivity_ratio(std::vector<double>{}, std::vector<double>{}),
                    std::invalid_argument);
  }
}

TEST_CASE("detector parameter validation") {
  DetectorParams params;
  CHECK_NOTHROW(params.validate());
  params.flat_var_threshold = 0.0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  params = DetectorParams{};
  params.hysteresis_ratio = 1.5;  // must be in (0, 1]
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  params = DetectorParams{};
  params.min_hold_s = -1.0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  params = DetectorParams{};
  params.min_prominence = 0.0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
}
