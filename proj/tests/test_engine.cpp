#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "entlink/engine.hpp"
#include "entlink/error.hpp"
#include "entlink/estimator.hpp"
#include "entlink/presets.hpp"
#include "stats.hpp"

using namespace entlink;

namespace {

ExperimentConfig reduced(PresetId id, std::uint64_t trials) {
  ExperimentConfig cfg = make_preset(id);
  cfg.n_trials = trials;
  if (cfg.fringe_trials_per_point) cfg.fringe_trials_per_point = trials;
  return cfg;
}

}  // namespace

TEST_CASE("zero trials give an empty log") {
  const EventLog log = run_g2_experiment(reduced(PresetId::SwG2, 0));
  CHECK(log.events.empty());
  CHECK(log.annotations.empty());
  CHECK(log.n_main_trials == 0);
  CHECK(log.n_noise_trials == 0);
}

TEST_CASE("g2 runs are deterministic and independent of thread count") {
  for (const PresetId id : {PresetId::AfcG2, PresetId::SwG2}) {
    const ExperimentConfig cfg = reduced(id, 200000);
    const EventLog a = run_g2_experiment(cfg, 1);
    const EventLog b = run_g2_experiment(cfg, 1);
    const EventLog c = run_g2_experiment(cfg, 3);
    CHECK(a == b);
    CHECK(a == c);
    CHECK_FALSE(a.events.empty());
    ExperimentConfig other = cfg;
    other.seed += 1;
    CHECK_FALSE(run_g2_experiment(other, 2).events == a.events);
  }
}

TEST_CASE("fringe scans are independent of thread count") {
  const ExperimentConfig cfg = reduced(PresetId::AfcFringe, 100000);
  const FringeScan a = run_fringe_scan(cfg, 1);
  const FringeScan b = run_fringe_scan(cfg, 4);
  REQUIRE(a.settings.size() == 2);
  for (std::size_t s = 0; s < 2; ++s) {
    CHECK(a.settings[s].counts == b.settings[s].counts);
    CHECK(a.settings[s].accidentals == b.settings[s].accidentals);
  }
  CHECK(a.settings[1].fixed_phase - a.settings[0].fixed_phase == doctest::Approx(0.5 * std::numbers::pi));
}

TEST_CASE("experiment kind must match the runner") {
  CHECK_THROWS_AS(run_g2_experiment(reduced(PresetId::AfcFringe, 10)), ConfigError);
  CHECK_THROWS_AS(run_fringe_scan(reduced(PresetId::AfcG2, 10)), ConfigError);
  CHECK_THROWS_AS(run_ts_sweep(reduced(PresetId::SwG2, 10)), ConfigError);
}

TEST_CASE("invalid configs list every bad field") {
  ExperimentConfig cfg = make_preset(PresetId::SwG2);
  cfg.detector_efficiency_signal = 2.0;
  cfg.detector_efficiency_idler = -1.0;
  try {
    validate(cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field_errors().size() == 2);
  }
  cfg = make_preset(PresetId::AfcFringe);
  cfg.phase_list.clear();
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("single-point sweep matches the direct spin-wave run") {
  ExperimentConfig sweep = reduced(PresetId::TsSweep, 300000);
  sweep.t_s_list = {6.9e-6};
  sweep.fringe_trials_per_point = 20000;
  const auto points = run_ts_sweep(sweep, 2);
  REQUIRE(points.size() == 1);
  ExperimentConfig direct = sweep;
  direct.experiment = ExperimentKind::SpinWaveG2;
  direct.t_s = 6.9e-6;
  const G2Estimate g = estimate_g2(run_g2_experiment(direct, 2), direct.memory.coincidence_window);
  CHECK(points[0].g2.g2 == g.g2);
  CHECK(points[0].g2.n_si == g.n_si);
  CHECK(points[0].fringe_fits.size() == 2);
}

TEST_CASE("fringe with a single phase point") {
  ExperimentConfig cfg = reduced(PresetId::AfcFringe, 1000000);
  cfg.phase_list = {0.0};
  const FringeScan at_zero = run_fringe_scan(cfg, 4);
  cfg.phase_list = {std::numbers::pi};
  const FringeScan at_pi = run_fringe_scan(cfg, 4);
  REQUIRE(at_zero.settings[0].counts.size() == 1);
  const double shift = at_zero.settings[0].fixed_phase;
  const double c0 = static_cast<double>(at_zero.settings[0].counts[0]);
  const double cpi = static_cast<double>(at_pi.settings[0].counts[0]);
  // Bright and dark port swap under a pi shift of the scanned arm.
  if (std::cos(shift) > 0.5) CHECK(c0 > cpi);
  if (std::cos(shift) < -0.5) CHECK(c0 < cpi);
  CHECK(c0 + cpi > 0.0);
}

TEST_CASE("input coincidence peak decays on the pair correlation time") {
  const ExperimentConfig cfg = reduced(PresetId::InputG2, 2000000);
  const EventLog log = run_g2_experiment(cfg, 4);
  const double bin = 20e-9;
  const CoincidenceHistogram h = build_histogram(log, bin, 1.2e-6, cfg.memory.coincidence_window);
  const std::size_t mid = h.counts.size() / 2;
  double bg = 0.0;
  int n_bg = 0;
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    const double x = 0.5 * (h.bin_edges[k] + h.bin_edges[k + 1]);
    if (std::abs(x) > 1.0e-6) {
      bg += static_cast<double>(h.counts[k]);
      ++n_bg;
    }
  }
  bg /= n_bg;
  double sum = 0.0, moment = 0.0;
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    const double x = 0.5 * (h.bin_edges[k] + h.bin_edges[k + 1]);
    if (std::abs(x) > 7 * 120e-9) continue;
    sum += static_cast<double>(h.counts[k]) - bg;
    moment += (static_cast<double>(h.counts[k]) - bg) * std::abs(x);
  }
  CHECK(h.counts[mid] > 10 * bg);
  // Mean |dt| of a Laplace peak is its 1/e half-width.
  CHECK(moment / sum == doctest::Approx(120e-9).epsilon(0.1));
}

TEST_CASE("spin-wave run without pairs yields no heralds") {
  ExperimentConfig cfg = reduced(PresetId::SwG2, 100000);
  cfg.source.mean_pairs_per_window = 0.0;
  const EventLog log = run_g2_experiment(cfg, 2);
  for (const auto& e : log.events) CHECK(e.channel == Channel::Signal);
  CHECK(log.n_noise_trials == 0);
  CHECK_THROWS_AS(estimate_g2(log, cfg.memory.coincidence_window), EstimateError);
}

TEST_CASE("spin-wave noise-only trials carry the control pulse noise rate") {
  ExperimentConfig cfg = reduced(PresetId::SwG2, 400000);
  const EventLog log = run_g2_experiment(cfg, 4);
  const std::uint64_t heralds = static_cast<std::uint64_t>(
      std::count_if(log.annotations.begin(), log.annotations.end(), [](const auto& a) { return a.heralded; }));
  CHECK(log.n_noise_trials == heralds * cfg.noise_trials_per_herald);
  std::uint64_t in_gate = 0;
  for (const auto& e : log.events) {
    if (e.trial_index < log.n_main_trials || e.channel != Channel::Signal) continue;
    const std::int64_t t = e.timestamp_ns - log.idler_gate_start_ns - log.signal_offset_ns;
    if (t >= 0 && t < log.herald_gate_ns) ++in_gate;
  }
  const double rate = static_cast<double>(in_gate) / static_cast<double>(log.n_noise_trials);
  CHECK(within_sigma(rate, cfg.memory.noise_per_trial, std::sqrt(cfg.memory.noise_per_trial / log.n_noise_trials)));
}

TEST_CASE("frame geometry") {
  const FrameGeometry afc = frame_geometry(make_preset(PresetId::AfcG2));
  CHECK(afc.signal_offset == doctest::Approx(10e-6));
  CHECK(afc.herald_gate == doctest::Approx(280e-9));
  const FrameGeometry sw = frame_geometry(make_preset(PresetId::SwG2));
  CHECK(sw.signal_offset == doctest::Approx(16.9e-6));
  CHECK(frame_geometry(make_preset(PresetId::InputG2)).signal_offset == 0.0);
}
