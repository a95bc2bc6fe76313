#include <doctest.h>

#include <cmath>

#include "entlink/engine.hpp"
#include "entlink/estimator.hpp"
#include "entlink/model.hpp"
#include "entlink/presets.hpp"
#include "entlink/source.hpp"
#include "stats.hpp"

using namespace entlink;

namespace {

// Triangular density of the birth-time difference of two pairs in one slot,
// integrated against the captured fraction of the delay distribution.
double overlap_oracle(double w, double tau, double shift) {
  const auto cdf = [tau](double t) { return t < 0.0 ? 0.5 * std::exp(t / tau) : 1.0 - 0.5 * std::exp(-t / tau); };
  const int n = 200000;
  const double du = 2.0 * w / n;
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    const double u = -w + (k + 0.5) * du;
    const double density = (w - std::abs(u)) / (w * w);
    total += density * (cdf(0.5 * w + shift - u) - cdf(-0.5 * w + shift - u)) * du;
  }
  return total;
}

ExperimentConfig reduced(PresetId id, std::uint64_t trials) {
  ExperimentConfig cfg = make_preset(id);
  cfg.n_trials = trials;
  if (cfg.fringe_trials_per_point) cfg.fringe_trials_per_point = trials;
  return cfg;
}

}  // namespace

TEST_CASE("same-slot overlap against direct integration") {
  for (double shift : {0.0, 100e-9, -420e-9, 1e-6}) {
    CHECK(same_slot_overlap(280e-9, 120e-9, shift) == doctest::Approx(overlap_oracle(280e-9, 120e-9, shift)).epsilon(1e-6));
  }
  // Mirror symmetry of the symmetric delay distribution.
  CHECK(same_slot_overlap(280e-9, 120e-9, 200e-9) == doctest::Approx(same_slot_overlap(280e-9, 120e-9, -200e-9)));
  CHECK(displaced_capture(280e-9, 120e-9, 0.0) == doctest::Approx(coincidence_capture(120e-9, 280e-9)));
  CHECK(displaced_capture(280e-9, 120e-9, 5e-6) < 1e-12);
}

TEST_CASE("calibrated presets reproduce their targets in the model") {
  const PaperValues& p = paper_values();
  CHECK(expected_g2(make_preset(PresetId::InputG2)).g2 == doctest::Approx(p.g2_input).epsilon(1e-6));
  CHECK(expected_g2(make_preset(PresetId::AfcG2)).g2 == doctest::Approx(p.g2_afc).epsilon(1e-6));
  CHECK(expected_g2(make_preset(PresetId::SwG2)).g2 == doctest::Approx(p.g2_sw).epsilon(1e-6));
  const double v_afc = 0.5 * (p.v_afc[0] + p.v_afc[1]);
  const double v_sw = 0.5 * (p.v_sw[0] + p.v_sw[1]);
  CHECK(expected_fringe(make_preset(PresetId::AfcFringe)).visibility == doctest::Approx(v_afc).epsilon(1e-6));
  CHECK(expected_fringe(make_preset(PresetId::SwFringe)).visibility == doctest::Approx(v_sw).epsilon(1e-6));
}

TEST_CASE("mean pair number calibration") {
  const double c = coincidence_capture(120e-9, 280e-9);
  const double mu = calibrate_mean_pairs(91.0, 280e-9, 120e-9);
  // The heralded excess dominates, so the leading term is within a few percent.
  CHECK(mu == doctest::Approx(c / 90.0).epsilon(0.03));
  CHECK(make_preset(PresetId::AfcG2).source.mean_pairs_per_window == doctest::Approx(mu));
  CHECK(calibrate_mean_pairs(20.0, 280e-9, 120e-9) > calibrate_mean_pairs(40.0, 280e-9, 120e-9));
}

TEST_CASE("model g2 rises with storage loss only through noise") {
  ExperimentConfig cfg = make_preset(PresetId::SwG2);
  const double base = expected_g2(cfg).g2;
  cfg.t_s = 20e-6;
  CHECK(expected_g2(cfg).g2 < base);
  cfg.memory.noise_per_trial = 0.0;
  CHECK(expected_g2(cfg).g2 > base);
}

TEST_CASE("model agrees with Monte Carlo at reduced statistics") {
  struct Case {
    PresetId id;
    std::uint64_t trials;
  };
  for (const Case c : {Case{PresetId::InputG2, 1000000}, Case{PresetId::AfcG2, 2000000}, Case{PresetId::SwG2, 4000000}}) {
    const ExperimentConfig cfg = reduced(c.id, c.trials);
    const G2Estimate mc = estimate_g2(run_g2_experiment(cfg, 4), cfg.memory.coincidence_window);
    const G2Prediction m = expected_g2(cfg);
    CAPTURE(preset_name(c.id));
    CHECK(within_sigma(mc.g2, m.g2, mc.sigma));
    CHECK(within_sigma(mc.p_i, m.p_i, std::sqrt(m.p_i / c.trials)));
    CHECK(within_sigma(mc.p_s, m.p_s, std::sqrt(m.p_s / mc.singles_trials)));
  }
  // A wider window admits more accidentals.
  const ExperimentConfig cfg = reduced(PresetId::SwG2, 4000000);
  const EventLog log = run_g2_experiment(cfg, 4);
  const G2Estimate wide = estimate_g2(log, 560e-9);
  CHECK(within_sigma(wide.g2, expected_g2(cfg, 560e-9).g2, wide.sigma));
  CHECK(expected_g2(cfg, 560e-9).g2 < expected_g2(cfg).g2);
}

TEST_CASE("fringe model agrees with Monte Carlo") {
  const ExperimentConfig cfg = reduced(PresetId::AfcFringe, 2000000);
  const FringeScan scan = run_fringe_scan(cfg, 4);
  const FringePrediction m = expected_fringe(cfg);
  for (const auto& d : scan.settings) {
    double total = 0.0;
    for (const auto c : d.counts) total += static_cast<double>(c);
    const double trials = static_cast<double>(d.trials_per_point * d.counts.size());
    CHECK(within_sigma(total / trials, m.mean, std::sqrt(total) / trials));
    const FringeFit f = fit_fringe(d);
    CHECK(within_sigma(f.visibility, m.visibility, f.visibility_sigma));
  }
}
