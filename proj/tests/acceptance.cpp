// Runs the full presets and checks each acceptance criterion. Prints one
// PASS/FAIL line per criterion plus the numbers behind it.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "entlink/config.hpp"
#include "entlink/engine.hpp"
#include "entlink/estimator.hpp"
#include "entlink/io.hpp"
#include "entlink/memory.hpp"
#include "entlink/model.hpp"
#include "entlink/presets.hpp"
#include "entlink/reproduce.hpp"

using namespace entlink;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    ok = ok && cond;
    detail << "    " << (cond ? "ok   " : "FAIL ") << what << '\n';
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double sigmas(double a, double sa, double b, double sb) { return std::abs(a - b) / std::hypot(sa, sb); }

void g2_criterion(Check& c, const std::string& name, const G2Summary& s, double paper, double paper_err) {
  const double k = sigmas(s.g2.g2, s.g2.sigma, paper, paper_err);
  c.require(k <= 3.0, name + fmt(" g2 = %.3f +- %.3f", s.g2.g2, s.g2.sigma) + fmt(" vs %.1f +- %.1f", paper, paper_err) +
                          fmt(" (%.2f sigma)", k));
}

void criterion_1(Check& c, const Reproduction& r) {
  const PaperValues& pv = paper_values();
  c.require(r.input.g2.trials >= 1000000, fmt("windows = %.0f", static_cast<double>(r.input.g2.trials)));
  g2_criterion(c, "input", r.input, pv.g2_input, pv.g2_input_err);
}

void criterion_2(Check& c, const Reproduction& r) {
  const PaperValues& pv = paper_values();
  const ExperimentConfig cfg = make_preset(PresetId::AfcG2);
  c.require(cfg.memory.eta_afc == 0.197, fmt("eta_afc = %.3f", cfg.memory.eta_afc));
  g2_criterion(c, "AFC", r.afc, pv.g2_afc, pv.g2_afc_err);
  const EventLog probe = run_g2_experiment([&] {
    ExperimentConfig small = cfg;
    small.n_trials = 1000;
    return small;
  }());
  c.require(probe.signal_offset_ns == 10000, fmt("echo delay = %.0f ns", static_cast<double>(probe.signal_offset_ns)));
  c.require(storage_delay(cfg.memory, StorageMode::AfcEcho, 0.0) == 10e-6, "storage delay exactly 10 us");
}

void criterion_3(Check& c, const Reproduction& r) {
  const PaperValues& pv = paper_values();
  const ExperimentConfig cfg = make_preset(PresetId::SwG2);
  const double eta = storage_efficiency(cfg.memory, StorageMode::SpinWave, cfg.t_s);
  c.require(std::abs(eta - 0.062) < 1e-9, fmt("eta_sw(6.9 us) = %.5f", eta));
  c.require(cfg.memory.noise_per_trial == 8.3e-4, fmt("noise per trial = %.2e", cfg.memory.noise_per_trial));
  g2_criterion(c, "spin-wave", r.sw, pv.g2_sw, pv.g2_sw_err);
}

void criterion_4(Check& c, const Reproduction& r) {
  const double t1 = one_over_e_time(16.1e3) * 1e6, t2 = one_over_e_time(14.8e3) * 1e6;
  c.require(std::abs(t1 / 23.28 - 1.0) < 1e-3, fmt("1/e time at 16.1 kHz = %.3f us", t1));
  c.require(std::abs(t2 / 25.32 - 1.0) < 1e-3, fmt("1/e time at 14.8 kHz = %.3f us", t2));
  c.require(std::abs(t1 - 23.0) <= 1.0 && std::abs(t2 - 25.0) <= 1.0, "within the quoted 23(1) and 25(1) us");

  // Synthetic sweep with 5% multiplicative noise.
  std::mt19937_64 rng(404);
  std::normal_distribution<double> gauss(0.0, 1.0);
  int recovered = 0;
  const int reps = 20;
  double worst = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<DecayPoint> pts;
    for (int k = 0; k < 8; ++k) {
      const double t = 6.9e-6 + k * (37.7e-6 - 6.9e-6) / 7.0;
      const double y = 0.2 * std::exp(-std::pow(t * 16.1e3 * std::numbers::pi, 2) / (2.0 * std::numbers::ln2));
      pts.push_back({t, y * (1.0 + 0.05 * gauss(rng)), 0.05 * y});
    }
    const DecayFit f = fit_gaussian_decay(pts, DecayModel::Efficiency);
    const double err = std::abs(f.gamma / 16.1e3 - 1.0);
    worst = std::max(worst, err);
    if (err < 0.05) ++recovered;
  }
  c.require(recovered == reps, fmt("synthetic sweeps with gamma within 5%%: %.0f/%.0f (worst %.2f%%)", recovered, reps,
                                   100.0 * worst));
  c.detail << fmt("    info sweep fits: gamma_eta = %.2f +- %.2f kHz", r.sweep.efficiency_fit.gamma * 1e-3,
                  r.sweep.efficiency_fit.gamma_sigma * 1e-3)
           << fmt(", gamma_g2 = %.2f +- %.2f kHz\n", r.sweep.g2_fit.gamma * 1e-3, r.sweep.g2_fit.gamma_sigma * 1e-3);
}

void fringe_common(Check& c, const char* name, const FringeSummary& s, const double* v, const double* v_err,
                   double f, double f_err) {
  for (int k = 0; k < 2; ++k) {
    const double d = sigmas(s.fits[k].visibility, s.fits[k].visibility_sigma, v[k], v_err[k]);
    c.require(d <= 3.0, std::string(name) + fmt(" setting %.0f: V = %.4f +- %.4f", k + 1, s.fits[k].visibility,
                                                 s.fits[k].visibility_sigma) +
                            fmt(" vs %.2f (%.2f sigma)", v[k], d));
  }
  const double d = sigmas(s.fidelity.value, s.fidelity.sigma, f, f_err);
  c.require(d <= 3.0, std::string(name) + fmt(" fidelity = %.4f +- %.4f vs %.2f (%.2f sigma)", s.fidelity.value,
                                              s.fidelity.sigma, f, d));
}

void criterion_5(Check& c, const Reproduction& r) {
  const PaperValues& pv = paper_values();
  fringe_common(c, "AFC", r.afc_fringe, pv.v_afc, pv.v_afc_err, pv.f_afc, pv.f_afc_err);
  c.require(r.afc_fringe.witness.chsh_violating && r.afc_fringe.witness.chsh_sigmas > 3.0,
            fmt("AFC CHSH violation by %.2f sigma", r.afc_fringe.witness.chsh_sigmas));
  fringe_common(c, "spin-wave", r.sw_fringe, pv.v_sw, pv.v_sw_err, pv.f_sw, pv.f_sw_err);
  c.require(r.sw_fringe.witness.chsh_sigmas < 3.0,
            fmt("spin-wave no significant CHSH violation (%.2f sigma)", r.sw_fringe.witness.chsh_sigmas));
  c.require(r.sw_fringe.witness.separable_excluded_sigmas > 5.0,
            fmt("spin-wave separability excluded by %.2f sigma", r.sw_fringe.witness.separable_excluded_sigmas));
}

void criterion_6(Check& c, const Reproduction& r) {
  const SweepSummary& s = r.sweep;
  c.detail << fmt("    info fitted v_an = %.4f +- %.4f\n", s.analyzer_visibility.value, s.analyzer_visibility.sigma);
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const SweepPoint& p = s.points[i];
    c.require(s.closure_sigmas[i] <= 2.0, fmt("t_s = %.1f us: V = %.4f +- %.4f, closure %.2f sigma", p.t_s * 1e6,
                                              p.visibility.value, p.visibility.sigma, s.closure_sigmas[i]));
    c.require(p.visibility.value > kSeparableThreshold,
              fmt("t_s = %.1f us: V = %.4f above 1/3 (g2 = %.3f)", p.t_s * 1e6, p.visibility.value, p.g2.g2));
  }
  const double total = s.points.back().t_s + s.afc_delay;
  c.require(std::abs(total - 47.7e-6) < 1e-12, fmt("total storage at last point = %.1f us", total * 1e6));
}

void criterion_7(Check& c) {
  // Independent Poisson streams.
  EventLog log;
  log.n_main_trials = 400000;
  log.herald_gate_ns = 280;
  log.signal_offset_ns = 10000;
  std::mt19937_64 rng(707);
  std::poisson_distribution<int> n_idler(0.05), n_signal(0.15);
  // Signals span three windows so the stream is stationary around every idler.
  std::uniform_int_distribution<std::int64_t> ti(0, 279), ts(9720, 10559);
  for (std::uint64_t k = 0; k < log.n_main_trials; ++k) {
    for (int j = n_idler(rng); j > 0; --j) log.events.push_back({Channel::Idler, ti(rng), k});
    for (int j = n_signal(rng); j > 0; --j) log.events.push_back({Channel::Signal, ts(rng), k});
  }
  const G2Estimate e = estimate_g2(log, 280e-9);
  c.require(std::abs(e.g2 - 1.0) <= 3.0 * e.sigma, fmt("Poisson g2 = %.4f +- %.4f", e.g2, e.sigma));

  EventLog exact;
  exact.n_main_trials = 10;
  exact.herald_gate_ns = 280;
  exact.signal_offset_ns = 10000;
  exact.events = {{Channel::Idler, 100, 0}, {Channel::Signal, 10120, 0}, {Channel::Idler, 50, 1},
                  {Channel::Signal, 10270, 2}};
  const double g_exact = estimate_g2(exact, 280e-9).g2;
  c.require(std::abs(g_exact - 2.5) <= 1e-12, fmt("constructed g2 = %.15f (exact 2.5)", g_exact));

  std::vector<double> phases, counts, sig;
  for (int k = 0; k < 8; ++k) {
    phases.push_back(2.0 * std::numbers::pi * k / 8);
    counts.push_back(500.0 * (1.0 + 0.83 * std::cos(phases.back() + 0.3)));
    sig.push_back(1.0);
  }
  const FringeFit ff = fit_fringe(phases, counts, sig);
  c.require(std::abs(ff.visibility / 0.83 - 1.0) < 1e-6 && std::abs(ff.phase / 0.3 - 1.0) < 1e-6 &&
                std::abs(ff.amplitude / 500.0 - 1.0) < 1e-6,
            fmt("noiseless fringe: V = %.9f, phase = %.9f, A = %.6f", ff.visibility, ff.phase, ff.amplitude));

  std::vector<DecayPoint> pts;
  for (double t : {6.9e-6, 15e-6, 25e-6, 37.7e-6}) {
    pts.push_back({t, 1.0 + 9.0 * std::exp(-std::pow(t * 14.8e3 * std::numbers::pi, 2) / (2.0 * std::numbers::ln2)),
                   0.1});
  }
  const DecayFit df = fit_gaussian_decay(pts, DecayModel::G2MinusOne);
  c.require(std::abs(df.gamma / 14.8e3 - 1.0) < 1e-6 && std::abs(df.amplitude / 9.0 - 1.0) < 1e-6,
            fmt("noiseless decay: gamma = %.6f Hz, a = %.9f", df.gamma, df.amplitude));

  const double v98 = visibility_from_g2(9.8);
  c.require(std::abs(v98 - 0.8148) < 5e-5, fmt("V from g2 = 9.8: %.5f", v98));
  const double f90 = fidelity_from_visibility(0.90);
  c.require(std::abs(f90 - 0.925) < 1e-12, fmt("F from V = 0.90: %.4f", f90));
  c.require(fidelity_from_visibility(kSeparableThreshold) == 0.5, "F at V = 1/3 is 1/2");
  c.require(!entanglement_witness(kChshThreshold, 0.01).chsh_violating, "V = 1/sqrt(2) does not violate CHSH");
  const int modes = temporal_mode_capacity(10e-6, 3e-6, 420e-9);
  c.require(modes == 17, fmt("mode capacity (10 us, 3 us, 420 ns) = %.0f", modes));
}

// Estimate file contents of one preset at reduced statistics, as the CLI writes them.
std::string estimate_file(PresetId id, unsigned threads) {
  ExperimentConfig cfg = make_preset(id);
  std::ostringstream out;
  const std::string manifest = manifest_line(config_digest(cfg), cfg.seed, experiment_name(cfg.experiment));
  if (is_g2_experiment(cfg.experiment)) {
    cfg.n_trials = 200000;
    const EventLog log = run_g2_experiment(cfg, threads);
    write_csv(out, manifest, g2_table({summarize_g2(log, cfg, cfg.memory.coincidence_window)}));
    std::ostringstream events;
    write_event_log(events, log, cfg);
    out << events.str();
  } else if (is_fringe_experiment(cfg.experiment)) {
    cfg.fringe_trials_per_point = 200000;
    const FringeSummary s = summarize_fringe(run_fringe_scan(cfg, threads), cfg);
    write_csv(out, manifest, fringe_points_table(s));
    write_csv(out, manifest, fringe_fit_table(s));
  } else {
    cfg.n_trials = 300000;
    cfg.fringe_trials_per_point = 50000;
    const SweepSummary s = summarize_sweep(run_ts_sweep(cfg, threads), cfg.memory.tau_afc);
    write_csv(out, manifest, sweep_table(s));
    write_csv(out, manifest, sweep_fit_table(s));
  }
  return out.str();
}

void criterion_8(Check& c) {
  for (const PresetId id : all_presets()) {
    if (id == PresetId::PaperTable) continue;
    const std::string a = estimate_file(id, 1);
    const std::string b = estimate_file(id, 1);
    const std::string p = estimate_file(id, 4);
    c.require(a == b, std::string(preset_name(id)) + ": repeated runs byte-identical");
    c.require(a == p, std::string(preset_name(id)) + ": serial and 4-thread runs byte-identical");
  }
}

}  // namespace

int main() {
  const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::cout << "running full presets on " << threads << " thread(s)" << std::endl;
  const Reproduction r = reproduce_paper(threads);

  struct Criterion {
    const char* name;
    std::function<void(Check&)> run;
  };
  const std::vector<Criterion> criteria = {
      {"1 input correlations", [&](Check& c) { criterion_1(c, r); }},
      {"2 AFC storage", [&](Check& c) { criterion_2(c, r); }},
      {"3 spin-wave storage", [&](Check& c) { criterion_3(c, r); }},
      {"4 decay physics", [&](Check& c) { criterion_4(c, r); }},
      {"5 entanglement analysis", [&](Check& c) { criterion_5(c, r); }},
      {"6 visibility model closure", [&](Check& c) { criterion_6(c, r); }},
      {"7 estimator oracles", [&](Check& c) { criterion_7(c); }},
      {"8 determinism", [&](Check& c) { criterion_8(c); }},
  };
  int failed = 0;
  for (const auto& crit : criteria) {
    Check c;
    try {
      crit.run(c);
    } catch (const std::exception& e) {
      c.require(false, std::string("exception: ") + e.what());
    }
    std::cout << (c.ok ? "PASS " : "FAIL ") << "criterion " << crit.name << '\n' << c.detail.str();
    if (!c.ok) ++failed;
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criterion(s) failed" : "acceptance: all passed")
            << std::endl;
  return failed ? 1 : 0;
}
