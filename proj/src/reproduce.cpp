#include "entlink/reproduce.hpp"

#include <cmath>
#include <limits>

#include "entlink/error.hpp"
#include "entlink/presets.hpp"

namespace entlink {

namespace {

double agreement(double a, double sa, double b, double sb) {
  const double d = std::abs(a - b);
  const double s = std::hypot(sa, sb);
  if (s > 0.0) return d / s;
  return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

ReproRow row(std::string name, double paper, double paper_err, Measurement sim) {
  return {std::move(name), paper, paper_err, sim.value, sim.sigma, agreement(sim.value, sim.sigma, paper, paper_err)};
}

Measurement gamma_to_time(const DecayFit& f) {
  const double t = one_over_e_time(f.gamma);
  return {t, t * f.gamma_sigma / f.gamma};
}

}  // namespace

G2Summary summarize_g2(const EventLog& log, const ExperimentConfig& cfg, double window) {
  G2Summary s;
  s.g2 = estimate_g2(log, window);
  s.efficiency = estimate_storage_efficiency(s.g2, signal_chain_efficiency(cfg),
                                             coincidence_capture(cfg.source.tau_pair, window));
  s.model = expected_g2(cfg, window);
  return s;
}

FringeSummary summarize_fringe(FringeScan scan, const ExperimentConfig& cfg) {
  FringeSummary s;
  for (std::size_t k = 0; k < 2; ++k) {
    s.fits[k] = fit_fringe(scan.settings[k]);
    if (!s.fits[k].diagnostics.converged) throw EstimateError("fringe fit did not converge");
  }
  s.scan = std::move(scan);
  s.visibility.value = 0.5 * (s.fits[0].visibility + s.fits[1].visibility);
  s.visibility.sigma = 0.5 * std::hypot(s.fits[0].visibility_sigma, s.fits[1].visibility_sigma);
  const double v = std::clamp(s.visibility.value, 0.0, 1.0);
  s.fidelity = {fidelity_from_visibility(v), 0.75 * s.visibility.sigma};
  s.witness = entanglement_witness(s.visibility.value, s.visibility.sigma);
  s.model = expected_fringe(cfg);
  return s;
}

SweepSummary summarize_sweep(std::vector<SweepPoint> points, double afc_delay) {
  SweepSummary s;
  s.afc_delay = afc_delay;
  std::vector<DecayPoint> eff, g2;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    eff.push_back({p.t_s, p.efficiency.value, p.efficiency.sigma});
    g2.push_back({p.t_s, p.g2.g2, p.g2.sigma});
    if (p.visibility.sigma > 0.0) {
      const double x = visibility_from_g2(std::max(p.g2.g2, 1.0));
      const double w = 1.0 / (p.visibility.sigma * p.visibility.sigma);
      sxx += w * x * x;
      sxy += w * x * p.visibility.value;
    }
  }
  if (points.size() >= 3) {
    s.efficiency_fit = fit_gaussian_decay(eff, DecayModel::Efficiency);
    s.g2_fit = fit_gaussian_decay(g2, DecayModel::G2MinusOne);
  }
  if (sxx > 0.0) s.analyzer_visibility = {sxy / sxx, 1.0 / std::sqrt(sxx)};
  const double v_an = s.analyzer_visibility.value;
  for (const auto& p : points) {
    const double g = std::max(p.g2.g2, 1.0);
    const double x = visibility_from_g2(g);
    const double sx = 2.0 / ((g + 1.0) * (g + 1.0)) * p.g2.sigma;
    s.closure_sigmas.push_back(agreement(p.visibility.value, p.visibility.sigma, v_an * x, v_an * sx));
  }
  s.points = std::move(points);
  return s;
}

Reproduction reproduce_paper(unsigned threads) {
  const PaperValues& pv = paper_values();
  Reproduction r;
  auto g2_run = [&](PresetId id) {
    const ExperimentConfig cfg = make_preset(id);
    return summarize_g2(run_g2_experiment(cfg, threads), cfg, cfg.memory.coincidence_window);
  };
  auto fringe_run = [&](PresetId id) {
    const ExperimentConfig cfg = make_preset(id);
    return summarize_fringe(run_fringe_scan(cfg, threads), cfg);
  };
  r.input = g2_run(PresetId::InputG2);
  r.afc = g2_run(PresetId::AfcG2);
  r.sw = g2_run(PresetId::SwG2);
  r.afc_fringe = fringe_run(PresetId::AfcFringe);
  r.sw_fringe = fringe_run(PresetId::SwFringe);
  const ExperimentConfig sweep_cfg = make_preset(PresetId::TsSweep);
  r.sweep = summarize_sweep(run_ts_sweep(sweep_cfg, threads), sweep_cfg.memory.tau_afc);
  const ExperimentConfig base = calibrated_baseline();
  r.mode_capacity = temporal_mode_capacity(base.memory.tau_afc, base.memory.cp_width, pv.mode_width);

  auto g2m = [](const G2Summary& s) { return Measurement{s.g2.g2, s.g2.sigma}; };
  auto vis = [](const FringeSummary& s, int k) {
    return Measurement{s.fits[k].visibility, s.fits[k].visibility_sigma};
  };
  r.rows.push_back(row("g2 input", pv.g2_input, pv.g2_input_err, g2m(r.input)));
  r.rows.push_back(row("g2 AFC", pv.g2_afc, pv.g2_afc_err, g2m(r.afc)));
  r.rows.push_back(row("g2 spin-wave", pv.g2_sw, pv.g2_sw_err, g2m(r.sw)));
  r.rows.push_back(row("efficiency AFC", pv.eta_afc, pv.eta_afc_err, r.afc.efficiency));
  r.rows.push_back(row("efficiency spin-wave", pv.eta_sw, pv.eta_sw_err, r.sw.efficiency));
  r.rows.push_back(row("visibility AFC setting 1", pv.v_afc[0], pv.v_afc_err[0], vis(r.afc_fringe, 0)));
  r.rows.push_back(row("visibility AFC setting 2", pv.v_afc[1], pv.v_afc_err[1], vis(r.afc_fringe, 1)));
  r.rows.push_back(row("visibility spin-wave setting 1", pv.v_sw[0], pv.v_sw_err[0], vis(r.sw_fringe, 0)));
  r.rows.push_back(row("visibility spin-wave setting 2", pv.v_sw[1], pv.v_sw_err[1], vis(r.sw_fringe, 1)));
  r.rows.push_back(row("fidelity AFC", pv.f_afc, pv.f_afc_err, r.afc_fringe.fidelity));
  r.rows.push_back(row("fidelity spin-wave", pv.f_sw, pv.f_sw_err, r.sw_fringe.fidelity));
  const DecayFit& fe = r.sweep.efficiency_fit;
  const DecayFit& fg = r.sweep.g2_fit;
  r.rows.push_back(row("gamma efficiency decay [Hz]", pv.gamma_eta, pv.gamma_eta_err, {fe.gamma, fe.gamma_sigma}));
  r.rows.push_back(row("gamma g2 decay [Hz]", pv.gamma_g2, pv.gamma_g2_err, {fg.gamma, fg.gamma_sigma}));
  r.rows.push_back(row("1/e time efficiency [s]", pv.t_e_eta, pv.t_e_eta_err, gamma_to_time(fe)));
  r.rows.push_back(row("1/e time g2 [s]", pv.t_e_g2, pv.t_e_g2_err, gamma_to_time(fg)));
  r.rows.push_back(row("temporal mode capacity", pv.mode_capacity, 0.0, {static_cast<double>(r.mode_capacity), 0.0}));
  return r;
}

Table g2_table(const std::vector<G2Summary>& estimates) {
  Table t;
  t.header = {"window_s", "g2",     "g2_sigma", "p_si",   "p_s",        "p_i",              "n_si",
              "n_s",      "n_i",    "trials",   "singles_trials", "efficiency", "efficiency_sigma", "model_g2"};
  for (const auto& s : estimates) {
    const G2Estimate& e = s.g2;
    t.rows.push_back({format_number(e.window), format_number(e.g2), format_number(e.sigma), format_number(e.p_si),
                      format_number(e.p_s), format_number(e.p_i), std::to_string(e.n_si), std::to_string(e.n_s),
                      std::to_string(e.n_i), std::to_string(e.trials), std::to_string(e.singles_trials),
                      format_number(s.efficiency.value), format_number(s.efficiency.sigma),
                      format_number(s.model.g2)});
  }
  return t;
}

Table fringe_points_table(const FringeSummary& s) {
  Table t;
  t.header = {"setting", "fixed_phase_rad", "scanned_phase_rad", "counts", "accidentals", "trials"};
  for (std::size_t k = 0; k < s.scan.settings.size(); ++k) {
    const FringeDataset& d = s.scan.settings[k];
    for (std::size_t i = 0; i < d.phases.size(); ++i) {
      t.rows.push_back({std::to_string(k + 1), format_number(d.fixed_phase), format_number(d.phases[i]),
                        std::to_string(d.counts[i]), format_number(d.accidentals[i]),
                        std::to_string(d.trials_per_point)});
    }
  }
  return t;
}

Table fringe_fit_table(const FringeSummary& s) {
  Table t;
  t.header = {"quantity", "value", "sigma"};
  for (std::size_t k = 0; k < 2; ++k) {
    const FringeFit& f = s.fits[k];
    const std::string tag = "setting " + std::to_string(k + 1) + " ";
    t.rows.push_back({tag + "visibility", format_number(f.visibility), format_number(f.visibility_sigma)});
    t.rows.push_back({tag + "phase_rad", format_number(f.phase), format_number(f.phase_sigma)});
    t.rows.push_back({tag + "amplitude", format_number(f.amplitude), format_number(f.amplitude_sigma)});
    t.rows.push_back({tag + "reduced_chi2", format_number(f.diagnostics.reduced_chi2), ""});
  }
  t.rows.push_back({"mean visibility", format_number(s.visibility.value), format_number(s.visibility.sigma)});
  t.rows.push_back({"fidelity", format_number(s.fidelity.value), format_number(s.fidelity.sigma)});
  t.rows.push_back({"chsh violating", s.witness.chsh_violating ? "yes" : "no", ""});
  t.rows.push_back({"sigmas above chsh threshold", format_number(s.witness.chsh_sigmas), ""});
  t.rows.push_back({"sigmas above separable bound", format_number(s.witness.separable_excluded_sigmas), ""});
  t.rows.push_back({"model visibility", format_number(s.model.visibility), ""});
  return t;
}

Table sweep_table(const SweepSummary& s) {
  Table t;
  t.header = {"t_s_s",      "total_storage_s",       "g2",    "g2_sigma", "efficiency", "efficiency_sigma",
              "visibility", "visibility_sigma", "model_visibility", "closure_sigmas"};
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const SweepPoint& p = s.points[i];
    const double model = s.analyzer_visibility.value * visibility_from_g2(std::max(p.g2.g2, 1.0));
    t.rows.push_back({format_number(p.t_s), format_number(p.t_s + s.afc_delay), format_number(p.g2.g2),
                      format_number(p.g2.sigma), format_number(p.efficiency.value), format_number(p.efficiency.sigma),
                      format_number(p.visibility.value), format_number(p.visibility.sigma), format_number(model),
                      format_number(s.closure_sigmas[i])});
  }
  return t;
}

Table sweep_fit_table(const SweepSummary& s) {
  Table t;
  t.header = {"quantity", "value", "sigma"};
  const DecayFit& fe = s.efficiency_fit;
  const DecayFit& fg = s.g2_fit;
  t.rows.push_back({"efficiency amplitude", format_number(fe.amplitude), format_number(fe.amplitude_sigma)});
  t.rows.push_back({"efficiency gamma_hz", format_number(fe.gamma), format_number(fe.gamma_sigma)});
  t.rows.push_back({"efficiency 1/e time_s", format_number(gamma_to_time(fe).value),
                    format_number(gamma_to_time(fe).sigma)});
  t.rows.push_back({"g2 amplitude", format_number(fg.amplitude), format_number(fg.amplitude_sigma)});
  t.rows.push_back({"g2 gamma_hz", format_number(fg.gamma), format_number(fg.gamma_sigma)});
  t.rows.push_back({"g2 1/e time_s", format_number(gamma_to_time(fg).value), format_number(gamma_to_time(fg).sigma)});
  t.rows.push_back({"analyzer visibility", format_number(s.analyzer_visibility.value),
                    format_number(s.analyzer_visibility.sigma)});
  return t;
}

Table reproduction_table(const Reproduction& r) {
  Table t;
  t.header = {"quantity", "paper", "paper_err", "simulated", "simulated_err", "agreement_sigma"};
  for (const auto& row : r.rows) {
    t.rows.push_back({row.quantity, format_number(row.paper), format_number(row.paper_err),
                      format_number(row.simulated), format_number(row.simulated_err), format_number(row.sigmas)});
  }
  return t;
}

}  // namespace entlink
