#include "entlink/model.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "entlink/error.hpp"

namespace entlink {

namespace {

struct Rates {
  double mu = 0.0;
  double eps_i = 0.0;
  double eps_s = 0.0;       // resonant signal, memory to detector
  double eps_oob = 0.0;     // sum over out-of-band signal modes
  double noise = 0.0;       // detected control-pulse noise per window
};

Rates rates(const ExperimentConfig& cfg) {
  const StorageMode mode = storage_mode(cfg.experiment);
  const double t_s = cfg.experiment == ExperimentKind::TsSweep ? cfg.t_s_list.front() : cfg.t_s;
  Rates r;
  r.mu = cfg.source.mean_pairs_per_window;
  r.eps_i = cfg.detector_efficiency_idler;
  r.eps_s = storage_efficiency(cfg.memory, mode, t_s) * signal_chain_efficiency(cfg);
  if (mode == StorageMode::Transparency) {
    for (int m = 1; m < cfg.source.n_freq_modes; ++m) {
      r.eps_oob += cfg.memory.transparency_transmission *
                   filter_chain_transmission(mode_detuning(cfg.source, m), cfg.filter) *
                   cfg.detector_efficiency_signal;
    }
  }
  if (mode == StorageMode::SpinWave) r.noise = cfg.memory.noise_per_trial;
  return r;
}

}  // namespace

double same_slot_overlap(double slot, double gate, double window, double tau_pair, double shift) {
  if (!(slot > 0.0) || !(gate > 0.0) || !(window > 0.0) || !(tau_pair > 0.0)) {
    throw ParameterError("slot, gate, window and tau_pair must be > 0");
  }
  const double b = tau_pair;
  // Antiderivative of the delay CDF, zero at the origin.
  auto antiderivative = [b](double t) {
    return t < 0.0 ? 0.5 * b * (std::exp(t / b) - 1.0) : t + 0.5 * b * (std::exp(-t / b) - 1.0);
  };
  const double h = 0.5 * window;
  double total = 0.0;
  using boost::math::quadrature::gauss_kronrod;
  for (double s0 = 0.0; s0 < gate; s0 += slot) {
    const double s1 = s0 + slot;
    // Idler of the first pair anywhere in the gated part of the slot, second pair anywhere in the slot.
    auto inner = [&](double xa) {
      const double hi = h - shift + xa, lo = -h - shift + xa;
      return (antiderivative(hi - s0) - antiderivative(hi - s1) - antiderivative(lo - s0) + antiderivative(lo - s1)) /
             slot;
    };
    total += gauss_kronrod<double, 61>::integrate(inner, s0, std::min(s1, gate), 15, 1e-12) / slot;
  }
  return total;
}

double same_slot_overlap(double window, double tau_pair, double shift) {
  return same_slot_overlap(window, window, window, tau_pair, shift);
}

double displaced_capture(double window, double tau_pair, double shift) noexcept {
  const double h = 0.5 * window;
  return pair_delay_cdf(h - shift, tau_pair) - pair_delay_cdf(-h - shift, tau_pair);
}

G2Prediction expected_g2(const ExperimentConfig& cfg, double window) {
  if (!(window > 0.0)) throw ParameterError("window must be > 0");
  const Rates r = rates(cfg);
  const double slot = cfg.source.slot_width;
  const bool semiconditional = storage_mode(cfg.experiment) == StorageMode::SpinWave;
  const double gate = semiconditional ? std::min(window, cfg.memory.coincidence_window) : window;
  const double c = coincidence_capture(cfg.source.tau_pair, window);
  G2Prediction p;
  p.p_i = r.mu * r.eps_i * gate / slot;
  p.p_s = (r.mu * (r.eps_s + r.eps_oob) + r.noise) * window / slot;
  // Thermal bunching: two pairs in one slot occur twice as often as for Poisson emission.
  const double bunching = r.mu * r.mu * r.eps_i * r.eps_s *
                          same_slot_overlap(slot, gate, window, cfg.source.tau_pair, 0.0);
  p.p_si = r.mu * r.eps_i * r.eps_s * c * gate / slot + p.p_i * p.p_s + bunching;
  p.g2 = p.p_si / (p.p_i * p.p_s);
  return p;
}

G2Prediction expected_g2(const ExperimentConfig& cfg) { return expected_g2(cfg, cfg.memory.coincidence_window); }

FringePrediction expected_fringe(const ExperimentConfig& cfg) {
  if (!cfg.analyzer) throw ConfigError({"analyzer: required for fringe experiments"});
  const AnalyzerParams& an = *cfg.analyzer;
  const Rates r = rates(cfg);
  const double w = cfg.memory.coincidence_window;
  const double b = cfg.source.tau_pair;
  const double tau = an.tau_mz;
  const double ps = an.p_short, pl = an.p_long;
  const double k = ps + pl;
  const double c = coincidence_capture(b, w);
  const double spill = displaced_capture(w, b, tau);
  const double v_eff = an.analyzer_visibility * path_balance_factor(ps, pl);

  // Idler: arm 1/2 each, monitored port 1/2. Signal: arm p_k, monitored port 1/2 on average.
  const double pair_rate = r.mu * r.eps_i * r.eps_s;
  const double same_arm = pair_rate * c * k / 8.0;
  const double other_arm = pair_rate * spill * k / 8.0;
  const double idler_rate = 0.5 * r.mu * r.eps_i;
  const double signal_rate = 0.5 * k * (r.mu * (r.eps_s + r.eps_oob) + r.noise);
  const double bunching = 0.25 * r.mu * r.mu * r.eps_i * r.eps_s *
                          (0.5 * k * same_slot_overlap(w, b, 0.0) + 0.5 * pl * same_slot_overlap(w, b, tau) +
                           0.5 * ps * same_slot_overlap(w, b, -tau));
  FringePrediction f;
  f.accidentals = idler_rate * signal_rate;
  f.mean = same_arm + other_arm + f.accidentals + bunching;
  f.amplitude = same_arm * v_eff;
  f.visibility = f.mean > 0.0 ? f.amplitude / f.mean : 0.0;
  return f;
}

double calibrate_mean_pairs(double g2, double window, double tau_pair) {
  if (!(g2 > 1.0)) throw ParameterError("target g2 must exceed 1");
  // g2 = 1 + c / mu + I with no other light reaching the detector.
  const double excess = g2 - 1.0 - same_slot_overlap(window, tau_pair, 0.0);
  if (!(excess > 0.0)) throw ParameterError("target g2 is below the thermal bunching limit");
  return coincidence_capture(tau_pair, window) / excess;
}

double calibrate_input_od(const ExperimentConfig& cfg, double g2) {
  ExperimentConfig probe = cfg;
  probe.filter.od_outside = 1e3;
  const G2Prediction closed = expected_g2(probe);
  // With everything out of band blocked, g2 - 1 scales as 1 / (1 + leak / resonant).
  const double leak_ratio = (closed.g2 - 1.0) / (g2 - 1.0) - 1.0;
  int outside = 0;
  for (int m = 1; m < cfg.source.n_freq_modes; ++m) {
    if (std::abs(mode_detuning(cfg.source, m)) > 0.5 * cfg.filter.window_width) ++outside;
  }
  const double inside_ratio = static_cast<double>(cfg.source.n_freq_modes - 1 - outside);
  const double per_mode = (leak_ratio - inside_ratio) / outside;
  if (outside == 0 || !(per_mode > 0.0) || !(per_mode < 1.0)) {
    throw ParameterError("input g2 target not reachable by out-of-band suppression");
  }
  return -std::log(per_mode);
}

double calibrate_signal_detector(const ExperimentConfig& cfg, double g2) {
  if (storage_mode(cfg.experiment) != StorageMode::SpinWave) {
    throw ParameterError("signal detector calibration needs a spin-wave config");
  }
  ExperimentConfig probe = cfg;
  probe.detector_efficiency_signal = 1.0;
  const Rates r = rates(probe);
  const double w = cfg.memory.coincidence_window;
  const double c = coincidence_capture(cfg.source.tau_pair, w);
  const double bunch = same_slot_overlap(w, cfg.source.tau_pair, 0.0);
  // g2 - 1 = eps (c + mu I) / (mu eps + noise), linear in eps.
  const double denom = c + r.mu * bunch - (g2 - 1.0) * r.mu;
  if (!(denom > 0.0)) throw ParameterError("spin-wave g2 target not reachable");
  const double eps = (g2 - 1.0) * r.noise / denom;
  const double eta = eps / r.eps_s;
  if (!(eta > 0.0 && eta <= 1.0)) throw ParameterError("calibrated signal detector efficiency outside (0,1]");
  return eta;
}

double calibrate_analyzer_visibility(const ExperimentConfig& cfg, double v) {
  if (!cfg.analyzer) throw ConfigError({"analyzer: required for fringe experiments"});
  ExperimentConfig probe = cfg;
  probe.analyzer->analyzer_visibility = 1.0;
  const FringePrediction f = expected_fringe(probe);
  const double v_an = v / f.visibility;
  if (!(v_an > 0.0 && v_an <= 1.0)) throw ParameterError("fringe visibility target not reachable");
  return v_an;
}

}  // namespace entlink
