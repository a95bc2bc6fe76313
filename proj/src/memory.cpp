#include "entlink/memory.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "entlink/error.hpp"

namespace entlink {

double spin_dephasing_exponent(double t_s, double gamma) noexcept {
  const double x = t_s * gamma * std::numbers::pi;
  return x * x / (2.0 * std::numbers::ln2);
}

double calibrate_spin_wave_amplitude(double efficiency, double t_s, double gamma_inhom) {
  if (!(gamma_inhom > 0.0)) throw ParameterError("gamma_inhom must be > 0");
  if (t_s < 0.0) throw ParameterError("t_s must be >= 0");
  return efficiency * std::exp(spin_dephasing_exponent(t_s, gamma_inhom));
}

void validate(const MemoryParams& p) {
  if (!(p.eta_afc >= 0.0 && p.eta_afc <= 1.0)) throw ParameterError("eta_afc must be in [0,1]");
  if (!(p.a_eta >= 0.0 && p.a_eta <= 1.0)) throw ParameterError("a_eta must be in [0,1]");
  if (!(p.gamma_inhom > 0.0)) throw ParameterError("gamma_inhom must be > 0");
  if (!(p.noise_per_trial >= 0.0)) throw ParameterError("noise_per_trial must be >= 0");
  if (!(p.cp_width > 0.0)) throw ParameterError("cp_width must be > 0");
  if (!(p.tau_afc > p.cp_width)) throw ParameterError("tau_afc must exceed cp_width");
  if (!(p.coincidence_window > 0.0)) throw ParameterError("coincidence_window must be > 0");
  if (!(p.trial_spacing > 0.0)) throw ParameterError("trial_spacing must be > 0");
  if (!(p.transparency_transmission >= 0.0 && p.transparency_transmission <= 1.0)) {
    throw ParameterError("transparency_transmission must be in [0,1]");
  }
}

void validate(const FilterParams& f) {
  if (!(f.window_width > 0.0)) throw ParameterError("filter window_width must be > 0");
  if (!(f.od_outside >= 0.0)) throw ParameterError("filter od_outside must be >= 0");
  for (const double t : {f.etalon_transmission, f.bandpass_transmission, f.pbs_unpolarized_rejection}) {
    if (!(t >= 0.0 && t <= 1.0)) throw ParameterError("filter transmissions must be in [0,1]");
  }
}

double spin_wave_efficiency(const MemoryParams& params, double t_s) {
  if (t_s < 0.0) throw ParameterError("t_s must be >= 0");
  return params.a_eta * std::exp(-spin_dephasing_exponent(t_s, params.gamma_inhom));
}

double spin_wave_g2_model(double g2_zero, double gamma_g2, double t_s) {
  if (g2_zero < 1.0) throw ParameterError("g2_zero must be >= 1");
  if (t_s < 0.0) throw ParameterError("t_s must be >= 0");
  return 1.0 + (g2_zero - 1.0) * std::exp(-spin_dephasing_exponent(t_s, gamma_g2));
}

void check_spin_wave_timing(const MemoryParams& params, double t_s) {
  if (t_s < 0.0) throw ParameterError("t_s must be >= 0");
  if (t_s < params.cp_width) {
    throw ParameterError("spin-wave storage time shorter than the control pulse width: the read-out pulse "
                         "would overlap the transfer pulse");
  }
}

double storage_efficiency(const MemoryParams& params, StorageMode mode, double t_s) {
  switch (mode) {
    case StorageMode::Transparency: return params.transparency_transmission;
    case StorageMode::AfcEcho: return params.eta_afc;
    case StorageMode::SpinWave: return spin_wave_efficiency(params, t_s);
  }
  return 0.0;
}

double storage_delay(const MemoryParams& params, StorageMode mode, double t_s) {
  switch (mode) {
    case StorageMode::Transparency: return 0.0;
    case StorageMode::AfcEcho: return params.tau_afc;
    case StorageMode::SpinWave: return params.tau_afc + t_s;
  }
  return 0.0;
}

StorageOutcome storage_trial(const PairEvent& pair, const MemoryParams& params, StorageMode mode, double t_s,
                             Rng& rng) {
  if (mode == StorageMode::SpinWave) check_spin_wave_timing(params, t_s);
  std::bernoulli_distribution survive(storage_efficiency(params, mode, t_s));
  StorageOutcome out;
  out.mode = mode;
  out.survived = survive(rng);
  out.emission_time = pair.signal_time + storage_delay(params, mode, t_s);
  return out;
}

std::vector<DetectionEvent> sample_control_pulse_noise(const MemoryParams& params, TimeInterval window, Rng& rng,
                                                       std::uint64_t trial_index) {
  std::vector<DetectionEvent> out;
  if (!(window.duration() > 0.0) || params.noise_per_trial <= 0.0) return out;
  const double mean = params.noise_per_trial * window.duration() / params.coincidence_window;
  std::poisson_distribution<long> count(mean);
  std::uniform_real_distribution<double> when(window.begin, window.end);
  const long n = count(rng);
  out.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    out.push_back({Channel::Signal, to_ns(when(rng)), trial_index});
  }
  return out;
}

double filter_chain_transmission(double detuning, const FilterParams& filter) noexcept {
  const double passive = filter.etalon_transmission * filter.bandpass_transmission;
  if (std::abs(detuning) <= 0.5 * filter.window_width) return passive;
  return passive * std::exp(-filter.od_outside);
}

double unpolarized_noise_transmission(const FilterParams& filter) noexcept {
  return filter.etalon_transmission * filter.bandpass_transmission * (1.0 - filter.pbs_unpolarized_rejection);
}

int temporal_mode_capacity(double tau_afc, double cp_width, double mode_width) {
  if (!(mode_width > 0.0)) throw ParameterError("mode_width must be > 0");
  if (!(tau_afc > 0.0) || !(cp_width > 0.0)) throw ParameterError("tau_afc and cp_width must be > 0");
  if (!(tau_afc > cp_width)) throw ParameterError("tau_afc must exceed cp_width");
  return static_cast<int>(std::lround((tau_afc - cp_width) / mode_width));
}

}  // namespace entlink
