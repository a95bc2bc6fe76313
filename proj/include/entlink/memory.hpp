#pragma once

#include <cstdint>
#include <vector>

#include "entlink/events.hpp"
#include "entlink/random.hpp"
#include "entlink/source.hpp"

namespace entlink {

/// Gaussian dephasing exponent factor pi^2 / (2 ln 2) shared by the spin-wave decay laws.
double spin_dephasing_exponent(double t_s, double gamma) noexcept;

/// Amplitude a such that a * exp(-(t pi gamma)^2 / (2 ln 2)) passes through (t_s, efficiency).
double calibrate_spin_wave_amplitude(double efficiency, double t_s, double gamma_inhom);

/// AFC / spin-wave memory. `a_eta` is the t_s -> 0 spin-wave efficiency with the
/// control-pulse transfer folded in.
struct MemoryParams {
  double eta_afc = 0.197;
  double tau_afc = 10e-6;
  double a_eta = calibrate_spin_wave_amplitude(0.062, 6.9e-6, 16.1e3);
  double gamma_inhom = 16.1e3;
  double noise_per_trial = 8.3e-4;  // detected counts per coincidence_window gate
  double cp_width = 3e-6;
  double trial_spacing = 400e-6;
  double coincidence_window = 280e-9;
  double transparency_transmission = 1.0;

  friend bool operator==(const MemoryParams&, const MemoryParams&) = default;
};

void validate(const MemoryParams& params);

struct FilterParams {
  double window_width = 6e6;
  double od_outside = 6.0;
  double etalon_transmission = 0.8;
  double bandpass_transmission = 0.9;
  double pbs_unpolarized_rejection = 0.5;

  friend bool operator==(const FilterParams&, const FilterParams&) = default;
};

void validate(const FilterParams& params);

enum class StorageMode { Transparency, AfcEcho, SpinWave };

struct StorageOutcome {
  bool survived = false;
  double emission_time = 0.0;
  StorageMode mode = StorageMode::Transparency;
};

double spin_wave_efficiency(const MemoryParams& params, double t_s);

/// g2 of the retrieved spin wave vs storage time: 1 + (g2_zero - 1) * gaussian decay.
double spin_wave_g2_model(double g2_zero, double gamma_g2, double t_s);

/// Survival probability and added delay of a storage mode.
double storage_efficiency(const MemoryParams& params, StorageMode mode, double t_s);
double storage_delay(const MemoryParams& params, StorageMode mode, double t_s);

/// Throws ParameterError if the two control pulses of a spin-wave storage overlap.
void check_spin_wave_timing(const MemoryParams& params, double t_s);

StorageOutcome storage_trial(const PairEvent& pair, const MemoryParams& params, StorageMode mode, double t_s,
                             Rng& rng);

/// Control-pulse noise detections in `window` for one storage trial: Poisson with
/// mean noise_per_trial per coincidence_window of gate, uniform in time.
std::vector<DetectionEvent> sample_control_pulse_noise(const MemoryParams& params, TimeInterval window, Rng& rng,
                                                       std::uint64_t trial_index = 0);

/// Transmission of the filter crystal + etalon + band-pass chain at a detuning
/// from the AFC centre. The transparency window edge is closed.
double filter_chain_transmission(double detuning, const FilterParams& filter) noexcept;

/// Transmission of unpolarized noise through the chain including the polarizing beam splitter.
double unpolarized_noise_transmission(const FilterParams& filter) noexcept;

/// Number of temporal modes of width mode_width that fit between the end of the
/// control pulse and the AFC echo, rounded to nearest.
int temporal_mode_capacity(double tau_afc, double cp_width, double mode_width);

}  // namespace entlink
