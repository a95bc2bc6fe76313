#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "entlink/random.hpp"

namespace entlink {

/// Half-open time interval [begin, end) in seconds.
struct TimeInterval {
  double begin = 0.0;
  double end = 0.0;
  double duration() const noexcept { return end - begin; }
  bool contains(double t) const noexcept { return t >= begin && t < end; }
};

/// Cavity-enhanced SPDC source. Pair numbers are thermal per frequency mode and
/// per slot of width `slot_width`.
struct SourceParams {
  double mean_pairs_per_window = 0.0077;  // per slot, in each frequency mode
  double slot_width = 280e-9;
  double tau_pair = 120e-9;
  double tau_pump = 1e-6;
  int n_freq_modes = 15;
  double mode_spacing = 261.1e6;
  double signal_wavelength = 606e-9;
  double idler_wavelength = 1436e-9;
  double pump_off_delay = 1e-6;
  double pump_off_duration = 30e-6;
  double idler_out_of_band_suppression = 0.0;

  friend bool operator==(const SourceParams&, const SourceParams&) = default;
};

/// Throws ParameterError if an invariant of SourceParams is violated.
void validate(const SourceParams& params);

struct PairEvent {
  double idler_time = 0.0;
  double signal_time = 0.0;
  int freq_mode = 0;
  std::uint64_t trial_index = 0;
};

/// Signed cavity-mode order of a mode index: 0, +1, -1, +2, -2, ...
int mode_order(int freq_mode) noexcept;

/// Detuning of a cavity mode from the resonant (index 0) mode.
double mode_detuning(const SourceParams& params, int freq_mode) noexcept;

/// Samples the pairs whose idler falls in `window`, all frequency modes.
/// Slots are aligned to multiples of slot_width on the absolute time axis.
/// Result is sorted by idler_time.
std::vector<PairEvent> sample_pair_emissions(const SourceParams& params, TimeInterval window, Rng& rng,
                                             std::uint64_t trial_index = 0);

/// Same, restricted to a subset of frequency modes. Appends to `out` (not sorted).
void sample_pair_emissions(const SourceParams& params, TimeInterval window, std::span<const int> modes,
                           Rng& rng, std::uint64_t trial_index, std::vector<PairEvent>& out);

/// Survival probability of the idler through the filter cavity tuned to `passband_mode`.
double select_idler_mode(const PairEvent& event, int passband_mode, const SourceParams& params);

/// Pump gating when every surviving idler heralds: a pair is removed if its
/// idler falls in [t + pump_off_delay, t + pump_off_delay + pump_off_duration]
/// of an earlier kept pair. `events` must be sorted by idler_time.
std::vector<PairEvent> apply_pump_gate(std::span<const PairEvent> events, const SourceParams& params);

/// Pump gating triggered by explicit heralding detection times.
std::vector<PairEvent> apply_pump_gate(std::span<const PairEvent> events, const SourceParams& params,
                                       std::span<const double> herald_times);

/// True if a pair emitted at `idler_time` falls in the pump-off interval of any herald.
bool pump_gated(double idler_time, const SourceParams& params, std::span<const double> herald_times) noexcept;

/// Fraction of pairs whose signal-idler delay lies within +-window/2.
double coincidence_capture(double tau_pair, double window) noexcept;

/// CDF of the two-sided exponential delay distribution with 1/e half-width tau_pair.
double pair_delay_cdf(double delay, double tau_pair) noexcept;

}  // namespace entlink
