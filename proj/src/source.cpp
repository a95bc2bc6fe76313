#include "entlink/source.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "entlink/error.hpp"

namespace entlink {

void validate(const SourceParams& p) {
  if (!(p.mean_pairs_per_window >= 0.0)) throw ParameterError("mean_pairs_per_window must be >= 0");
  if (!(p.slot_width > 0.0)) throw ParameterError("slot_width must be > 0");
  if (!(p.tau_pair > 0.0)) throw ParameterError("tau_pair must be > 0");
  if (!(p.tau_pump > p.tau_pair)) throw ParameterError("tau_pump must exceed tau_pair");
  if (p.n_freq_modes < 1) throw ParameterError("n_freq_modes must be >= 1");
  if (!(p.mode_spacing > 0.0)) throw ParameterError("mode_spacing must be > 0");
  if (!(p.pump_off_delay >= 0.0) || !(p.pump_off_duration >= 0.0)) {
    throw ParameterError("pump gate timings must be >= 0");
  }
  if (!(p.idler_out_of_band_suppression >= 0.0 && p.idler_out_of_band_suppression <= 1.0)) {
    throw ParameterError("idler_out_of_band_suppression must be in [0,1]");
  }
}

int mode_order(int freq_mode) noexcept {
  if (freq_mode <= 0) return 0;
  const int k = (freq_mode + 1) / 2;
  return (freq_mode % 2 == 1) ? k : -k;
}

double mode_detuning(const SourceParams& params, int freq_mode) noexcept {
  return mode_order(freq_mode) * params.mode_spacing;
}

namespace {

// Laplace delay with scale tau_pair.
double sample_delay(double tau_pair, Rng& rng) {
  std::exponential_distribution<double> magnitude(1.0 / tau_pair);
  const double d = magnitude(rng);
  return (rng() >> 63) ? d : -d;
}

// Thermal number with mean `mean`, via the geometric law P(n) = (1-q) q^n.
long sample_thermal(double mean, Rng& rng) {
  if (mean <= 0.0) return 0;
  std::geometric_distribution<long> g(1.0 / (1.0 + mean));
  return g(rng);
}

}  // namespace

void sample_pair_emissions(const SourceParams& params, TimeInterval window, std::span<const int> modes,
                           Rng& rng, std::uint64_t trial_index, std::vector<PairEvent>& out) {
  if (params.mean_pairs_per_window < 0.0) throw ParameterError("mean_pairs_per_window must be >= 0");
  if (!(window.duration() > 0.0) || params.mean_pairs_per_window == 0.0) return;
  const double w = params.slot_width;
  const double mu = params.mean_pairs_per_window;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto emit = [&](double lo, double hi, long n, int mode) {
    for (long j = 0; j < n; ++j) {
      PairEvent e;
      e.idler_time = lo + (hi - lo) * unit(rng);
      e.signal_time = e.idler_time + sample_delay(params.tau_pair, rng);
      e.freq_mode = mode;
      e.trial_index = trial_index;
      out.push_back(e);
    }
  };

  const auto first = static_cast<long long>(std::floor(window.begin / w));
  const auto full_end = static_cast<long long>(std::floor(window.end / w));
  // Full slots are walked with geometric skips over empty ones; this is
  // distributionally identical to one thermal draw per slot.
  std::geometric_distribution<long long> skip(mu / (1.0 + mu));

  for (const int mode : modes) {
    long long slot = first;
    if (first * w < window.begin) {
      const double hi = std::min(window.end, (first + 1) * w);
      emit(window.begin, hi, sample_thermal(mu * (hi - window.begin) / w, rng), mode);
      ++slot;
    }
    const long long trailing = slot <= full_end && full_end * w < window.end ? full_end : -1;
    while (slot < full_end) {
      slot += skip(rng);
      if (slot >= full_end) break;
      emit(slot * w, (slot + 1) * w, 1 + sample_thermal(mu, rng), mode);
      ++slot;
    }
    if (trailing >= 0) {
      const double lo = trailing * w;
      emit(lo, window.end, sample_thermal(mu * (window.end - lo) / w, rng), mode);
    }
  }
}

std::vector<PairEvent> sample_pair_emissions(const SourceParams& params, TimeInterval window, Rng& rng,
                                             std::uint64_t trial_index) {
  if (params.mean_pairs_per_window < 0.0) throw ParameterError("mean_pairs_per_window must be >= 0");
  std::vector<int> modes(static_cast<std::size_t>(std::max(params.n_freq_modes, 0)));
  std::iota(modes.begin(), modes.end(), 0);
  std::vector<PairEvent> out;
  sample_pair_emissions(params, window, modes, rng, trial_index, out);
  std::stable_sort(out.begin(), out.end(),
                   [](const PairEvent& a, const PairEvent& b) { return a.idler_time < b.idler_time; });
  return out;
}

double select_idler_mode(const PairEvent& event, int passband_mode, const SourceParams& params) {
  if (passband_mode < 0 || passband_mode >= params.n_freq_modes) {
    throw ParameterError("passband_mode outside the source mode range");
  }
  return event.freq_mode == passband_mode ? 1.0 : params.idler_out_of_band_suppression;
}

namespace {

struct Gate {
  double begin;
  double end;
};

bool gated(const std::vector<Gate>& gates, double t) {
  return std::any_of(gates.begin(), gates.end(), [t](const Gate& g) { return t >= g.begin && t <= g.end; });
}

}  // namespace

std::vector<PairEvent> apply_pump_gate(std::span<const PairEvent> events, const SourceParams& params) {
  std::vector<PairEvent> kept;
  std::vector<Gate> gates;
  for (const auto& e : events) {
    if (gated(gates, e.idler_time)) continue;
    kept.push_back(e);
    const double on = e.idler_time + params.pump_off_delay;
    gates.push_back({on, on + params.pump_off_duration});
  }
  return kept;
}

std::vector<PairEvent> apply_pump_gate(std::span<const PairEvent> events, const SourceParams& params,
                                       std::span<const double> herald_times) {
  std::vector<PairEvent> kept;
  kept.reserve(events.size());
  for (const auto& e : events) {
    if (!pump_gated(e.idler_time, params, herald_times)) kept.push_back(e);
  }
  return kept;
}

bool pump_gated(double idler_time, const SourceParams& params, std::span<const double> herald_times) noexcept {
  for (const double t : herald_times) {
    const double on = t + params.pump_off_delay;
    if (idler_time >= on && idler_time <= on + params.pump_off_duration) return true;
  }
  return false;
}

double pair_delay_cdf(double delay, double tau_pair) noexcept {
  return delay < 0.0 ? 0.5 * std::exp(delay / tau_pair) : 1.0 - 0.5 * std::exp(-delay / tau_pair);
}

double coincidence_capture(double tau_pair, double window) noexcept {
  return 1.0 - std::exp(-0.5 * window / tau_pair);
}

}  // namespace entlink
