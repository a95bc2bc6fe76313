#include "entlink/analyzer.hpp"

#include <cmath>
#include <random>

#include "entlink/error.hpp"

namespace entlink {

void validate(const AnalyzerParams& p) {
  if (!(p.tau_mz > 0.0)) throw ParameterError("tau_mz must be > 0");
  if (!(p.analyzer_visibility >= 0.0 && p.analyzer_visibility <= 1.0)) {
    throw ParameterError("analyzer_visibility must be in [0,1]");
  }
  if (!(p.p_short >= 0.0) || !(p.p_long >= 0.0) || p.p_short + p.p_long > 1.0 + 1e-12) {
    throw ParameterError("analyzer path probabilities must be >= 0 and sum to at most 1");
  }
  if (const auto* two = std::get_if<TwoCombAfc>(&p.signal_analyzer)) {
    if (!(two->t_short >= 0.0) || std::abs((two->t_long - two->t_short) - p.tau_mz) > 1e-12) {
      throw ParameterError("two-comb analyzer must satisfy t_long - t_short = tau_mz");
    }
  } else if (const auto* tos = std::get_if<TransmitOrStore>(&p.signal_analyzer)) {
    if (std::abs(tos->t_store - p.tau_mz) > 1e-12) {
      throw ParameterError("transmit-or-store analyzer must satisfy t_store = tau_mz");
    }
  }
}

InterferometerArms idler_arms(const AnalyzerParams& params) {
  return {0.0, params.tau_mz, 0.5, 0.5, params.phase_idler};
}

InterferometerArms signal_arms(const AnalyzerParams& params) {
  InterferometerArms arms;
  arms.p_short = params.p_short;
  arms.p_long = params.p_long;
  arms.long_phase = params.phase_signal;
  if (const auto* two = std::get_if<TwoCombAfc>(&params.signal_analyzer)) {
    arms.short_delay = two->t_short;
    arms.long_delay = two->t_long;
  } else {
    arms.short_delay = 0.0;
    arms.long_delay = std::get<TransmitOrStore>(params.signal_analyzer).t_store;
  }
  return arms;
}

bool check_franson_condition(double tau_pump, double tau_mz, double tau_pair) noexcept {
  return tau_pump > tau_mz && tau_mz > tau_pair;
}

double coincidence_probability(const TimeBinState& state, double phase_sum, double v_an) noexcept {
  return 0.5 * (1.0 + state.visibility * v_an * std::cos(state.phase + phase_sum));
}

double path_balance_factor(double p_short, double p_long) noexcept {
  const double total = p_short + p_long;
  return total > 0.0 ? 2.0 * std::sqrt(p_short * p_long) / total : 0.0;
}

std::optional<RoutedPhoton> route_through_interferometer(double photon_time, const InterferometerArms& arms,
                                                         Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  if (u < arms.p_short) return RoutedPhoton{photon_time + arms.short_delay, 0.0, Arm::Short};
  if (u < arms.p_short + arms.p_long) {
    return RoutedPhoton{photon_time + arms.long_delay, arms.long_phase, Arm::Long};
  }
  return std::nullopt;
}

std::optional<RoutedPhoton> route_through_interferometer(double photon_time, const AnalyzerParams& params,
                                                         double arm_phase, Rng& rng) {
  InterferometerArms arms = signal_arms(params);
  arms.long_phase = arm_phase;
  return route_through_interferometer(photon_time, arms, rng);
}

bool postselect_central_bin(double signal_time, double idler_time, double expected_offset, double tau_mz,
                            double bin_tolerance) {
  if (!(bin_tolerance < 0.5 * tau_mz)) throw ParameterError("bin_tolerance must be below tau_mz / 2");
  return std::abs((signal_time - idler_time) - expected_offset) <= bin_tolerance;
}

}  // namespace entlink
