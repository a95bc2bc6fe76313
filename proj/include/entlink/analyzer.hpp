#pragma once

#include <optional>
#include <variant>

#include "entlink/random.hpp"

namespace entlink {

enum class Arm { Short, Long };

/// Signal analyzer made of two AFCs in the filter crystal with distinct storage times.
struct TwoCombAfc {
  double t_short = 2e-6;
  double t_long = 2.42e-6;

  friend bool operator==(const TwoCombAfc&, const TwoCombAfc&) = default;
};

/// Signal analyzer where the short path is transmission through the comb and the long path its echo.
struct TransmitOrStore {
  double t_store = 420e-9;

  friend bool operator==(const TransmitOrStore&, const TransmitOrStore&) = default;
};

using SignalAnalyzer = std::variant<TwoCombAfc, TransmitOrStore>;

struct AnalyzerParams {
  double tau_mz = 420e-9;
  double phase_idler = 0.0;
  double phase_signal = 0.0;
  double analyzer_visibility = 1.0;
  SignalAnalyzer signal_analyzer = TwoCombAfc{};
  // Probabilities of the signal taking the short / long path; the rest is lost.
  double p_short = 0.5;
  double p_long = 0.5;

  friend bool operator==(const AnalyzerParams&, const AnalyzerParams&) = default;
};

void validate(const AnalyzerParams& params);

/// Post-selected Franson state under the white-noise model.
struct TimeBinState {
  double visibility = 1.0;
  double phase = 0.0;
};

/// An unbalanced interferometer: path delays, path probabilities and the phase on the long path.
struct InterferometerArms {
  double short_delay = 0.0;
  double long_delay = 0.0;
  double p_short = 0.5;
  double p_long = 0.5;
  double long_phase = 0.0;
};

InterferometerArms idler_arms(const AnalyzerParams& params);
InterferometerArms signal_arms(const AnalyzerParams& params);

struct RoutedPhoton {
  double output_time = 0.0;
  double accumulated_phase = 0.0;
  Arm arm = Arm::Short;
};

bool check_franson_condition(double tau_pump, double tau_mz, double tau_pair) noexcept;

/// Probability that a central-bin pair exits in correlated ports:
/// (1 + V * v_an * cos(phi + phase_sum)) / 2.
double coincidence_probability(const TimeBinState& state, double phase_sum, double v_an) noexcept;

/// Reduction of fringe contrast from unequal path probabilities, 2 sqrt(p_s p_l) / (p_s + p_l).
double path_balance_factor(double p_short, double p_long) noexcept;

/// Sends a photon through one interferometer. Returns nullopt if it is lost in the analyzer.
std::optional<RoutedPhoton> route_through_interferometer(double photon_time, const InterferometerArms& arms,
                                                         Rng& rng);

/// Overload that builds the arms from analyzer params (signal side) with an explicit long-path phase.
std::optional<RoutedPhoton> route_through_interferometer(double photon_time, const AnalyzerParams& params,
                                                         double arm_phase, Rng& rng);

/// Central-bin post-selection on detection times. `expected_offset` is the
/// signal-minus-idler delay of EE (and LL) pairs.
bool postselect_central_bin(double signal_time, double idler_time, double expected_offset, double tau_mz,
                            double bin_tolerance);

}  // namespace entlink
