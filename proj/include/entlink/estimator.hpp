#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "entlink/events.hpp"

namespace entlink {

struct G2Estimate {
  double g2 = 0.0;
  double sigma = 0.0;
  double p_si = 0.0;
  double p_s = 0.0;
  double p_i = 0.0;
  std::uint64_t n_si = 0;
  std::uint64_t n_s = 0;
  std::uint64_t n_i = 0;
  std::uint64_t trials = 0;          // trials used for p_i and p_si
  std::uint64_t singles_trials = 0;  // trials used for p_s
  double window = 0.0;
};

/// g2 = p_si / (p_s p_i) in a coincidence window, with independent-Poisson error
/// propagation. For semiconditional logs p_s comes from the noise-only trials and
/// idlers are counted in the herald gate only.
G2Estimate estimate_g2(const EventLog& log, double window);

/// Storage efficiency implied by the heralded excess: (p_si - p_s p_i) / (p_i * chain * capture).
/// `chain` is the known signal transmission after the memory, `capture` the fraction
/// of true coincidences inside the window.
struct Measurement {
  double value = 0.0;
  double sigma = 0.0;
};
Measurement estimate_storage_efficiency(const G2Estimate& g2, double chain, double capture);

double visibility_from_g2(double g2);
double fidelity_from_visibility(double v);
double one_over_e_time(double gamma);

inline constexpr double kChshThreshold = 0.70710678118654752440;  // 1/sqrt(2)
inline constexpr double kSeparableThreshold = 1.0 / 3.0;

struct WitnessReport {
  bool chsh_violating = false;
  double chsh_sigmas = 0.0;
  double separable_excluded_sigmas = 0.0;
};
WitnessReport entanglement_witness(double v, double sigma_v);

struct CoincidenceHistogram {
  std::vector<double> bin_edges;  // seconds, size = counts.size() + 1
  std::vector<std::uint64_t> counts;
  double window_offset = 0.0;
  double window_width = 0.0;
};

/// Histogram of signal - idler - signal_offset over heralding idlers, with
/// symmetric bins centred on zero covering [-half_range, half_range].
CoincidenceHistogram build_histogram(const EventLog& log, double bin_width, double half_range, double window);

struct FringeDataset {
  std::vector<double> phases;
  std::vector<std::uint64_t> counts;
  std::vector<double> accidentals;
  std::uint64_t trials_per_point = 0;
  double fixed_phase = 0.0;
};

struct FitDiagnostics {
  double chi2 = 0.0;
  double reduced_chi2 = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct FringeFit {
  double amplitude = 0.0, amplitude_sigma = 0.0;
  double visibility = 0.0, visibility_sigma = 0.0;
  double phase = 0.0, phase_sigma = 0.0;
  FitDiagnostics diagnostics;
};

/// Weighted least squares of C(phi) = A (1 + V cos(phi + phi0)) with Poisson weights.
FringeFit fit_fringe(const FringeDataset& data);
FringeFit fit_fringe(std::span<const double> phases, std::span<const double> counts,
                     std::span<const double> sigmas);

enum class DecayModel { Efficiency, G2MinusOne };

struct DecayPoint {
  double t_s = 0.0;
  double value = 0.0;
  double sigma = 0.0;
};

struct DecayFit {
  double amplitude = 0.0, amplitude_sigma = 0.0;
  double gamma = 0.0, gamma_sigma = 0.0;
  FitDiagnostics diagnostics;
};

/// Levenberg-Marquardt fit of a exp(-(t gamma pi)^2 / (2 ln 2)) (Efficiency) or
/// 1 + a exp(...) (G2MinusOne; `value` is g2 itself).
DecayFit fit_gaussian_decay(std::span<const DecayPoint> points, DecayModel model);

}  // namespace entlink
