#pragma once

#include "entlink/engine.hpp"

namespace entlink {

/// Probability that the signal of one pair lands within +-window/2 of the idler of
/// another pair emitted in the same slot, shifted by `shift`.
double same_slot_overlap(double window, double tau_pair, double shift);

/// Same overlap for an idler gate [0, gate) tiled by emission slots of width `slot`,
/// summed over the slots the gate covers.
double same_slot_overlap(double slot, double gate, double window, double tau_pair, double shift);

/// Fraction of a pair's coincidences displaced by `shift` that still fall in the window.
double displaced_capture(double window, double tau_pair, double shift) noexcept;

/// Closed-form expectation of the Monte Carlo estimator for a g2 experiment.
struct G2Prediction {
  double p_i = 0.0;
  double p_s = 0.0;
  double p_si = 0.0;
  double g2 = 0.0;
};

G2Prediction expected_g2(const ExperimentConfig& config);
G2Prediction expected_g2(const ExperimentConfig& config, double window);

/// Central-bin coincidences per trial at one setting: mean + amplitude cos(phase).
struct FringePrediction {
  double mean = 0.0;
  double amplitude = 0.0;
  double accidentals = 0.0;  // off-peak rate per trial
  double visibility = 0.0;
};

FringePrediction expected_fringe(const ExperimentConfig& config);

/// Mean pair number that gives `g2` for storage with no out-of-band light and no noise.
double calibrate_mean_pairs(double g2, double window, double tau_pair);

/// Out-of-band optical depth of the filter chain that brings the transparency g2 to `g2`.
double calibrate_input_od(const ExperimentConfig& config, double g2);

/// Signal detector efficiency that gives the spin-wave g2 at config.t_s.
double calibrate_signal_detector(const ExperimentConfig& config, double g2);

/// Analyzer visibility that gives the fringe visibility `v` for the fringe config.
double calibrate_analyzer_visibility(const ExperimentConfig& config, double v);

}  // namespace entlink
