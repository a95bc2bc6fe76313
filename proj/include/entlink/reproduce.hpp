#pragma once

#include <array>
#include <string>
#include <vector>

#include "entlink/engine.hpp"
#include "entlink/io.hpp"
#include "entlink/model.hpp"

namespace entlink {

struct G2Summary {
  G2Estimate g2;
  Measurement efficiency;
  G2Prediction model;
};

G2Summary summarize_g2(const EventLog& log, const ExperimentConfig& config, double window);

struct FringeSummary {
  FringeScan scan;
  std::array<FringeFit, 2> fits;
  Measurement visibility;  // mean of the two settings
  Measurement fidelity;
  WitnessReport witness;
  FringePrediction model;
};

FringeSummary summarize_fringe(FringeScan scan, const ExperimentConfig& config);

struct SweepSummary {
  std::vector<SweepPoint> points;
  DecayFit efficiency_fit;
  DecayFit g2_fit;
  Measurement analyzer_visibility;  // single v_an fitted to V = v_an (g2 - 1) / (g2 + 1)
  std::vector<double> closure_sigmas;
  double afc_delay = 0.0;  // excited-state storage before the spin transfer
};

SweepSummary summarize_sweep(std::vector<SweepPoint> points, double afc_delay);

struct ReproRow {
  std::string quantity;
  double paper = 0.0, paper_err = 0.0;
  double simulated = 0.0, simulated_err = 0.0;
  double sigmas = 0.0;
};

struct Reproduction {
  G2Summary input, afc, sw;
  FringeSummary afc_fringe, sw_fringe;
  SweepSummary sweep;
  int mode_capacity = 0;
  std::vector<ReproRow> rows;
};

/// Runs every preset at its fixed seed and compares against the measured values.
Reproduction reproduce_paper(unsigned threads);

Table g2_table(const std::vector<G2Summary>& estimates);
Table fringe_points_table(const FringeSummary& summary);
Table fringe_fit_table(const FringeSummary& summary);
Table sweep_table(const SweepSummary& summary);
Table sweep_fit_table(const SweepSummary& summary);
Table reproduction_table(const Reproduction& repro);

}  // namespace entlink
