#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "entlink/analyzer.hpp"
#include "entlink/estimator.hpp"
#include "entlink/events.hpp"
#include "entlink/memory.hpp"
#include "entlink/source.hpp"

namespace entlink {

enum class ExperimentKind { InputG2, AfcG2, SpinWaveG2, AfcFringe, SpinWaveFringe, TsSweep };

std::string_view experiment_name(ExperimentKind kind) noexcept;
std::optional<ExperimentKind> parse_experiment(std::string_view name) noexcept;

struct ExperimentConfig {
  SourceParams source;
  MemoryParams memory;
  FilterParams filter;
  std::optional<AnalyzerParams> analyzer;
  ExperimentKind experiment = ExperimentKind::InputG2;
  std::uint64_t n_trials = 1'000'000;
  std::uint64_t seed = 1;
  double detector_efficiency_signal = 0.25;
  double detector_efficiency_idler = 0.5;
  double t_s = 6.9e-6;
  std::vector<double> t_s_list;
  std::vector<double> phase_list;
  // Noise-only control-pulse trials recorded after every heralded spin-wave trial.
  std::uint64_t noise_trials_per_herald = 20;
  // Trials per phase point and setting in fringe scans; 0 means n_trials.
  std::uint64_t fringe_trials_per_point = 0;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Throws ConfigError listing every invalid field. Does not reject n_trials == 0.
void validate(const ExperimentConfig& config);

StorageMode storage_mode(ExperimentKind kind) noexcept;
bool is_g2_experiment(ExperimentKind kind) noexcept;
bool is_fringe_experiment(ExperimentKind kind) noexcept;

/// Time layout of one trial. The herald gate is [0, coincidence_window); pairs are
/// simulated over `frame`, wide enough that the gate statistics are stationary.
struct FrameGeometry {
  TimeInterval frame;
  double herald_gate = 0.0;
  double signal_offset = 0.0;  // signal-minus-idler delay of stored (or EE) pairs
  TimeInterval idler_record;
  TimeInterval signal_record;
};

inline constexpr int kFrameMarginSlots = 8;
inline constexpr double kOffPeakOffset = -1.5e-6;

FrameGeometry frame_geometry(const ExperimentConfig& config);

/// Transmission x detection efficiency of a resonant signal photon after the memory.
double signal_chain_efficiency(const ExperimentConfig& config) noexcept;

/// Semiconditional (spin-wave) logs take singles from noise-only trials.
EventLog run_g2_experiment(const ExperimentConfig& config, unsigned threads = 1);

struct FringeScan {
  std::vector<FringeDataset> settings;  // two settings differing by pi/2
  double central_offset = 0.0;
  double window = 0.0;
  bool idler_scanned = false;
};

FringeScan run_fringe_scan(const ExperimentConfig& config, unsigned threads = 1);

struct SweepPoint {
  double t_s = 0.0;
  G2Estimate g2;
  Measurement efficiency;
  Measurement visibility;
  std::vector<FringeFit> fringe_fits;
};

std::vector<SweepPoint> run_ts_sweep(const ExperimentConfig& config, unsigned threads = 1);

}  // namespace entlink
