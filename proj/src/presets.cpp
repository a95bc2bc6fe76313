#include "entlink/presets.hpp"

#include <array>
#include <numbers>

#include "entlink/error.hpp"
#include "entlink/model.hpp"

namespace entlink {

namespace {

constexpr std::array<std::pair<PresetId, std::string_view>, 7> kPresetNames{{
    {PresetId::InputG2, "input-g2"},
    {PresetId::AfcG2, "afc-g2"},
    {PresetId::SwG2, "sw-g2"},
    {PresetId::AfcFringe, "afc-fringe"},
    {PresetId::SwFringe, "sw-fringe"},
    {PresetId::TsSweep, "ts-sweep"},
    {PresetId::PaperTable, "paper-table"},
}};

std::vector<double> phase_grid(int n) {
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back(2.0 * std::numbers::pi * k / n);
  return out;
}

AnalyzerParams two_comb_analyzer() {
  AnalyzerParams a;
  a.signal_analyzer = TwoCombAfc{};
  return a;
}

AnalyzerParams transmit_store_analyzer() {
  AnalyzerParams a;
  a.signal_analyzer = TransmitOrStore{};
  return a;
}

}  // namespace

std::string_view preset_name(PresetId id) noexcept {
  for (const auto& [k, name] : kPresetNames) {
    if (k == id) return name;
  }
  return "unknown";
}

std::optional<PresetId> parse_preset(std::string_view name) noexcept {
  for (const auto& [k, n] : kPresetNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

const std::vector<PresetId>& all_presets() noexcept {
  static const std::vector<PresetId> ids{PresetId::InputG2,  PresetId::AfcG2,    PresetId::SwG2,      PresetId::AfcFringe,
                                         PresetId::SwFringe, PresetId::TsSweep, PresetId::PaperTable};
  return ids;
}

const PaperValues& paper_values() noexcept {
  static const PaperValues values;
  return values;
}

ExperimentConfig calibrated_baseline() {
  const PaperValues& pv = paper_values();
  ExperimentConfig c;
  c.experiment = ExperimentKind::SpinWaveG2;
  c.t_s = pv.t_s_first;
  c.detector_efficiency_idler = 1.0;
  c.memory.a_eta = calibrate_spin_wave_amplitude(pv.eta_sw, pv.t_s_first, c.memory.gamma_inhom);
  // The AFC echo sees only the resonant mode and no control-pulse noise, so its g2 fixes mu.
  c.source.mean_pairs_per_window =
      calibrate_mean_pairs(pv.g2_afc, c.memory.coincidence_window, c.source.tau_pair);
  c.detector_efficiency_signal = calibrate_signal_detector(c, pv.g2_sw);
  return c;
}

ExperimentConfig make_preset(PresetId id) {
  const PaperValues& pv = paper_values();
  ExperimentConfig c = calibrated_baseline();
  switch (id) {
    case PresetId::InputG2:
      c.experiment = ExperimentKind::InputG2;
      c.n_trials = 4'000'000;
      c.seed = 101;
      c.filter.window_width = 20e6;
      c.filter.od_outside = calibrate_input_od(c, pv.g2_input);
      break;
    case PresetId::AfcG2:
      c.experiment = ExperimentKind::AfcG2;
      c.n_trials = 10'000'000;
      c.seed = 102;
      break;
    case PresetId::SwG2:
      c.n_trials = 30'000'000;
      c.seed = 103;
      break;
    case PresetId::AfcFringe: {
      c.experiment = ExperimentKind::AfcFringe;
      c.seed = 104;
      c.analyzer = two_comb_analyzer();
      c.phase_list = phase_grid(8);
      c.fringe_trials_per_point = 30'000'000;
      c.analyzer->analyzer_visibility =
          calibrate_analyzer_visibility(c, 0.5 * (pv.v_afc[0] + pv.v_afc[1]));
      break;
    }
    case PresetId::SwFringe:
      c.experiment = ExperimentKind::SpinWaveFringe;
      c.seed = 105;
      c.analyzer = transmit_store_analyzer();
      c.phase_list = phase_grid(8);
      c.fringe_trials_per_point = 30'000'000;
      c.analyzer->analyzer_visibility = calibrate_analyzer_visibility(c, 0.5 * (pv.v_sw[0] + pv.v_sw[1]));
      break;
    case PresetId::TsSweep: {
      ExperimentConfig sw = make_preset(PresetId::SwFringe);
      c.experiment = ExperimentKind::TsSweep;
      c.seed = 106;
      c.analyzer = sw.analyzer;
      c.t_s_list = pv.t_s_sweep;
      c.phase_list = phase_grid(4);
      c.n_trials = 30'000'000;
      c.fringe_trials_per_point = 25'000'000;
      break;
    }
    case PresetId::PaperTable:
      throw ConfigError({"preset: 'paper-table' runs every preset and has no single config"});
  }
  return c;
}

}  // namespace entlink
