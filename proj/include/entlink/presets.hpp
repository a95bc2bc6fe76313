#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "entlink/engine.hpp"

namespace entlink {

enum class PresetId { InputG2, AfcG2, SwG2, AfcFringe, SwFringe, TsSweep, PaperTable };

std::string_view preset_name(PresetId id) noexcept;
std::optional<PresetId> parse_preset(std::string_view name) noexcept;
const std::vector<PresetId>& all_presets() noexcept;

/// Measured values the presets are calibrated against.
struct PaperValues {
  double g2_input = 23.3, g2_input_err = 0.2;
  double g2_afc = 91.0, g2_afc_err = 4.0;
  double g2_sw = 9.8, g2_sw_err = 0.6;
  double eta_afc = 0.197, eta_afc_err = 0.005;
  double eta_sw = 0.062, eta_sw_err = 0.003;
  double v_afc[2] = {0.90, 0.88}, v_afc_err[2] = {0.03, 0.03};
  double v_sw[2] = {0.71, 0.68}, v_sw_err[2] = {0.03, 0.05};
  double f_afc = 0.92, f_afc_err = 0.02;
  double f_sw = 0.77, f_sw_err = 0.02;
  double gamma_eta = 16.1e3, gamma_eta_err = 0.7e3;
  double gamma_g2 = 14.8e3, gamma_g2_err = 0.9e3;
  double t_e_eta = 23e-6, t_e_eta_err = 1e-6;
  double t_e_g2 = 25e-6, t_e_g2_err = 1e-6;
  int mode_capacity = 17;
  double mode_width = 420e-9;
  double t_s_first = 6.9e-6;
  std::vector<double> t_s_sweep = {6.9e-6, 15e-6, 25e-6, 37.7e-6};
};

const PaperValues& paper_values() noexcept;

/// Fully calibrated config for one preset. PaperTable has no config of its own.
ExperimentConfig make_preset(PresetId id);

/// Shared calibrated starting point: spin-wave g2 at the first storage time.
ExperimentConfig calibrated_baseline();

}  // namespace entlink
