#include "entlink/engine.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <thread>

#include "entlink/config.hpp"
#include "entlink/error.hpp"

namespace entlink {

namespace {

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 6> kExperimentNames{{
    {ExperimentKind::InputG2, "input-g2"},
    {ExperimentKind::AfcG2, "afc-g2"},
    {ExperimentKind::SpinWaveG2, "sw-g2"},
    {ExperimentKind::AfcFringe, "afc-fringe"},
    {ExperimentKind::SpinWaveFringe, "sw-fringe"},
    {ExperimentKind::TsSweep, "ts-sweep"},
}};

constexpr std::uint64_t kDomainMain = 1;
constexpr std::uint64_t kDomainNoise = 2;
constexpr std::uint64_t kDomainFringe = 3;

template <typename Fn>
void parallel_for(std::size_t n_tasks, unsigned threads, Fn&& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_tasks)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n_tasks; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Modes that can reach a detector in this configuration.
std::vector<int> active_modes(const ExperimentConfig& cfg) {
  const bool oob_signal = storage_mode(cfg.experiment) == StorageMode::Transparency;
  const bool oob_idler = cfg.source.idler_out_of_band_suppression > 0.0;
  std::vector<int> modes{0};
  if (oob_signal || oob_idler) {
    for (int m = 1; m < cfg.source.n_freq_modes; ++m) modes.push_back(m);
  }
  return modes;
}

struct Candidate {
  PairEvent pair;
  bool idler_detected = false;
  double idler_time = 0.0;  // detection time after the idler interferometer
  Arm idler_arm = Arm::Short;
  bool idler_plus = true;
};

// Per-trial working set, reused to avoid allocation in the hot loop.
struct Scratch {
  std::vector<PairEvent> pairs;
  std::vector<Candidate> candidates;
  std::vector<DetectionEvent> noise;
};

struct SignalPath {
  StorageMode mode;
  bool retrieve;  // false for spin-wave trials without control pulses
};

// Resonant or out-of-band signal through memory and filters; returns detection time or NaN.
double propagate_signal(const ExperimentConfig& cfg, const PairEvent& pair, SignalPath path, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double eta_s = cfg.detector_efficiency_signal;
  if (pair.freq_mode == 0) {
    if (!path.retrieve) return std::nan("");
    const StorageOutcome out = storage_trial(pair, cfg.memory, path.mode, cfg.t_s, rng);
    if (!out.survived) return std::nan("");
    if (unit(rng) >= filter_chain_transmission(0.0, cfg.filter) * eta_s) return std::nan("");
    return out.emission_time;
  }
  // Out-of-band photons are not absorbed by the comb; only the bare transmission path reaches the gate.
  if (path.mode != StorageMode::Transparency) return std::nan("");
  const double t = cfg.memory.transparency_transmission *
                   filter_chain_transmission(mode_detuning(cfg.source, pair.freq_mode), cfg.filter) * eta_s;
  if (unit(rng) >= t) return std::nan("");
  return pair.signal_time;
}

struct G2TrialResult {
  bool heralded = false;
  bool cp_fired = false;
};

G2TrialResult simulate_g2_trial(const ExperimentConfig& cfg, const FrameGeometry& geo, std::span<const int> modes,
                                std::uint64_t index, Scratch& scratch, std::vector<DetectionEvent>& out) {
  Rng rng = substream(cfg.seed, kDomainMain, index);
  scratch.pairs.clear();
  sample_pair_emissions(cfg.source, geo.frame, modes, rng, index, scratch.pairs);
  G2TrialResult result;
  if (scratch.pairs.empty()) return result;
  std::sort(scratch.pairs.begin(), scratch.pairs.end(),
            [](const PairEvent& a, const PairEvent& b) { return a.idler_time < b.idler_time; });

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  scratch.candidates.clear();
  double herald = std::nan("");
  for (const auto& p : scratch.pairs) {
    Candidate c;
    c.pair = p;
    c.idler_time = p.idler_time;
    c.idler_detected = unit(rng) < select_idler_mode(p, 0, cfg.source) * cfg.detector_efficiency_idler;
    if (c.idler_detected && std::isnan(herald) && p.idler_time >= 0.0 && p.idler_time < geo.herald_gate) {
      herald = p.idler_time;
    }
    scratch.candidates.push_back(c);
  }
  result.heralded = !std::isnan(herald);
  const StorageMode mode = storage_mode(cfg.experiment);
  result.cp_fired = mode == StorageMode::SpinWave && result.heralded;
  const std::array<double, 1> heralds{herald};
  const std::span<const double> herald_span =
      result.heralded ? std::span<const double>(heralds) : std::span<const double>();

  const double origin = geo.frame.begin;
  const SignalPath path{mode, mode != StorageMode::SpinWave || result.cp_fired};
  for (const auto& c : scratch.candidates) {
    if (pump_gated(c.pair.idler_time, cfg.source, herald_span)) continue;
    if (c.idler_detected && geo.idler_record.contains(c.idler_time)) {
      out.push_back({Channel::Idler, to_ns(c.idler_time - origin), index});
    }
    const double ts = propagate_signal(cfg, c.pair, path, rng);
    if (!std::isnan(ts) && geo.signal_record.contains(ts)) {
      out.push_back({Channel::Signal, to_ns(ts - origin), index});
    }
  }
  if (result.cp_fired) {
    for (auto e : sample_control_pulse_noise(cfg.memory, geo.signal_record, rng, index)) {
      e.timestamp_ns -= to_ns(origin);
      out.push_back(e);
    }
  }
  return result;
}

// Control pulses fired without a herald: retrieves whatever the pump stored plus CP noise.
void simulate_noise_trial(const ExperimentConfig& cfg, const FrameGeometry& geo, std::uint64_t parent,
                          std::uint64_t k, Scratch& scratch, std::vector<DetectionEvent>& out) {
  Rng rng = substream(derive_seed(cfg.seed, kDomainNoise, parent), 0, k);
  scratch.pairs.clear();
  const std::array<int, 1> resonant{0};
  sample_pair_emissions(cfg.source, geo.frame, resonant, rng, 0, scratch.pairs);
  const double origin = geo.frame.begin;
  const SignalPath path{StorageMode::SpinWave, true};
  for (const auto& p : scratch.pairs) {
    const double ts = propagate_signal(cfg, p, path, rng);
    if (!std::isnan(ts) && geo.signal_record.contains(ts)) out.push_back({Channel::Signal, to_ns(ts - origin), 0});
  }
  for (auto e : sample_control_pulse_noise(cfg.memory, geo.signal_record, rng, 0)) {
    e.timestamp_ns -= to_ns(origin);
    out.push_back(e);
  }
}

void sort_trial(std::vector<DetectionEvent>& events, std::size_t from) {
  std::sort(events.begin() + static_cast<std::ptrdiff_t>(from), events.end(),
            [](const DetectionEvent& a, const DetectionEvent& b) {
              if (a.timestamp_ns != b.timestamp_ns) return a.timestamp_ns < b.timestamp_ns;
              return a.channel < b.channel;
            });
}

}  // namespace

std::string_view experiment_name(ExperimentKind kind) noexcept {
  for (const auto& [k, name] : kExperimentNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment(std::string_view name) noexcept {
  for (const auto& [k, n] : kExperimentNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

StorageMode storage_mode(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::InputG2: return StorageMode::Transparency;
    case ExperimentKind::AfcG2:
    case ExperimentKind::AfcFringe: return StorageMode::AfcEcho;
    case ExperimentKind::SpinWaveG2:
    case ExperimentKind::SpinWaveFringe:
    case ExperimentKind::TsSweep: return StorageMode::SpinWave;
  }
  return StorageMode::Transparency;
}

bool is_g2_experiment(ExperimentKind kind) noexcept {
  return kind == ExperimentKind::InputG2 || kind == ExperimentKind::AfcG2 || kind == ExperimentKind::SpinWaveG2;
}

bool is_fringe_experiment(ExperimentKind kind) noexcept {
  return kind == ExperimentKind::AfcFringe || kind == ExperimentKind::SpinWaveFringe;
}

void validate(const ExperimentConfig& cfg) {
  std::vector<std::string> errors;
  auto check = [&](const char* field, auto&& fn) {
    try {
      fn();
    } catch (const ParameterError& e) {
      errors.push_back(std::string(field) + ": " + e.what());
    }
  };
  check("source", [&] { validate(cfg.source); });
  check("memory", [&] { validate(cfg.memory); });
  check("filter", [&] { validate(cfg.filter); });
  if (cfg.analyzer) check("analyzer", [&] { validate(*cfg.analyzer); });
  if (!(cfg.detector_efficiency_signal >= 0.0 && cfg.detector_efficiency_signal <= 1.0)) {
    errors.emplace_back("detector_efficiency_signal: must be in [0,1]");
  }
  if (!(cfg.detector_efficiency_idler >= 0.0 && cfg.detector_efficiency_idler <= 1.0)) {
    errors.emplace_back("detector_efficiency_idler: must be in [0,1]");
  }
  if (cfg.source.slot_width != cfg.memory.coincidence_window) {
    errors.emplace_back("source.slot_width: must equal memory.coincidence_window");
  }
  const StorageMode mode = storage_mode(cfg.experiment);
  if (mode == StorageMode::SpinWave && cfg.experiment != ExperimentKind::TsSweep) {
    check("t_s", [&] { check_spin_wave_timing(cfg.memory, cfg.t_s); });
  }
  if (cfg.experiment == ExperimentKind::TsSweep) {
    if (cfg.t_s_list.empty()) errors.emplace_back("t_s_list: must be non-empty for ts-sweep");
    for (const double t : cfg.t_s_list) check("t_s_list", [&] { check_spin_wave_timing(cfg.memory, t); });
  }
  if (is_fringe_experiment(cfg.experiment) || cfg.experiment == ExperimentKind::TsSweep) {
    if (!cfg.analyzer) errors.emplace_back("analyzer: required for fringe experiments");
    if (cfg.phase_list.empty()) errors.emplace_back("phase_list: must be non-empty for fringe experiments");
    if (cfg.analyzer && !(0.5 * cfg.memory.coincidence_window < 0.5 * cfg.analyzer->tau_mz)) {
      errors.emplace_back("memory.coincidence_window: must be below tau_mz for central-bin post-selection");
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
}

FrameGeometry frame_geometry(const ExperimentConfig& cfg) {
  FrameGeometry g;
  const double w = cfg.memory.coincidence_window;
  g.frame = {-kFrameMarginSlots * w, (kFrameMarginSlots + 1) * w};
  g.herald_gate = w;
  const double t_s = cfg.experiment == ExperimentKind::TsSweep ? 0.0 : cfg.t_s;
  g.signal_offset = storage_delay(cfg.memory, storage_mode(cfg.experiment), t_s);
  g.idler_record = {-4 * w, 4 * w};
  g.signal_record = {g.signal_offset - 5 * w, g.signal_offset + 5 * w};
  if (is_fringe_experiment(cfg.experiment) && cfg.analyzer) {
    const InterferometerArms arms = signal_arms(*cfg.analyzer);
    g.signal_offset += arms.short_delay;
    // Noise is generated before the analyzer over the full frame.
    g.signal_record = {g.signal_offset - arms.short_delay + g.frame.begin,
                       g.signal_offset - arms.short_delay + g.frame.end};
  }
  return g;
}

double signal_chain_efficiency(const ExperimentConfig& cfg) noexcept {
  return filter_chain_transmission(0.0, cfg.filter) * cfg.detector_efficiency_signal;
}

EventLog run_g2_experiment(const ExperimentConfig& cfg, unsigned threads) {
  if (!is_g2_experiment(cfg.experiment)) {
    throw ConfigError({"experiment: '" + std::string(experiment_name(cfg.experiment)) +
                       "' is not a g2 experiment"});
  }
  validate(cfg);
  const FrameGeometry geo = frame_geometry(cfg);
  const std::vector<int> modes = active_modes(cfg);
  const bool semiconditional = storage_mode(cfg.experiment) == StorageMode::SpinWave;

  EventLog log;
  log.config_digest = config_digest(cfg);
  log.seed = cfg.seed;
  log.experiment = std::string(experiment_name(cfg.experiment));
  log.n_main_trials = cfg.n_trials;
  log.semiconditional = semiconditional;
  log.idler_gate_start_ns = to_ns(-geo.frame.begin);
  log.herald_gate_ns = to_ns(geo.herald_gate);
  log.signal_offset_ns = to_ns(geo.signal_offset);
  if (cfg.n_trials == 0) {
    log.semiconditional = false;
    return log;
  }

  struct Batch {
    std::vector<DetectionEvent> events;
    std::vector<TrialAnnotation> annotations;
    std::vector<std::vector<DetectionEvent>> noise;  // one entry per heralded trial, in order
  };
  constexpr std::uint64_t kBatch = 1 << 16;
  const std::size_t n_batches = static_cast<std::size_t>((cfg.n_trials + kBatch - 1) / kBatch);
  std::vector<Batch> batches(n_batches);
  parallel_for(n_batches, threads, [&](std::size_t b) {
    Scratch scratch;
    Batch& out = batches[b];
    const std::uint64_t lo = b * kBatch;
    const std::uint64_t hi = std::min<std::uint64_t>(cfg.n_trials, lo + kBatch);
    for (std::uint64_t i = lo; i < hi; ++i) {
      const std::size_t from = out.events.size();
      const G2TrialResult r = simulate_g2_trial(cfg, geo, modes, i, scratch, out.events);
      sort_trial(out.events, from);
      if (r.heralded) out.annotations.push_back({i, true, r.cp_fired, false});
      if (semiconditional && r.heralded) {
        std::vector<DetectionEvent> noise;
        for (std::uint64_t k = 0; k < cfg.noise_trials_per_herald; ++k) {
          const std::size_t start = noise.size();
          simulate_noise_trial(cfg, geo, i, k, scratch, noise);
          for (std::size_t e = start; e < noise.size(); ++e) noise[e].trial_index = k;
          sort_trial(noise, start);
        }
        out.noise.push_back(std::move(noise));
      }
    }
  });

  std::uint64_t next_noise = cfg.n_trials;
  for (auto& b : batches) {
    log.events.insert(log.events.end(), b.events.begin(), b.events.end());
    log.annotations.insert(log.annotations.end(), b.annotations.begin(), b.annotations.end());
  }
  for (auto& b : batches) {
    for (auto& noise : b.noise) {
      for (auto& e : noise) {
        e.trial_index += next_noise;
        log.events.push_back(e);
      }
      for (std::uint64_t k = 0; k < cfg.noise_trials_per_herald; ++k) {
        log.annotations.push_back({next_noise + k, false, true, true});
      }
      next_noise += cfg.noise_trials_per_herald;
    }
  }
  log.n_noise_trials = next_noise - cfg.n_trials;
  return log;
}

namespace {

struct FringeCounts {
  std::uint64_t central = 0;
  std::uint64_t off_peak = 0;
};

// One trial of a Franson fringe measurement at fixed analyzer phases.
FringeCounts simulate_fringe_trial(const ExperimentConfig& cfg, const FrameGeometry& geo,
                                   std::span<const int> modes, const InterferometerArms& idler,
                                   const InterferometerArms& signal, double v_effective, Rng& rng,
                                   Scratch& scratch, std::vector<double>& idler_clicks,
                                   std::vector<double>& signal_clicks) {
  FringeCounts counts;
  scratch.pairs.clear();
  sample_pair_emissions(cfg.source, geo.frame, modes, rng, 0, scratch.pairs);
  if (scratch.pairs.empty()) return counts;
  std::sort(scratch.pairs.begin(), scratch.pairs.end(),
            [](const PairEvent& a, const PairEvent& b) { return a.idler_time < b.idler_time; });

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  scratch.candidates.clear();
  double herald = std::nan("");
  idler_clicks.clear();
  signal_clicks.clear();
  for (const auto& p : scratch.pairs) {
    Candidate c;
    c.pair = p;
    c.idler_detected = unit(rng) < select_idler_mode(p, 0, cfg.source) * cfg.detector_efficiency_idler;
    if (c.idler_detected) {
      const auto routed = route_through_interferometer(p.idler_time, idler, rng);
      c.idler_time = routed->output_time;
      c.idler_arm = routed->arm;
      c.idler_plus = unit(rng) < 0.5;
      if (c.idler_plus && std::isnan(herald) && c.idler_time >= 0.0 && c.idler_time < geo.herald_gate) {
        herald = c.idler_time;
      }
    }
    scratch.candidates.push_back(c);
  }
  if (std::isnan(herald)) return counts;

  const StorageMode mode = storage_mode(cfg.experiment);
  const std::array<double, 1> heralds{herald};
  const SignalPath path{mode, true};
  const double phase_sum = idler.long_phase + signal.long_phase;
  const double p_correlated = coincidence_probability(TimeBinState{1.0, 0.0}, phase_sum, v_effective);
  for (const auto& c : scratch.candidates) {
    if (pump_gated(c.pair.idler_time, cfg.source, heralds)) continue;
    if (c.idler_detected && c.idler_plus && c.idler_time >= 0.0 && c.idler_time < geo.herald_gate) {
      idler_clicks.push_back(c.idler_time);
    }
    const double ts = propagate_signal(cfg, c.pair, path, rng);
    if (std::isnan(ts)) continue;
    const auto routed = route_through_interferometer(ts, signal, rng);
    if (!routed) continue;
    double p_plus = 0.5;
    if (c.idler_detected && routed->arm == c.idler_arm) p_plus = c.idler_plus ? p_correlated : 1.0 - p_correlated;
    if (unit(rng) < p_plus) signal_clicks.push_back(routed->output_time);
  }
  if (mode == StorageMode::SpinWave) {
    for (const auto& e : sample_control_pulse_noise(cfg.memory, geo.signal_record, rng, 0)) {
      const auto routed = route_through_interferometer(e.seconds(), signal, rng);
      if (routed && unit(rng) < 0.5) signal_clicks.push_back(routed->output_time);
    }
  }

  const double half = 0.5 * cfg.memory.coincidence_window;
  for (const double ti : idler_clicks) {
    for (const double ts : signal_clicks) {
      if (postselect_central_bin(ts, ti, geo.signal_offset, idler.long_delay, half)) ++counts.central;
      if (std::abs(ts - ti - geo.signal_offset - kOffPeakOffset) <= half) ++counts.off_peak;
    }
  }
  return counts;
}

}  // namespace

FringeScan run_fringe_scan(const ExperimentConfig& cfg, unsigned threads) {
  if (!is_fringe_experiment(cfg.experiment)) {
    throw ConfigError({"experiment: '" + std::string(experiment_name(cfg.experiment)) +
                       "' is not a fringe experiment"});
  }
  validate(cfg);
  const AnalyzerParams& an = *cfg.analyzer;
  const FrameGeometry geo = frame_geometry(cfg);
  const std::vector<int> modes = active_modes(cfg);
  const std::uint64_t n = cfg.fringe_trials_per_point ? cfg.fringe_trials_per_point : cfg.n_trials;
  const bool idler_scanned = cfg.experiment == ExperimentKind::SpinWaveFringe;
  const std::size_t n_phase = cfg.phase_list.size();
  const double v_eff = an.analyzer_visibility * path_balance_factor(an.p_short, an.p_long);

  FringeScan scan;
  scan.central_offset = geo.signal_offset;
  scan.window = cfg.memory.coincidence_window;
  scan.idler_scanned = idler_scanned;
  scan.settings.resize(2);
  for (std::size_t s = 0; s < 2; ++s) {
    auto& d = scan.settings[s];
    d.phases = cfg.phase_list;
    d.counts.assign(n_phase, 0);
    d.accidentals.assign(n_phase, 0.0);
    d.trials_per_point = n;
    d.fixed_phase = (idler_scanned ? an.phase_signal : an.phase_idler) + 0.5 * std::numbers::pi * s;
  }

  // Work units are (setting, phase, chunk) so a single phase point can still be split across threads.
  constexpr std::uint64_t kChunk = 1 << 20;
  const std::uint64_t chunks = n == 0 ? 0 : (n + kChunk - 1) / kChunk;
  const std::size_t n_tasks = 2 * n_phase * chunks;
  std::vector<FringeCounts> partial(n_tasks);
  parallel_for(n_tasks, threads, [&](std::size_t task) {
    const std::size_t point = task / chunks;  // setting * n_phase + phase index
    const std::uint64_t chunk = task % chunks;
    const std::size_t s = point / n_phase;
    const std::size_t k = point % n_phase;
    InterferometerArms idler = idler_arms(an);
    InterferometerArms signal = signal_arms(an);
    const double fixed = scan.settings[s].fixed_phase;
    if (idler_scanned) {
      idler.long_phase = cfg.phase_list[k];
      signal.long_phase = fixed;
    } else {
      idler.long_phase = fixed;
      signal.long_phase = cfg.phase_list[k];
    }
    Scratch scratch;
    std::vector<double> idler_clicks, signal_clicks;
    const std::uint64_t point_seed = derive_seed(cfg.seed, kDomainFringe, point);
    FringeCounts total;
    const std::uint64_t lo = chunk * kChunk, hi = std::min(n, lo + kChunk);
    for (std::uint64_t j = lo; j < hi; ++j) {
      Rng rng = substream(point_seed, 0, j);
      const FringeCounts c =
          simulate_fringe_trial(cfg, geo, modes, idler, signal, v_eff, rng, scratch, idler_clicks, signal_clicks);
      total.central += c.central;
      total.off_peak += c.off_peak;
    }
    partial[task] = total;
  });
  for (std::size_t task = 0; task < n_tasks; ++task) {
    const std::size_t point = task / chunks;
    auto& d = scan.settings[point / n_phase];
    d.counts[point % n_phase] += partial[task].central;
    d.accidentals[point % n_phase] += static_cast<double>(partial[task].off_peak);
  }
  return scan;
}

std::vector<SweepPoint> run_ts_sweep(const ExperimentConfig& cfg, unsigned threads) {
  if (cfg.experiment != ExperimentKind::TsSweep) {
    throw ConfigError({"experiment: '" + std::string(experiment_name(cfg.experiment)) + "' is not ts-sweep"});
  }
  validate(cfg);
  std::vector<SweepPoint> out;
  for (const double t_s : cfg.t_s_list) {
    ExperimentConfig sub = cfg;
    sub.t_s = t_s;
    sub.experiment = ExperimentKind::SpinWaveG2;
    SweepPoint p;
    p.t_s = t_s;
    const EventLog log = run_g2_experiment(sub, threads);
    p.g2 = estimate_g2(log, cfg.memory.coincidence_window);
    p.efficiency = estimate_storage_efficiency(p.g2, signal_chain_efficiency(sub),
                                               coincidence_capture(cfg.source.tau_pair, cfg.memory.coincidence_window));
    sub.experiment = ExperimentKind::SpinWaveFringe;
    const FringeScan scan = run_fringe_scan(sub, threads);
    double wsum = 0.0, vsum = 0.0;
    for (const auto& d : scan.settings) {
      const FringeFit f = fit_fringe(d);
      p.fringe_fits.push_back(f);
      if (f.diagnostics.converged && f.visibility_sigma > 0.0) {
        const double w = 1.0 / (f.visibility_sigma * f.visibility_sigma);
        wsum += w;
        vsum += w * f.visibility;
      }
    }
    if (wsum > 0.0) p.visibility = {vsum / wsum, 1.0 / std::sqrt(wsum)};
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace entlink
