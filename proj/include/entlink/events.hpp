#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace entlink {

enum class Channel : std::uint8_t { Idler, Signal };

/// One detector click. Timestamps are integer nanoseconds from the start of the trial frame.
struct DetectionEvent {
  Channel channel = Channel::Idler;
  std::int64_t timestamp_ns = 0;
  std::uint64_t trial_index = 0;

  double seconds() const noexcept { return static_cast<double>(timestamp_ns) * 1e-9; }
  friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

inline std::int64_t to_ns(double seconds) noexcept {
  return static_cast<std::int64_t>(seconds * 1e9 + (seconds >= 0 ? 0.5 : -0.5));
}

struct TrialAnnotation {
  std::uint64_t trial_index = 0;
  bool heralded = false;
  bool cp_fired = false;
  bool noise_only = false;
  friend bool operator==(const TrialAnnotation&, const TrialAnnotation&) = default;
};

/// Detection record of a g2 experiment. Only trials with a non-default
/// annotation are listed in `annotations`; noise-only trials are numbered after
/// the main trials.
struct EventLog {
  std::string config_digest;
  std::uint64_t seed = 0;
  std::string experiment;
  std::uint64_t n_main_trials = 0;
  std::uint64_t n_noise_trials = 0;
  bool semiconditional = false;
  std::int64_t idler_gate_start_ns = 0;
  std::int64_t herald_gate_ns = 0;
  std::int64_t signal_offset_ns = 0;
  std::vector<DetectionEvent> events;
  std::vector<TrialAnnotation> annotations;

  friend bool operator==(const EventLog&, const EventLog&) = default;
};

}  // namespace entlink
