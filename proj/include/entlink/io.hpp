#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "entlink/engine.hpp"

namespace entlink {

inline constexpr const char* kVersion = "0.1.0";

/// First line of every output file.
std::string manifest_line(const std::string& digest, std::uint64_t seed, std::string_view experiment);

/// Plain-text event log: manifest, config, layout and record counts, then one
/// record per line ("E <I|S> <timestamp_ns> <trial>" or "T <trial> <h><c><n>").
void write_event_log(std::ostream& out, const EventLog& log, const ExperimentConfig& config);

struct LoadedLog {
  EventLog log;
  ExperimentConfig config;
};

/// Throws ParseError naming the offending record index, or on a digest mismatch
/// between the manifest and the embedded config.
LoadedLog read_event_log(std::istream& in);

std::string format_number(double value);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(std::ostream& out, const std::string& manifest, const Table& table);
void write_aligned(std::ostream& out, const std::string& manifest, const Table& table);

}  // namespace entlink
