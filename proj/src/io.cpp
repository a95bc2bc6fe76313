#include "entlink/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "entlink/config.hpp"
#include "entlink/error.hpp"

namespace entlink {

namespace {

constexpr std::string_view kLogMagic = "# entlink-eventlog";

template <typename T>
T parse_int(std::string_view text, const std::string& what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(what + ": expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

// Value of "key=value" among the fields of a header line.
std::string_view field(const std::vector<std::string_view>& fields, std::string_view key, const char* line_name) {
  for (const auto f : fields) {
    if (f.size() > key.size() && f.substr(0, key.size()) == key && f[key.size()] == '=') {
      return f.substr(key.size() + 1);
    }
  }
  throw ParseError(std::string("event log header '") + line_name + "': missing field '" + std::string(key) + "'");
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::string header_line(std::istream& in, std::string_view prefix) {
  std::string line;
  if (!read_line(in, line) || line.rfind(prefix, 0) != 0) {
    throw ParseError("event log header: expected line starting with '" + std::string(prefix) + "'");
  }
  return line.substr(prefix.size());
}

}  // namespace

std::string manifest_line(const std::string& digest, std::uint64_t seed, std::string_view experiment) {
  return "# entlink manifest digest=" + digest + " seed=" + std::to_string(seed) +
         " experiment=" + std::string(experiment) + " version=" + kVersion;
}

void write_event_log(std::ostream& out, const EventLog& log, const ExperimentConfig& config) {
  out << kLogMagic << " v1 digest=" << log.config_digest << " seed=" << log.seed << " experiment=" << log.experiment
      << " version=" << kVersion << '\n';
  out << "# config " << serialize_config(config) << '\n';
  out << "# layout main=" << log.n_main_trials << " noise=" << log.n_noise_trials
      << " semiconditional=" << (log.semiconditional ? 1 : 0) << " gate_start_ns=" << log.idler_gate_start_ns
      << " herald_gate_ns=" << log.herald_gate_ns << " signal_offset_ns=" << log.signal_offset_ns << '\n';
  out << "# records events=" << log.events.size() << " annotations=" << log.annotations.size() << '\n';
  for (const auto& e : log.events) {
    out << "E " << (e.channel == Channel::Idler ? 'I' : 'S') << ' ' << e.timestamp_ns << ' ' << e.trial_index << '\n';
  }
  for (const auto& a : log.annotations) {
    out << "T " << a.trial_index << ' ' << (a.heralded ? '1' : '0') << (a.cp_fired ? '1' : '0')
        << (a.noise_only ? '1' : '0') << '\n';
  }
}

LoadedLog read_event_log(std::istream& in) {
  LoadedLog out;
  EventLog& log = out.log;

  const std::string manifest_text = header_line(in, kLogMagic);
  const auto manifest = split(manifest_text);
  if (manifest.empty() || manifest[0] != "v1") throw ParseError("event log header: unsupported format version");
  log.config_digest = std::string(field(manifest, "digest", "manifest"));
  log.seed = parse_int<std::uint64_t>(field(manifest, "seed", "manifest"), "manifest seed");
  log.experiment = std::string(field(manifest, "experiment", "manifest"));

  const std::string config_text = header_line(in, "# config ");
  try {
    out.config = config_from_json(nlohmann::json::parse(config_text));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("event log config: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("event log config: ") + e.what());
  }
  const std::string digest = config_digest(out.config);
  if (digest != log.config_digest) {
    throw ParseError("event log digest mismatch: manifest " + log.config_digest + ", config " + digest);
  }

  const std::string layout_text = header_line(in, "# layout ");
  const auto layout = split(layout_text);
  log.n_main_trials = parse_int<std::uint64_t>(field(layout, "main", "layout"), "layout main");
  log.n_noise_trials = parse_int<std::uint64_t>(field(layout, "noise", "layout"), "layout noise");
  log.semiconditional = parse_int<int>(field(layout, "semiconditional", "layout"), "layout semiconditional") != 0;
  log.idler_gate_start_ns = parse_int<std::int64_t>(field(layout, "gate_start_ns", "layout"), "layout gate_start_ns");
  log.herald_gate_ns = parse_int<std::int64_t>(field(layout, "herald_gate_ns", "layout"), "layout herald_gate_ns");
  log.signal_offset_ns =
      parse_int<std::int64_t>(field(layout, "signal_offset_ns", "layout"), "layout signal_offset_ns");

  const std::string counts_text = header_line(in, "# records ");
  const auto counts = split(counts_text);
  const auto n_events = parse_int<std::uint64_t>(field(counts, "events", "records"), "records events");
  const auto n_annotations = parse_int<std::uint64_t>(field(counts, "annotations", "records"), "records annotations");
  const std::uint64_t n_records = n_events + n_annotations;
  log.events.reserve(static_cast<std::size_t>(n_events));
  log.annotations.reserve(static_cast<std::size_t>(n_annotations));

  std::string line;
  std::uint64_t index = 0;
  for (; index < n_records; ++index) {
    const std::string where = "record " + std::to_string(index);
    if (!read_line(in, line)) {
      throw ParseError(where + ": truncated log, expected " + std::to_string(n_records) + " records");
    }
    const auto f = split(line);
    if (index < n_events) {
      if (f.size() != 4 || f[0] != "E" || (f[1] != "I" && f[1] != "S")) {
        throw ParseError(where + ": malformed event record '" + line + "'");
      }
      DetectionEvent e;
      e.channel = f[1] == "I" ? Channel::Idler : Channel::Signal;
      e.timestamp_ns = parse_int<std::int64_t>(f[2], where);
      e.trial_index = parse_int<std::uint64_t>(f[3], where);
      log.events.push_back(e);
    } else {
      if (f.size() != 3 || f[0] != "T" || f[2].size() != 3 ||
          std::any_of(f[2].begin(), f[2].end(), [](char c) { return c != '0' && c != '1'; })) {
        throw ParseError(where + ": malformed trial record '" + line + "'");
      }
      TrialAnnotation a;
      a.trial_index = parse_int<std::uint64_t>(f[1], where);
      a.heralded = f[2][0] == '1';
      a.cp_fired = f[2][1] == '1';
      a.noise_only = f[2][2] == '1';
      log.annotations.push_back(a);
    }
  }
  while (read_line(in, line)) {
    if (!line.empty()) throw ParseError("record " + std::to_string(index) + ": unexpected data after last record");
  }
  return out;
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

void write_csv(std::ostream& out, const std::string& manifest, const Table& table) {
  out << manifest << '\n';
  auto row = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      const bool quote = cells[i].find_first_of(",\"") != std::string::npos;
      if (!quote) {
        out << cells[i];
        continue;
      }
      out << '"';
      for (const char c : cells[i]) out << (c == '"' ? "\"\"" : std::string(1, c));
      out << '"';
    }
    out << '\n';
  };
  row(table.header);
  for (const auto& r : table.rows) row(r);
}

void write_aligned(std::ostream& out, const std::string& manifest, const Table& table) {
  std::vector<std::size_t> width(table.header.size(), 0);
  auto measure = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size() && i < width.size(); ++i) width[i] = std::max(width[i], cells[i].size());
  };
  measure(table.header);
  for (const auto& r : table.rows) measure(r);
  auto row = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) line += "  ";
      line += cells[i];
      if (i + 1 < cells.size() && i < width.size()) line.append(width[i] - cells[i].size(), ' ');
    }
    out << line << '\n';
  };
  out << manifest << '\n';
  row(table.header);
  std::size_t total = 0;
  for (const auto w : width) total += w;
  out << std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') << '\n';
  for (const auto& r : table.rows) row(r);
}

}  // namespace entlink
