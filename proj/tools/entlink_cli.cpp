#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "entlink/config.hpp"
#include "entlink/error.hpp"
#include "entlink/io.hpp"
#include "entlink/presets.hpp"
#include "entlink/reproduce.hpp"
#include "entlink/units.hpp"

namespace fs = std::filesystem;
using namespace entlink;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path default_out_dir() {
  if (const char* env = std::getenv("ENTLINK_OUT"); env && *env) return env;
  return "entlink-out";
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

void write_table(const fs::path& dir, const std::string& stem, const std::string& manifest, const Table& table) {
  auto csv = open_output(dir / (stem + ".csv"));
  write_csv(csv, manifest, table);
  auto txt = open_output(dir / (stem + ".txt"));
  write_aligned(txt, manifest, table);
  if (!csv || !txt) throw IoError("failed writing " + stem + " tables");
}

void write_manifest(const fs::path& dir, const ExperimentConfig& cfg) {
  nlohmann::json m = {{"digest", config_digest(cfg)},
                      {"seed", cfg.seed},
                      {"experiment", std::string(experiment_name(cfg.experiment))},
                      {"version", kVersion},
                      {"config", to_json(cfg)}};
  auto out = open_output(dir / "manifest.json");
  out << m.dump(2) << '\n';
}

double parse_window(const std::string& text) { return parse_quantity(text, Dimension::Time); }

std::vector<double> windows_or_default(const std::vector<std::string>& texts, double fallback) {
  std::vector<double> out;
  for (const auto& t : texts) {
    const double w = parse_window(t);
    if (!(w > 0.0)) throw ParseError("--window must be positive");
    out.push_back(w);
  }
  if (out.empty()) out.push_back(fallback);
  return out;
}

Table histogram_table(const CoincidenceHistogram& h) {
  Table t;
  t.header = {"bin_center_s", "counts", "in_window"};
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    const double center = 0.5 * (h.bin_edges[k] + h.bin_edges[k + 1]);
    const bool inside = std::abs(center - h.window_offset) <= 0.5 * h.window_width;
    t.rows.push_back({format_number(center), std::to_string(h.counts[k]), inside ? "1" : "0"});
  }
  return t;
}

void report_g2(const fs::path& dir, const EventLog& log, const ExperimentConfig& cfg,
               const std::vector<double>& windows) {
  std::vector<G2Summary> rows;
  for (const double w : windows) rows.push_back(summarize_g2(log, cfg, w));
  const std::string manifest = manifest_line(log.config_digest, log.seed, log.experiment);
  const Table table = g2_table(rows);
  write_table(dir, "estimates", manifest, table);
  const double w0 = cfg.memory.coincidence_window;
  write_table(dir, "histogram", manifest, histogram_table(build_histogram(log, 20e-9, 5.0 * w0, w0)));
  write_aligned(std::cout, manifest, table);
}

void check_runnable(const ExperimentConfig& cfg) {
  std::vector<std::string> errors;
  if (cfg.n_trials == 0 && !(is_fringe_experiment(cfg.experiment) && cfg.fringe_trials_per_point > 0)) {
    errors.emplace_back("n_trials: must be > 0");
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  validate(cfg);
}

int cmd_simulate(const std::optional<std::string>& config_path, const std::optional<std::string>& preset,
                 std::optional<std::uint64_t> seed, std::optional<std::uint64_t> trials, const fs::path& out_dir,
                 unsigned threads, const std::vector<std::string>& window_texts) {
  if (config_path.has_value() == preset.has_value()) {
    throw ConfigError({"exactly one of --config or --preset is required"});
  }
  ExperimentConfig cfg;
  if (preset) {
    const auto id = parse_preset(*preset);
    if (!id) throw ConfigError({"preset: unknown preset '" + *preset + "'"});
    if (*id == PresetId::PaperTable) throw ConfigError({"preset: use 'reproduce' for paper-table"});
    cfg = make_preset(*id);
  } else {
    cfg = load_config(*config_path);
  }
  if (seed) cfg.seed = *seed;
  if (trials) {
    cfg.n_trials = *trials;
    if (cfg.fringe_trials_per_point) cfg.fringe_trials_per_point = *trials;
  }
  check_runnable(cfg);
  const std::vector<double> windows = windows_or_default(window_texts, cfg.memory.coincidence_window);
  prepare_dir(out_dir);
  write_manifest(out_dir, cfg);
  const std::string manifest = manifest_line(config_digest(cfg), cfg.seed, experiment_name(cfg.experiment));

  if (is_g2_experiment(cfg.experiment)) {
    const EventLog log = run_g2_experiment(cfg, threads);
    {
      auto out = open_output(out_dir / "events.log");
      write_event_log(out, log, cfg);
      if (!out) throw IoError("failed writing event log");
    }
    report_g2(out_dir, log, cfg, windows);
  } else if (is_fringe_experiment(cfg.experiment)) {
    const FringeSummary s = summarize_fringe(run_fringe_scan(cfg, threads), cfg);
    write_table(out_dir, "fringe_points", manifest, fringe_points_table(s));
    write_table(out_dir, "estimates", manifest, fringe_fit_table(s));
    write_aligned(std::cout, manifest, fringe_fit_table(s));
  } else {
    const SweepSummary s = summarize_sweep(run_ts_sweep(cfg, threads), cfg.memory.tau_afc);
    write_table(out_dir, "sweep", manifest, sweep_table(s));
    write_table(out_dir, "estimates", manifest, sweep_fit_table(s));
    write_aligned(std::cout, manifest, sweep_table(s));
    write_aligned(std::cout, manifest, sweep_fit_table(s));
  }
  std::cerr << "wrote " << out_dir.string() << '\n';
  return 0;
}

int cmd_reproduce(const fs::path& out_dir, unsigned threads) {
  prepare_dir(out_dir);
  const Reproduction r = reproduce_paper(threads);
  const std::string manifest = manifest_line(config_digest(calibrated_baseline()), 0, "paper-table");
  write_table(out_dir, "paper_table", manifest, reproduction_table(r));
  write_table(out_dir, "sweep", manifest, sweep_table(r.sweep));
  write_table(out_dir, "sweep_fits", manifest, sweep_fit_table(r.sweep));
  write_table(out_dir, "afc_fringe_points", manifest, fringe_points_table(r.afc_fringe));
  write_table(out_dir, "sw_fringe_points", manifest, fringe_points_table(r.sw_fringe));
  write_aligned(std::cout, manifest, reproduction_table(r));
  return 0;
}

int cmd_analyze(const fs::path& log_path, const fs::path& out_dir, const std::vector<std::string>& window_texts) {
  std::ifstream in(log_path, std::ios::binary);
  if (!in) throw IoError("cannot open " + log_path.string());
  const LoadedLog loaded = read_event_log(in);
  const std::vector<double> windows = windows_or_default(window_texts, loaded.config.memory.coincidence_window);
  prepare_dir(out_dir);
  report_g2(out_dir, loaded.log, loaded.config, windows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo simulator for a telecom photon / solid-state memory entanglement link"};
  app.require_subcommand(1);

  std::optional<std::string> config_path, preset;
  std::optional<std::uint64_t> seed, trials;
  std::string out_text;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::string> windows;

  auto* sim = app.add_subcommand("simulate", "run one experiment from a config file or preset");
  sim->add_option("--config", config_path, "experiment config (JSON)");
  sim->add_option("--preset", preset, "input-g2, afc-g2, sw-g2, afc-fringe, sw-fringe, ts-sweep");
  sim->add_option("--seed", seed, "override the config seed");
  sim->add_option("--trials", trials, "override the trial count");
  sim->add_option("--out", out_text, "output directory (default $ENTLINK_OUT or ./entlink-out)");
  sim->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  sim->add_option("--window", windows, "g2 analysis window(s), e.g. 280ns,560ns")->delimiter(',');

  auto* rep = app.add_subcommand("reproduce", "run every preset and compare with the measured values");
  rep->add_option("--out", out_text, "output directory");
  rep->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  std::string log_path;
  auto* ana = app.add_subcommand("analyze", "re-analyze a saved event log");
  ana->add_option("eventlog", log_path, "event log written by simulate")->required();
  ana->add_option("--out", out_text, "output directory");
  ana->add_option("--window", windows, "g2 analysis window(s)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }
  const fs::path out_dir = out_text.empty() ? default_out_dir() : fs::path(out_text);

  try {
    if (*sim) return cmd_simulate(config_path, preset, seed, trials, out_dir, threads, windows);
    if (*rep) return cmd_reproduce(out_dir, threads);
    return cmd_analyze(log_path, out_dir, windows);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
