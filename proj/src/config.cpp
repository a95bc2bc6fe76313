#include "entlink/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "entlink/error.hpp"
#include "entlink/units.hpp"

namespace entlink {

using nlohmann::json;

namespace {

// Reads fields of one JSON object, collecting errors with dotted paths.
class Reader {
 public:
  Reader(const json& obj, std::string path, std::vector<std::string>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {
    if (!obj_.is_object()) {
      fail("", "must be an object");
    }
  }

  ~Reader() {
    if (!obj_.is_object()) return;
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.contains(key)) fail(key, "unknown field");
    }
  }

  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  void quantity(const char* key, double& out, Dimension dim) {
    const json* v = find(key);
    if (!v) return;
    try {
      if (v->is_number()) {
        out = v->get<double>();
      } else if (v->is_string()) {
        out = parse_quantity(v->get<std::string>(), dim);
      } else {
        fail(key, "expected a number or a unit-suffixed string");
      }
    } catch (const ParseError& e) {
      fail(key, e.what());
    }
  }

  void quantity_list(const char* key, std::vector<double>& out, Dimension dim) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_array()) {
      fail(key, "expected a list");
      return;
    }
    out.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& item = (*v)[i];
      try {
        if (item.is_number()) {
          out.push_back(item.get<double>());
        } else if (item.is_string()) {
          out.push_back(parse_quantity(item.get<std::string>(), dim));
        } else {
          fail(std::string(key) + "[" + std::to_string(i) + "]", "expected a number or unit string");
        }
      } catch (const ParseError& e) {
        fail(std::string(key) + "[" + std::to_string(i) + "]", e.what());
      }
    }
  }

  template <typename Int>
  void integer(const char* key, Int& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_number_integer() || (std::is_unsigned_v<Int> && v->get<long long>() < 0 && !v->is_number_unsigned())) {
      fail(key, "expected a non-negative integer");
      return;
    }
    out = v->get<Int>();
  }

  const json* object(const char* key) { return find(key); }

  std::string path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }
  void fail(const std::string& key, const std::string& msg) {
    errors_.push_back((key.empty() ? path_ : path(key.c_str())) + ": " + msg);
  }

 private:
  const json* find(const char* key) {
    seen_.insert(key);
    if (!obj_.is_object()) return nullptr;
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  const json& obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

json source_json(const SourceParams& s) {
  return {{"mean_pairs_per_window", s.mean_pairs_per_window},
          {"slot_width", s.slot_width},
          {"tau_pair", s.tau_pair},
          {"tau_pump", s.tau_pump},
          {"n_freq_modes", s.n_freq_modes},
          {"mode_spacing", s.mode_spacing},
          {"signal_wavelength", s.signal_wavelength},
          {"idler_wavelength", s.idler_wavelength},
          {"pump_off_delay", s.pump_off_delay},
          {"pump_off_duration", s.pump_off_duration},
          {"idler_out_of_band_suppression", s.idler_out_of_band_suppression}};
}

void read_source(const json& j, SourceParams& s, std::vector<std::string>& errors) {
  Reader r(j, "source", errors);
  r.quantity("mean_pairs_per_window", s.mean_pairs_per_window, Dimension::Dimensionless);
  r.quantity("slot_width", s.slot_width, Dimension::Time);
  r.quantity("tau_pair", s.tau_pair, Dimension::Time);
  r.quantity("tau_pump", s.tau_pump, Dimension::Time);
  r.integer("n_freq_modes", s.n_freq_modes);
  r.quantity("mode_spacing", s.mode_spacing, Dimension::Frequency);
  r.quantity("signal_wavelength", s.signal_wavelength, Dimension::Length);
  r.quantity("idler_wavelength", s.idler_wavelength, Dimension::Length);
  r.quantity("pump_off_delay", s.pump_off_delay, Dimension::Time);
  r.quantity("pump_off_duration", s.pump_off_duration, Dimension::Time);
  r.quantity("idler_out_of_band_suppression", s.idler_out_of_band_suppression, Dimension::Dimensionless);
}

json memory_json(const MemoryParams& m) {
  return {{"eta_afc", m.eta_afc},
          {"tau_afc", m.tau_afc},
          {"a_eta", m.a_eta},
          {"gamma_inhom", m.gamma_inhom},
          {"noise_per_trial", m.noise_per_trial},
          {"cp_width", m.cp_width},
          {"trial_spacing", m.trial_spacing},
          {"coincidence_window", m.coincidence_window},
          {"transparency_transmission", m.transparency_transmission}};
}

void read_memory(const json& j, MemoryParams& m, std::vector<std::string>& errors) {
  Reader r(j, "memory", errors);
  r.quantity("eta_afc", m.eta_afc, Dimension::Dimensionless);
  r.quantity("tau_afc", m.tau_afc, Dimension::Time);
  r.quantity("a_eta", m.a_eta, Dimension::Dimensionless);
  r.quantity("gamma_inhom", m.gamma_inhom, Dimension::Frequency);
  r.quantity("noise_per_trial", m.noise_per_trial, Dimension::Dimensionless);
  r.quantity("cp_width", m.cp_width, Dimension::Time);
  r.quantity("trial_spacing", m.trial_spacing, Dimension::Time);
  r.quantity("coincidence_window", m.coincidence_window, Dimension::Time);
  r.quantity("transparency_transmission", m.transparency_transmission, Dimension::Dimensionless);
}

json filter_json(const FilterParams& f) {
  return {{"window_width", f.window_width},
          {"od_outside", f.od_outside},
          {"etalon_transmission", f.etalon_transmission},
          {"bandpass_transmission", f.bandpass_transmission},
          {"pbs_unpolarized_rejection", f.pbs_unpolarized_rejection}};
}

void read_filter(const json& j, FilterParams& f, std::vector<std::string>& errors) {
  Reader r(j, "filter", errors);
  r.quantity("window_width", f.window_width, Dimension::Frequency);
  r.quantity("od_outside", f.od_outside, Dimension::Dimensionless);
  r.quantity("etalon_transmission", f.etalon_transmission, Dimension::Dimensionless);
  r.quantity("bandpass_transmission", f.bandpass_transmission, Dimension::Dimensionless);
  r.quantity("pbs_unpolarized_rejection", f.pbs_unpolarized_rejection, Dimension::Dimensionless);
}

json analyzer_json(const AnalyzerParams& a) {
  json sig;
  if (const auto* two = std::get_if<TwoCombAfc>(&a.signal_analyzer)) {
    sig = {{"type", "two-comb-afc"}, {"t_short", two->t_short}, {"t_long", two->t_long}};
  } else {
    sig = {{"type", "transmit-or-store"}, {"t_store", std::get<TransmitOrStore>(a.signal_analyzer).t_store}};
  }
  return {{"tau_mz", a.tau_mz},
          {"phase_idler", a.phase_idler},
          {"phase_signal", a.phase_signal},
          {"analyzer_visibility", a.analyzer_visibility},
          {"p_short", a.p_short},
          {"p_long", a.p_long},
          {"signal_analyzer", sig}};
}

void read_analyzer(const json& j, AnalyzerParams& a, std::vector<std::string>& errors) {
  Reader r(j, "analyzer", errors);
  r.quantity("tau_mz", a.tau_mz, Dimension::Time);
  r.quantity("phase_idler", a.phase_idler, Dimension::Phase);
  r.quantity("phase_signal", a.phase_signal, Dimension::Phase);
  r.quantity("analyzer_visibility", a.analyzer_visibility, Dimension::Dimensionless);
  r.quantity("p_short", a.p_short, Dimension::Dimensionless);
  r.quantity("p_long", a.p_long, Dimension::Dimensionless);
  if (const json* sig = r.object("signal_analyzer")) {
    Reader s(*sig, "analyzer.signal_analyzer", errors);
    std::string type = "two-comb-afc";
    if (const json* t = s.object("type")) {
      if (t->is_string()) type = t->get<std::string>();
      else s.fail("type", "expected a string");
    }
    if (type == "two-comb-afc") {
      TwoCombAfc two = std::holds_alternative<TwoCombAfc>(a.signal_analyzer) ? std::get<TwoCombAfc>(a.signal_analyzer)
                                                                              : TwoCombAfc{};
      s.quantity("t_short", two.t_short, Dimension::Time);
      s.quantity("t_long", two.t_long, Dimension::Time);
      a.signal_analyzer = two;
    } else if (type == "transmit-or-store") {
      TransmitOrStore tos = std::holds_alternative<TransmitOrStore>(a.signal_analyzer)
                                ? std::get<TransmitOrStore>(a.signal_analyzer)
                                : TransmitOrStore{};
      s.quantity("t_store", tos.t_store, Dimension::Time);
      a.signal_analyzer = tos;
    } else {
      s.fail("type", "expected 'two-comb-afc' or 'transmit-or-store'");
    }
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> field_errors)
    : std::runtime_error([&] {
        std::string msg = "invalid configuration:";
        for (const auto& e : field_errors) msg += "\n  " + e;
        return msg;
      }()),
      field_errors_(std::move(field_errors)) {}

json to_json(const ExperimentConfig& c) {
  json j = {{"experiment", std::string(experiment_name(c.experiment))},
            {"seed", c.seed},
            {"n_trials", c.n_trials},
            {"detector_efficiency_signal", c.detector_efficiency_signal},
            {"detector_efficiency_idler", c.detector_efficiency_idler},
            {"t_s", c.t_s},
            {"t_s_list", c.t_s_list},
            {"phase_list", c.phase_list},
            {"noise_trials_per_herald", c.noise_trials_per_herald},
            {"fringe_trials_per_point", c.fringe_trials_per_point},
            {"source", source_json(c.source)},
            {"memory", memory_json(c.memory)},
            {"filter", filter_json(c.filter)}};
  if (c.analyzer) j["analyzer"] = analyzer_json(*c.analyzer);
  return j;
}

ExperimentConfig config_from_json(const json& tree) {
  ExperimentConfig c;
  std::vector<std::string> errors;
  {
    Reader r(tree, "", errors);
    if (const json* e = r.object("experiment")) {
      const auto kind = e->is_string() ? parse_experiment(e->get<std::string>()) : std::nullopt;
      if (kind) c.experiment = *kind;
      else r.fail("experiment", "unknown experiment");
    }
    r.integer("seed", c.seed);
    r.integer("n_trials", c.n_trials);
    r.quantity("detector_efficiency_signal", c.detector_efficiency_signal, Dimension::Dimensionless);
    r.quantity("detector_efficiency_idler", c.detector_efficiency_idler, Dimension::Dimensionless);
    r.quantity("t_s", c.t_s, Dimension::Time);
    r.quantity_list("t_s_list", c.t_s_list, Dimension::Time);
    r.quantity_list("phase_list", c.phase_list, Dimension::Phase);
    r.integer("noise_trials_per_herald", c.noise_trials_per_herald);
    r.integer("fringe_trials_per_point", c.fringe_trials_per_point);
    if (const json* s = r.object("source")) read_source(*s, c.source, errors);
    if (const json* m = r.object("memory")) read_memory(*m, c.memory, errors);
    if (const json* f = r.object("filter")) read_filter(*f, c.filter, errors);
    if (const json* a = r.object("analyzer")) {
      if (!a->is_null()) {
        AnalyzerParams params;
        read_analyzer(*a, params, errors);
        c.analyzer = params;
      }
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path.string() + ": cannot open config file"});
  json tree;
  try {
    tree = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError({path.string() + ": " + e.what()});
  }
  return config_from_json(tree);
}

std::string serialize_config(const ExperimentConfig& config) { return to_json(config).dump(); }

std::string config_digest(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : serialize_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

}  // namespace entlink
