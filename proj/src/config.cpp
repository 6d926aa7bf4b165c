#include "isac/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>

#include "isac/errors.hpp"
#include "isac/kpi.hpp"

namespace isac {

namespace {

using nlohmann::json;

// Reads the members of one section, remembering which keys were consumed so
// leftovers can be reported as unknown.
class SectionReader {
 public:
  SectionReader(const json& doc, std::string name) : name_(std::move(name)) {
    if (doc.contains(name_)) {
      section_ = &doc.at(name_);
      if (!section_->is_object()) throw ConfigError(name_, "expected an object");
    }
  }

  std::string path(std::string_view key) const { return name_ + "." + std::string(key); }
  bool has(std::string_view key) const {
    return section_ != nullptr && section_->contains(std::string(key));
  }

  const json* take(std::string_view key) {
    if (!has(key)) return nullptr;
    seen_.insert(std::string(key));
    return &section_->at(std::string(key));
  }

  void integer(std::string_view key, int& out, long long min_value) {
    long long v = out;
    integer64(key, v, min_value);
    if (v > std::numeric_limits<int>::max()) throw ConfigError(path(key), "value too large");
    out = static_cast<int>(v);
  }

  void integer64(std::string_view key, long long& out, long long min_value) {
    const json* v = take(key);
    if (v == nullptr) return;
    if (!v->is_number_integer()) throw ConfigError(path(key), "expected an integer");
    const long long x = v->get<long long>();
    if (x < min_value) {
      throw ConfigError(path(key), "must be >= " + std::to_string(min_value));
    }
    out = x;
  }

  void integer64(std::string_view key, std::int64_t& out, long long min_value) {
    long long v = out;
    integer64(key, v, min_value);
    out = v;
  }

  void seed(std::string_view key, std::uint64_t& out) {
    const json* v = take(key);
    if (v == nullptr) return;
    out = as_seed(key, *v);
  }

  void seed(std::string_view key, std::optional<std::uint64_t>& out) {
    const json* v = take(key);
    if (v == nullptr) return;
    out = as_seed(key, *v);
  }

  void real(std::string_view key, double& out) {
    const json* v = take(key);
    if (v == nullptr) return;
    out = as_real(path(key), *v);
  }

  void boolean(std::string_view key, bool& out) {
    const json* v = take(key);
    if (v == nullptr) return;
    if (!v->is_boolean()) throw ConfigError(path(key), "expected true or false");
    out = v->get<bool>();
  }

  void reals(std::string_view key, std::vector<double>& out) {
    const json* v = take(key);
    if (v == nullptr) return;
    if (v->is_number()) {
      out = {as_real(path(key), *v)};
      return;
    }
    if (!v->is_array() || v->empty()) {
      throw ConfigError(path(key), "expected a non-empty array of numbers");
    }
    out.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      out.push_back(as_real(path(key) + "[" + std::to_string(i) + "]", v->at(i)));
    }
  }

  std::optional<std::string> text(std::string_view key) {
    const json* v = take(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_string()) throw ConfigError(path(key), "expected a string");
    return v->get<std::string>();
  }

  void reject_unknown() const {
    if (section_ == nullptr) return;
    for (const auto& [key, _] : section_->items()) {
      if (!seen_.contains(key)) throw ConfigError(path(key), "unknown key");
    }
  }

 private:
  static double as_real(const std::string& where, const json& v) {
    if (!v.is_number()) throw ConfigError(where, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where, "must be finite");
    return x;
  }

  std::uint64_t as_seed(std::string_view key, const json& v) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) {
      return static_cast<std::uint64_t>(v.get<long long>());
    }
    throw ConfigError(path(key), "expected a non-negative integer seed");
  }

  std::string name_;
  const json* section_ = nullptr;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) throw ConfigError(path, message);
}

}  // namespace

ConfigError::ConfigError(std::string path, const std::string& message)
    : std::invalid_argument(path + ": " + message), path_(std::move(path)) {}

double DesignSection::eta_linear() const { return eta_in_db ? from_db(eta) : eta; }

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("<root>", "expected a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "system" && key != "solver" && key != "design" && key != "experiment") {
      throw ConfigError(key, "unknown section");
    }
  }
  RunConfig cfg;

  SectionReader sys(doc, "system");
  sys.integer("n_antennas", cfg.system.n_antennas, 1);
  sys.integer("k_users", cfg.system.k_users, 1);
  sys.integer("n_samples", cfg.system.n_samples, 1);
  sys.real("spacing_over_wavelength", cfg.system.spacing_over_wavelength);
  if (auto c = sys.text("constellation")) {
    try {
      cfg.system.constellation = parse_constellation(*c);
    } catch (const SpecError& e) {
      throw ConfigError(sys.path("constellation"), e.what());
    }
  }
  if (auto c = sys.text("snr_convention")) {
    try {
      cfg.system.snr_convention = parse_snr_convention(*c);
    } catch (const SpecError& e) {
      throw ConfigError(sys.path("snr_convention"), e.what());
    }
  }
  sys.reject_unknown();
  require(cfg.system.k_users <= cfg.system.n_antennas, "system.k_users",
          "must not exceed system.n_antennas");
  require(cfg.system.spacing_over_wavelength > 0.0, "system.spacing_over_wavelength",
          "must be > 0");
  const double block = static_cast<double>(cfg.system.n_antennas) * cfg.system.n_samples;

  SectionReader sol(doc, "solver");
  sol.integer("max_iterations", cfg.solver.max_iterations, 1);
  sol.real("feasibility_tolerance", cfg.solver.feasibility_tolerance);
  sol.boolean("early_stop", cfg.solver.early_stop);
  sol.reject_unknown();
  require(cfg.solver.feasibility_tolerance > 0.0, "solver.feasibility_tolerance", "must be > 0");

  SectionReader des(doc, "design");
  des.real("epsilon", cfg.design.epsilon);
  require(des.has("eta") + des.has("eta_db") <= 1, "design.eta",
          "give exactly one of eta (linear) or eta_db");
  if (des.has("eta_db")) {
    des.real("eta_db", cfg.design.eta);
    cfg.design.eta_in_db = true;
  } else {
    des.real("eta", cfg.design.eta);
  }
  des.real("rho", cfg.design.rho);
  des.real("snr_db", cfg.design.snr_db);
  des.seed("channel_seed", cfg.design.channel_seed);
  des.seed("symbol_seed", cfg.design.symbol_seed);
  des.reject_unknown();
  require(cfg.design.epsilon >= 0.0, "design.epsilon", "must be >= 0");
  require(cfg.design.rho > 0.0, "design.rho", "must be > 0");
  {
    const double eta = cfg.design.eta_linear();
    const std::string where = cfg.design.eta_in_db ? "design.eta_db" : "design.eta";
    require(eta >= 1.0 - 1e-12 && eta <= block * (1.0 + 1e-12), where,
            "PAPR cap must lie in [1, N*L] (linear)");
  }

  SectionReader exp(doc, "experiment");
  exp.reals("rho_grid", cfg.experiment.rho_grid);
  require(exp.has("eta_grid") + exp.has("eta_grid_db") <= 1, "experiment.eta_grid",
          "give exactly one of eta_grid (linear) or eta_grid_db");
  if (exp.has("eta_grid_db")) {
    exp.reals("eta_grid_db", cfg.experiment.eta_grid.values);
    cfg.experiment.eta_grid.in_db = true;
  } else {
    exp.reals("eta_grid", cfg.experiment.eta_grid.values);
  }
  exp.reals("epsilon_grid", cfg.experiment.epsilon_grid);
  exp.reals("snr_grid_db", cfg.experiment.snr_grid_db);
  exp.integer("n_trials", cfg.experiment.n_trials, 1);
  exp.seed("base_seed", cfg.experiment.base_seed);
  exp.integer64("min_errors", cfg.experiment.min_errors, 0);
  exp.integer64("max_symbols", cfg.experiment.max_symbols, 1);
  exp.reject_unknown();
  for (double r : cfg.experiment.rho_grid) require(r > 0.0, "experiment.rho_grid", "values must be > 0");
  for (double e : cfg.experiment.epsilon_grid) {
    require(e >= 0.0, "experiment.epsilon_grid", "values must be >= 0");
  }
  for (std::size_t i = 0; i < cfg.experiment.eta_grid.size(); ++i) {
    const double eta = cfg.experiment.eta_grid.linear(i);
    require(eta >= 1.0 - 1e-12 && eta <= block * (1.0 + 1e-12),
            cfg.experiment.eta_grid.in_db ? "experiment.eta_grid_db" : "experiment.eta_grid",
            "PAPR caps must lie in [1, N*L] (linear)");
  }
  return cfg;
}

RunConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
  json design = {{"epsilon", cfg.design.epsilon},
                 {cfg.design.eta_in_db ? "eta_db" : "eta", cfg.design.eta},
                 {"rho", cfg.design.rho},
                 {"snr_db", cfg.design.snr_db}};
  if (cfg.design.channel_seed) design["channel_seed"] = *cfg.design.channel_seed;
  if (cfg.design.symbol_seed) design["symbol_seed"] = *cfg.design.symbol_seed;
  const auto& e = cfg.experiment;
  return {{"system",
           {{"n_antennas", cfg.system.n_antennas},
            {"k_users", cfg.system.k_users},
            {"n_samples", cfg.system.n_samples},
            {"spacing_over_wavelength", cfg.system.spacing_over_wavelength},
            {"constellation", std::string(constellation_name(cfg.system.constellation))},
            {"snr_convention", std::string(snr_convention_name(cfg.system.snr_convention))}}},
          {"solver",
           {{"max_iterations", cfg.solver.max_iterations},
            {"feasibility_tolerance", cfg.solver.feasibility_tolerance},
            {"early_stop", cfg.solver.early_stop}}},
          {"design", std::move(design)},
          {"experiment",
           {{"rho_grid", e.rho_grid},
            {e.eta_grid.in_db ? "eta_grid_db" : "eta_grid", e.eta_grid.values},
            {"epsilon_grid", e.epsilon_grid},
            {"snr_grid_db", e.snr_grid_db},
            {"n_trials", e.n_trials},
            {"base_seed", e.base_seed},
            {"min_errors", e.min_errors},
            {"max_symbols", e.max_symbols}}}};
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError(std::string(assignment), "override must look like section.key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  const auto dot = key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == key.size() ||
      key.find('.', dot + 1) != std::string::npos) {
    throw ConfigError(key, "override key must look like section.key");
  }
  const std::string section = key.substr(0, dot);
  const std::string field = key.substr(dot + 1);

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  if (!doc.is_object()) doc = json::object();
  json& sec = doc[section];
  if (!sec.is_object()) sec = json::object();
  static constexpr std::pair<std::string_view, std::string_view> kExclusive[] = {
      {"eta", "eta_db"}, {"eta_grid", "eta_grid_db"}};
  for (const auto& [a, b] : kExclusive) {
    if (field == a) sec.erase(std::string(b));
    if (field == b) sec.erase(std::string(a));
  }
  sec[field] = std::move(value);
}

std::vector<std::string> environment_overrides(const char* const* envp) {
  std::vector<std::string> out;
  if (envp == nullptr) return out;
  constexpr std::string_view kPrefix = "ISAC_";
  for (const char* const* e = envp; *e != nullptr; ++e) {
    const std::string_view entry(*e);
    if (!entry.starts_with(kPrefix)) continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    std::string name(entry.substr(kPrefix.size(), eq - kPrefix.size()));
    const auto sep = name.find("__");
    if (sep == std::string::npos) continue;
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    out.push_back(name.substr(0, sep) + "." + name.substr(sep + 2) + "=" +
                  std::string(entry.substr(eq + 1)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

ExperimentConfig to_experiment(const RunConfig& cfg, int threads) {
  ExperimentConfig e;
  e.n_antennas = cfg.system.n_antennas;
  e.k_users = cfg.system.k_users;
  e.n_samples = cfg.system.n_samples;
  e.spacing_over_wavelength = cfg.system.spacing_over_wavelength;
  e.constellation = cfg.system.constellation;
  e.snr_convention = cfg.system.snr_convention;
  e.rho_grid = cfg.experiment.rho_grid;
  e.eta_grid = cfg.experiment.eta_grid;
  e.epsilon_grid = cfg.experiment.epsilon_grid;
  e.snr_grid_db = cfg.experiment.snr_grid_db;
  e.n_trials = cfg.experiment.n_trials;
  e.base_seed = cfg.experiment.base_seed;
  e.min_errors = cfg.experiment.min_errors;
  e.max_symbols = cfg.experiment.max_symbols;
  e.m_iter = cfg.solver.max_iterations;
  e.feasibility_tolerance = cfg.solver.feasibility_tolerance;
  e.early_stop = cfg.solver.early_stop;
  e.threads = threads;
  return e;
}

ProblemSpec to_problem(const RunConfig& cfg) {
  if (!cfg.design.channel_seed) {
    throw ConfigError("design.channel_seed", "required by the design command");
  }
  if (!cfg.design.symbol_seed) {
    throw ConfigError("design.symbol_seed", "required by the design command");
  }
  const ArrayConfig array{cfg.system.n_antennas, cfg.system.spacing_over_wavelength};
  ProblemSpec spec;
  spec.channel = draw_channel(cfg.system.k_users, array, 1.0 / from_db(cfg.design.snr_db),
                              *cfg.design.channel_seed);
  spec.symbols = draw_symbols(cfg.system.k_users, cfg.system.n_samples, cfg.system.constellation,
                              *cfg.design.symbol_seed);
  spec.reference = chirp_reference(cfg.system.n_antennas, cfg.system.n_samples);
  spec.epsilon = cfg.design.epsilon;
  spec.eta = std::clamp(cfg.design.eta_linear(), 1.0,
                        static_cast<double>(cfg.system.n_antennas) * cfg.system.n_samples);
  spec.rho = cfg.design.rho;
  spec.max_iterations = cfg.solver.max_iterations;
  spec.feasibility_tolerance = cfg.solver.feasibility_tolerance;
  spec.early_stop = cfg.solver.early_stop;
  return spec;
}

}  // namespace isac
