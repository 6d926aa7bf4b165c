#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "isac/admm.hpp"
#include "isac/montecarlo.hpp"

namespace isac {

/// Invalid configuration; `path()` is the dotted field path ("design.eta").
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string path, const std::string& message);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct SystemSection {
  int n_antennas = 4;
  int k_users = 2;
  int n_samples = 16;
  double spacing_over_wavelength = 0.5;
  ConstellationKind constellation = ConstellationKind::kQpsk;
  SnrConvention snr_convention = SnrConvention::kZfGain;

  bool operator==(const SystemSection&) const = default;
};

struct SolverSection {
  int max_iterations = 2000;
  double feasibility_tolerance = 1e-3;
  bool early_stop = false;

  bool operator==(const SolverSection&) const = default;
};

struct DesignSection {
  double epsilon = 1.0;
  double eta = 2.0;
  bool eta_in_db = false;
  double rho = 1.0;
  double snr_db = 10.0;
  std::optional<std::uint64_t> channel_seed;
  std::optional<std::uint64_t> symbol_seed;

  double eta_linear() const;
  bool operator==(const DesignSection&) const = default;
};

struct ExperimentSection {
  std::vector<double> rho_grid{1.0};
  EtaGrid eta_grid;
  std::vector<double> epsilon_grid{1.0};
  std::vector<double> snr_grid_db{10.0};
  int n_trials = 200;
  std::uint64_t base_seed = 1;
  std::int64_t min_errors = 100;
  std::int64_t max_symbols = 1'000'000;

  bool operator==(const ExperimentSection&) const = default;
};

/// Everything a run needs. Serialized as a JSON object with one member per section.
struct RunConfig {
  SystemSection system;
  SolverSection solver;
  DesignSection design;
  ExperimentSection experiment;

  bool operator==(const RunConfig&) const = default;
};

/// Strict parse: unknown sections or keys, wrong types and out-of-range values
/// throw ConfigError naming the field.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(std::string_view text);
nlohmann::json to_json(const RunConfig& cfg);

/// Applies "section.key=value". The value is read as JSON when it parses,
/// otherwise as a string. Setting eta drops eta_db (and vice versa).
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Collects ISAC_<SECTION>__<KEY>=value pairs as "section.key=value" overrides,
/// sorted by key.
std::vector<std::string> environment_overrides(const char* const* envp);

ExperimentConfig to_experiment(const RunConfig& cfg, int threads = 1);

/// Problem for the design command; throws ConfigError if a seed is missing or
/// SpecError if the resulting problem is invalid.
ProblemSpec to_problem(const RunConfig& cfg);

}  // namespace isac
