#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "isac/admm.hpp"
#include "isac/signal_model.hpp"

namespace isac {

/// How the unit-norm designed block is scaled before it meets the channel.
/// Noise variance is always 1 / SNR.
enum class SnrConvention {
  /// Scale by ||x_comm||: the zero-forcing direction then delivers S exactly,
  /// so zero MUI means SINR = SNR.
  kZfGain,
  /// Transmit the unit-norm block as is.
  kUnitBlock,
  /// Scale by sqrt(L): unit average power per time sample.
  kPerSample,
};

SnrConvention parse_snr_convention(std::string_view name);
std::string_view snr_convention_name(SnrConvention c);
double transmit_gain(SnrConvention c, const CVector& x_comm, int n_samples);

/// PAPR caps, remembered in the unit they were written in.
struct EtaGrid {
  std::vector<double> values{2.0};
  bool in_db = false;

  double linear(std::size_t i) const;
  std::string label(std::size_t i) const;
  std::size_t size() const { return values.size(); }

  bool operator==(const EtaGrid&) const = default;
};

struct ExperimentConfig {
  int n_antennas = 4;
  int k_users = 2;
  int n_samples = 16;
  double spacing_over_wavelength = 0.5;
  std::vector<double> rho_grid{1.0};
  EtaGrid eta_grid;
  std::vector<double> epsilon_grid{1.0};
  std::vector<double> snr_grid_db{10.0};
  int n_trials = 200;
  std::uint64_t base_seed = 1;
  ConstellationKind constellation = ConstellationKind::kQpsk;
  int m_iter = 2000;
  double feasibility_tolerance = 1e-3;
  bool early_stop = false;
  SnrConvention snr_convention = SnrConvention::kZfGain;
  std::int64_t min_errors = 100;
  std::int64_t max_symbols = 1'000'000;
  int threads = 1;

  void validate() const;
};

struct CurveTable {
  std::string axis_name;
  std::vector<double> axis_values;
  std::vector<std::pair<std::string, std::vector<double>>> series;
  nlohmann::json metadata = nlohmann::json::object();

  const std::vector<double>& at(const std::string& label) const;
  bool has(const std::string& label) const;
};

/// A trial failed inside the solver; carries the failing trial index.
class TrialError : public std::runtime_error {
 public:
  TrialError(int trial, const std::string& what, bool singular_channel = false);
  int trial() const { return trial_; }
  /// The failure was a SingularityError from the zero-forcing step.
  bool singular_channel() const { return singular_channel_; }

 private:
  int trial_;
  bool singular_channel_;
};

struct TrialDraw {
  ChannelRealization channel;
  SymbolBlock symbols;
};

/// Channel and symbols of one trial, from independent streams of (base_seed, trial).
TrialDraw draw_trial(const ExperimentConfig& cfg, int trial);

ProblemSpec make_problem(const ExperimentConfig& cfg, const TrialDraw& draw, double epsilon,
                         double eta_linear, double rho);

/// Runs body(i) for i in [0, count) on `threads` workers. Each index is
/// processed exactly once; the lowest failing index is rethrown as TrialError.
void parallel_trials(int count, int threads, const std::function<void(int)>& body);

/// Index of the nearest constellation point; ties go to the lowest index.
std::size_t detect_nearest(Complex received, const Constellation& constellation);

/// Threshold grid of the CCDF, 0 to 10 dB in 0.05 dB steps.
std::vector<double> ccdf_gamma_grid_db();

CurveTable run_ccdf(const ExperimentConfig& cfg);
CurveTable run_sumrate(const ExperimentConfig& cfg);
CurveTable run_ser(const ExperimentConfig& cfg);

}  // namespace isac
