#include "isac/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "isac/errors.hpp"
#include "isac/kpi.hpp"
#include "isac/output.hpp"

namespace isac {

namespace {

constexpr std::uint64_t kChannelTag = 1;
constexpr std::uint64_t kSymbolTag = 2;
constexpr std::uint64_t kNoiseTag = 3;

const char* kProvenance = "isac-waveform " ISAC_VERSION;

struct Knobs {
  double rho;
  std::size_t eta_index;
  double epsilon;
};

// Every (rho, eta, epsilon) combination in grid order.
std::vector<Knobs> knob_grid(const ExperimentConfig& cfg) {
  std::vector<Knobs> out;
  for (double rho : cfg.rho_grid) {
    for (std::size_t e = 0; e < cfg.eta_grid.size(); ++e) {
      for (double eps : cfg.epsilon_grid) out.push_back({rho, e, eps});
    }
  }
  return out;
}

struct LabelParts {
  bool rho;
  bool eta;
  bool epsilon;
};

std::string knob_label(const ExperimentConfig& cfg, const Knobs& k, LabelParts parts,
                       std::string prefix = {}) {
  std::string label = std::move(prefix);
  auto append = [&label](const std::string& piece) {
    if (!label.empty()) label += ' ';
    label += piece;
  };
  if (parts.rho) append("rho=" + format_number(k.rho));
  if (parts.eta) append("eta=" + cfg.eta_grid.label(k.eta_index));
  if (parts.epsilon) append("eps=" + format_number(k.epsilon));
  return label;
}

double rate_per_user(const ChannelRealization& h, const SymbolBlock& s, const CVector& x_tx,
                     int n_antennas, int n_samples, double noise_variance) {
  const Waveform x = Waveform::from_vec(x_tx, n_antennas, n_samples);
  const auto sinr = sinr_per_user(h, x, s, noise_variance);
  return sum_rate(sinr) / static_cast<double>(sinr.size());
}

struct MeanAccumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::int64_t count = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++count;
  }
  double mean() const { return sum / static_cast<double>(count); }
  double standard_error() const {
    if (count < 2) return 0.0;
    const double n = static_cast<double>(count);
    const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
    return std::sqrt(var / n);
  }
};

nlohmann::json config_echo(const ExperimentConfig& cfg) {
  nlohmann::json eta = cfg.eta_grid.values;
  return {{"n_antennas", cfg.n_antennas},
          {"k_users", cfg.k_users},
          {"n_samples", cfg.n_samples},
          {"rho_grid", cfg.rho_grid},
          {cfg.eta_grid.in_db ? "eta_grid_db" : "eta_grid", eta},
          {"epsilon_grid", cfg.epsilon_grid},
          {"snr_grid_db", cfg.snr_grid_db},
          {"n_trials", cfg.n_trials},
          {"base_seed", cfg.base_seed},
          {"constellation", std::string(constellation_name(cfg.constellation))},
          {"m_iter", cfg.m_iter},
          {"snr_convention", std::string(snr_convention_name(cfg.snr_convention))}};
}

CurveTable make_table(const ExperimentConfig& cfg, std::string axis_name,
                      std::vector<double> axis_values) {
  CurveTable t;
  t.axis_name = std::move(axis_name);
  t.axis_values = std::move(axis_values);
  t.metadata["config"] = config_echo(cfg);
  t.metadata["provenance"] = kProvenance;
  return t;
}

}  // namespace

SnrConvention parse_snr_convention(std::string_view name) {
  if (name == "zf_gain") return SnrConvention::kZfGain;
  if (name == "unit_block") return SnrConvention::kUnitBlock;
  if (name == "per_sample") return SnrConvention::kPerSample;
  throw SpecError("unknown snr_convention '" + std::string(name) +
                  "' (expected zf_gain, unit_block or per_sample)");
}

std::string_view snr_convention_name(SnrConvention c) {
  switch (c) {
    case SnrConvention::kZfGain: return "zf_gain";
    case SnrConvention::kUnitBlock: return "unit_block";
    case SnrConvention::kPerSample: return "per_sample";
  }
  return "zf_gain";
}

double transmit_gain(SnrConvention c, const CVector& x_comm, int n_samples) {
  switch (c) {
    case SnrConvention::kZfGain: return x_comm.norm();
    case SnrConvention::kUnitBlock: return 1.0;
    case SnrConvention::kPerSample: return std::sqrt(static_cast<double>(n_samples));
  }
  return 1.0;
}

double EtaGrid::linear(std::size_t i) const {
  return in_db ? from_db(values.at(i)) : values.at(i);
}

std::string EtaGrid::label(std::size_t i) const {
  return format_number(values.at(i)) + (in_db ? "dB" : "");
}

void ExperimentConfig::validate() const {
  if (n_antennas < 1) throw SpecError("n_antennas must be >= 1");
  if (k_users < 1 || k_users > n_antennas) {
    throw SpecError("k_users must be in [1, n_antennas]");
  }
  if (n_samples < 1) throw SpecError("n_samples must be >= 1");
  if (!(spacing_over_wavelength > 0.0)) throw SpecError("spacing_over_wavelength must be > 0");
  if (rho_grid.empty() || eta_grid.values.empty() || epsilon_grid.empty() ||
      snr_grid_db.empty()) {
    throw SpecError("experiment grids must be non-empty");
  }
  for (double r : rho_grid) {
    if (!(r > 0.0) || !std::isfinite(r)) throw SpecError("rho values must be > 0");
  }
  const double block = static_cast<double>(n_antennas) * n_samples;
  for (std::size_t i = 0; i < eta_grid.size(); ++i) {
    const double eta = eta_grid.linear(i);
    // 1e-12 slack: 10^(dB/10) may land a hair off the intended linear cap.
    if (!(eta >= 1.0 - 1e-12) || eta > block * (1.0 + 1e-12)) {
      throw SpecError("eta values must lie in [1, N*L] (linear)");
    }
  }
  for (double e : epsilon_grid) {
    if (!(e >= 0.0) || !std::isfinite(e)) throw SpecError("epsilon values must be >= 0");
  }
  for (double s : snr_grid_db) {
    if (!std::isfinite(s)) throw SpecError("snr values must be finite");
  }
  if (n_trials < 1) throw SpecError("n_trials must be >= 1");
  if (m_iter < 1) throw SpecError("m_iter must be >= 1");
  if (!(feasibility_tolerance > 0.0)) throw SpecError("feasibility_tolerance must be > 0");
  if (min_errors < 0) throw SpecError("min_errors must be >= 0");
  if (max_symbols < 1) throw SpecError("max_symbols must be >= 1");
  if (threads < 1) throw SpecError("threads must be >= 1");
}

const std::vector<double>& CurveTable::at(const std::string& label) const {
  for (const auto& [name, values] : series) {
    if (name == label) return values;
  }
  throw std::out_of_range("no series named '" + label + "'");
}

bool CurveTable::has(const std::string& label) const {
  return std::any_of(series.begin(), series.end(),
                     [&](const auto& s) { return s.first == label; });
}

TrialError::TrialError(int trial, const std::string& what, bool singular_channel)
    : std::runtime_error("trial " + std::to_string(trial) + ": " + what),
      trial_(trial),
      singular_channel_(singular_channel) {}

TrialDraw draw_trial(const ExperimentConfig& cfg, int trial) {
  const ArrayConfig array{cfg.n_antennas, cfg.spacing_over_wavelength};
  const auto t = static_cast<std::uint64_t>(trial);
  return TrialDraw{
      draw_channel(cfg.k_users, array, 0.0, derive_seed(cfg.base_seed, t, kChannelTag)),
      draw_symbols(cfg.k_users, cfg.n_samples, cfg.constellation,
                   derive_seed(cfg.base_seed, t, kSymbolTag))};
}

ProblemSpec make_problem(const ExperimentConfig& cfg, const TrialDraw& draw, double epsilon,
                         double eta_linear, double rho) {
  ProblemSpec spec;
  spec.channel = draw.channel;
  spec.symbols = draw.symbols;
  spec.reference = chirp_reference(cfg.n_antennas, cfg.n_samples);
  spec.epsilon = epsilon;
  // dB grids can overshoot 1 or N*L by an ulp; clamp back into the valid range.
  spec.eta = std::clamp(eta_linear, 1.0, static_cast<double>(cfg.n_antennas) * cfg.n_samples);
  spec.rho = rho;
  spec.max_iterations = cfg.m_iter;
  spec.feasibility_tolerance = cfg.feasibility_tolerance;
  spec.early_stop = cfg.early_stop;
  return spec;
}

void parallel_trials(int count, int threads, const std::function<void(int)>& body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(count, 0)));
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      if (failed) return;
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
        failed = true;
      }
    }
  };
  const int n_workers = std::clamp(threads, 1, std::max(count, 1));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  }
  for (int i = 0; i < count; ++i) {
    if (!errors[static_cast<std::size_t>(i)]) continue;
    try {
      std::rethrow_exception(errors[static_cast<std::size_t>(i)]);
    } catch (const SingularityError& e) {
      throw TrialError(i, e.what(), true);
    } catch (const std::exception& e) {
      throw TrialError(i, e.what());
    } catch (...) {
      throw TrialError(i, "unknown failure");
    }
  }
}

std::size_t detect_nearest(Complex received, const Constellation& constellation) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < constellation.points.size(); ++i) {
    const double d = std::norm(received - constellation.points[i]);
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

std::vector<double> ccdf_gamma_grid_db() {
  std::vector<double> grid(201);
  for (int i = 0; i <= 200; ++i) grid[static_cast<std::size_t>(i)] = i / 20.0;
  return grid;
}

CurveTable run_ccdf(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto knobs = knob_grid(cfg);
  std::vector<std::vector<double>> papr_db(knobs.size(),
                                           std::vector<double>(static_cast<std::size_t>(cfg.n_trials)));
  parallel_trials(cfg.n_trials, cfg.threads, [&](int trial) {
    const TrialDraw draw = draw_trial(cfg, trial);
    for (std::size_t c = 0; c < knobs.size(); ++c) {
      const auto& k = knobs[c];
      const SolveResult r =
          solve(make_problem(cfg, draw, k.epsilon, cfg.eta_grid.linear(k.eta_index), k.rho));
      papr_db[c][static_cast<std::size_t>(trial)] = to_db(papr(r.waveform.vec()));
    }
  });

  CurveTable table = make_table(cfg, "gamma_db", ccdf_gamma_grid_db());
  const LabelParts parts{true, true, cfg.epsilon_grid.size() > 1};
  for (std::size_t c = 0; c < knobs.size(); ++c) {
    table.series.emplace_back(knob_label(cfg, knobs[c], parts), ccdf(papr_db[c], table.axis_values));
  }
  table.metadata["n_trials"] = cfg.n_trials;
  return table;
}

CurveTable run_sumrate(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.snr_grid_db.size() != 1) {
    throw SpecError("sumrate runs at a single SNR; snr_grid_db must hold exactly one value");
  }
  const double snr = from_db(cfg.snr_grid_db.front());
  const double noise_variance = 1.0 / snr;
  const auto knobs = knob_grid(cfg);
  const auto n = static_cast<std::size_t>(cfg.n_trials);
  std::vector<std::vector<double>> rate(knobs.size(), std::vector<double>(n));
  std::vector<double> zero_mui_rate(n);

  parallel_trials(cfg.n_trials, cfg.threads, [&](int trial) {
    const TrialDraw draw = draw_trial(cfg, trial);
    const CVector x_comm = zero_forcing_target(draw.channel, draw.symbols);
    const double gain = transmit_gain(cfg.snr_convention, x_comm, cfg.n_samples);
    const auto t = static_cast<std::size_t>(trial);
    zero_mui_rate[t] = rate_per_user(draw.channel, draw.symbols, (gain / x_comm.norm()) * x_comm,
                                     cfg.n_antennas, cfg.n_samples, noise_variance);
    for (std::size_t c = 0; c < knobs.size(); ++c) {
      const auto& k = knobs[c];
      const SolveResult r =
          solve(make_problem(cfg, draw, k.epsilon, cfg.eta_grid.linear(k.eta_index), k.rho));
      rate[c][t] = rate_per_user(draw.channel, draw.symbols, gain * r.waveform.vec(),
                                 cfg.n_antennas, cfg.n_samples, noise_variance);
    }
  });

  CurveTable table = make_table(cfg, "epsilon", cfg.epsilon_grid);
  const LabelParts parts{cfg.rho_grid.size() > 1, true, false};
  nlohmann::json stderr_json = nlohmann::json::object();
  const std::size_t n_eps = cfg.epsilon_grid.size();
  for (std::size_t c = 0; c < knobs.size(); c += n_eps) {
    std::vector<double> mean(n_eps);
    std::vector<double> se(n_eps);
    for (std::size_t e = 0; e < n_eps; ++e) {
      MeanAccumulator acc;
      for (double v : rate[c + e]) acc.add(v);
      mean[e] = acc.mean();
      se[e] = acc.standard_error();
    }
    const std::string label = knob_label(cfg, knobs[c], parts);
    stderr_json[label] = se;
    table.series.emplace_back(label, std::move(mean));
  }
  MeanAccumulator zero;
  for (double v : zero_mui_rate) zero.add(v);
  table.series.emplace_back("zero_mui", std::vector<double>(n_eps, zero.mean()));
  stderr_json["zero_mui"] = std::vector<double>(n_eps, zero.standard_error());
  table.series.emplace_back("awgn_capacity",
                            std::vector<double>(n_eps, awgn_capacity_per_user(snr)));
  table.metadata["n_trials"] = cfg.n_trials;
  table.metadata["standard_error"] = std::move(stderr_json);
  return table;
}

CurveTable run_ser(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.constellation != ConstellationKind::kQpsk) {
    throw SpecError("ser experiment requires the qpsk constellation");
  }
  const Constellation qpsk = Constellation::make(ConstellationKind::kQpsk);
  const auto knobs = knob_grid(cfg);
  const std::size_t n_snr = cfg.snr_grid_db.size();
  // Series 0..knobs-1 are ADMM designs; the last one is the zero-MUI benchmark.
  const std::size_t n_series = knobs.size() + 1;
  const std::int64_t symbols_per_trial = static_cast<std::int64_t>(cfg.k_users) * cfg.n_samples;
  const std::int64_t trial_cap =
      std::max<std::int64_t>(1, (cfg.max_symbols + symbols_per_trial - 1) / symbols_per_trial);

  std::vector<std::vector<std::int64_t>> errors(n_series, std::vector<std::int64_t>(n_snr, 0));
  std::int64_t trials_run = 0;

  auto satisfied = [&] {
    for (const auto& series : errors) {
      for (std::int64_t e : series) {
        if (e < cfg.min_errors) return false;
      }
    }
    return true;
  };

  do {
    const auto batch = static_cast<int>(
        std::min<std::int64_t>(cfg.n_trials, trial_cap - trials_run));
    const auto first = static_cast<int>(trials_run);
    std::vector<std::vector<std::int64_t>> batch_errors(
        static_cast<std::size_t>(batch), std::vector<std::int64_t>(n_series * n_snr, 0));

    parallel_trials(batch, cfg.threads, [&](int offset) {
      const int trial = first + offset;
      auto& counts = batch_errors[static_cast<std::size_t>(offset)];
      const TrialDraw draw = draw_trial(cfg, trial);
      const CVector x_comm = zero_forcing_target(draw.channel, draw.symbols);
      const double gain = transmit_gain(cfg.snr_convention, x_comm, cfg.n_samples);

      std::vector<CMatrix> received_clean;
      received_clean.reserve(n_series);
      for (const auto& k : knobs) {
        const SolveResult r =
            solve(make_problem(cfg, draw, k.epsilon, cfg.eta_grid.linear(k.eta_index), k.rho));
        received_clean.push_back(draw.channel.matrix * (gain * r.waveform.entries));
      }
      received_clean.push_back(draw.symbols.symbols);

      for (std::size_t j = 0; j < n_snr; ++j) {
        const double noise_variance = 1.0 / from_db(cfg.snr_grid_db[j]);
        std::mt19937_64 rng(derive_seed(cfg.base_seed, static_cast<std::uint64_t>(trial),
                                        kNoiseTag, j));
        std::normal_distribution<double> normal(0.0, std::sqrt(noise_variance / 2.0));
        CMatrix noise(cfg.k_users, cfg.n_samples);
        for (Eigen::Index c = 0; c < noise.cols(); ++c) {
          for (Eigen::Index r = 0; r < noise.rows(); ++r) {
            const double re = normal(rng);
            const double im = normal(rng);
            noise(r, c) = {re, im};
          }
        }
        for (std::size_t s = 0; s < n_series; ++s) {
          const CMatrix y = received_clean[s] + noise;
          std::int64_t wrong = 0;
          for (Eigen::Index c = 0; c < y.cols(); ++c) {
            for (Eigen::Index r = 0; r < y.rows(); ++r) {
              if (qpsk.points[detect_nearest(y(r, c), qpsk)] != draw.symbols.symbols(r, c)) ++wrong;
            }
          }
          counts[s * n_snr + j] = wrong;
        }
      }
    });

    for (const auto& counts : batch_errors) {
      for (std::size_t s = 0; s < n_series; ++s) {
        for (std::size_t j = 0; j < n_snr; ++j) errors[s][j] += counts[s * n_snr + j];
      }
    }
    trials_run += batch;
  } while (trials_run < trial_cap && !satisfied());

  CurveTable table = make_table(cfg, "snr_db", cfg.snr_grid_db);
  const double symbols = static_cast<double>(trials_run * symbols_per_trial);
  const LabelParts parts{cfg.rho_grid.size() > 1, cfg.eta_grid.size() > 1,
                         cfg.epsilon_grid.size() > 1};
  nlohmann::json error_json = nlohmann::json::object();
  for (std::size_t s = 0; s < n_series; ++s) {
    const std::string label =
        s < knobs.size() ? knob_label(cfg, knobs[s], parts, "admm") : "zero_mui";
    std::vector<double> ser(n_snr);
    for (std::size_t j = 0; j < n_snr; ++j) ser[j] = static_cast<double>(errors[s][j]) / symbols;
    error_json[label] = errors[s];
    table.series.emplace_back(label, std::move(ser));
  }
  table.metadata["trials_run"] = trials_run;
  table.metadata["symbols_per_point"] = trials_run * symbols_per_trial;
  table.metadata["error_counts"] = std::move(error_json);
  return table;
}

}  // namespace isac
