// Acceptance suite: one PASS/FAIL line per criterion, INFO lines for soft
// targets. Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "isac/admm.hpp"
#include "isac/kpi.hpp"
#include "isac/montecarlo.hpp"
#include "isac/output.hpp"

using namespace isac;

namespace {

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail, double seconds) {
  std::printf("%s  %d %-28s %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, name, detail.c_str(),
              seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

void info(const std::string& text) {
  std::printf("INFO     %s\n", text.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RVector random_real(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  RVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

void feasibility() {
  const auto t0 = std::chrono::steady_clock::now();
  const double eps_values[] = {0.5, 1.0, 1.5};
  const double eta_values[] = {1.5, 3.0};
  ExperimentConfig cfg;
  cfg.base_seed = 20240601;
  std::map<std::pair<double, double>, std::pair<int, int>> cells;
  int infeasible = 0;
  for (int i = 0; i < 100; ++i) {
    const double eps = eps_values[i % 3];
    const double eta = eta_values[(i / 3) % 2];
    ProblemSpec spec = make_problem(cfg, draw_trial(cfg, i), eps, eta, 1.0);
    spec.max_iterations = 2000;
    const SolveResult r = solve(spec);
    const CVector x = r.waveform.vec();
    const bool ok = std::abs(x.squaredNorm() - 1.0) <= 1e-3 &&
                    similarity_distance(x, spec.reference) <= eps + 1e-3 &&
                    papr(x) <= eta * (1.0 + 1e-3);
    auto& cell = cells[{eps, eta}];
    ++cell.second;
    if (!ok) {
      ++cell.first;
      ++infeasible;
    }
  }
  const double elapsed = seconds_since(t0);
  for (const auto& [key, count] : cells) {
    info(fmt("feasibility eps=%g eta=%g: %d of %d infeasible", key.first, key.second,
             count.first, count.second));
  }
  report(1, "feasibility suite", infeasible == 0 && elapsed <= 60.0,
         fmt("%d/100 infeasible, runtime %.1f s (limit 60 s)", infeasible, elapsed), elapsed);
}

void stationarity() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int block = 1 + trial % 8;
    const double rho = 0.1 + 0.4 * trial;
    AdmmState s = AdmmState::zeros(block);
    s.alpha = random_real(rng, 2 * block);
    s.beta = random_real(rng, 2 * block);
    s.gamma = random_real(rng, 2 * block);
    s.u = random_real(rng, 2 * block);
    s.v = random_real(rng, 2 * block);
    s.w = random_real(rng, 2 * block);
    const RVector xc = random_real(rng, 2 * block);
    const RVector x0 = random_real(rng, 2 * block);
    oracle::DenseState d = oracle::dense_zeros(block);
    d.alpha = s.alpha;
    d.beta = s.beta;
    d.u = s.u;
    d.v = s.v;
    for (int n = 0; n < block; ++n) {
      d.gamma[n] = oracle::selector(n, block) * s.gamma;
      d.w[n] = oracle::selector(n, block) * s.w;
    }
    const RVector x = x_update(s, rho, xc, x0);
    worst = std::max(worst,
                     oracle::lagrangian_gradient_fd(x, d, xc, x0, rho).lpNorm<Eigen::Infinity>());
  }
  report(2, "stationarity oracle", worst <= 1e-5, fmt("worst gradient inf-norm %.2e", worst),
         seconds_since(t0));
}

void projections() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(31);
  int trials = 0;
  int beaten = 0;
  for (int d = 2; d <= 6; d += 2) {
    for (int t = 0; t < 10; ++t, ++trials) {
      const int block = d / 2;
      const double rho = 0.5 + t;
      const RVector x = random_real(rng, d, 2.0);
      const RVector x0 = random_real(rng, d, 0.3);
      const RVector u = random_real(rng, d);
      const RVector v = random_real(rng, d);
      const RVector w = random_real(rng, d);
      const double eps = 0.3 + 0.2 * t;
      const double eta = 1.0 + 0.1 * t * (block - 1);
      const double cap = std::sqrt(eta / block);
      const RVector a = alpha_update(x, u, rho, RVector::Zero(d));
      const RVector b = beta_update(x, x0, v, rho, eps);
      const RVector g = gamma_update(x, w, rho, eta, block);
      const RVector pa = x + u / rho;
      const RVector pb = x - x0 + v / rho;
      const RVector pg = x + w / rho;
      bool ok = std::abs(a.norm() - 1.0) <= 1e-12 && b.norm() <= eps * (1 + 1e-12);
      for (int n = 0; n < block; ++n) ok = ok && std::hypot(g(n), g(block + n)) <= cap * (1 + 1e-12);
      for (int c = 0; c < 10'000 && ok; ++c) {
        RVector cg(d);
        for (int n = 0; n < block; ++n) {
          const RVector pair = oracle::random_in_ball(rng, 2, cap);
          cg(n) = pair(0);
          cg(block + n) = pair(1);
        }
        ok = (pa - a).norm() <= (pa - oracle::random_on_sphere(rng, d)).norm() + 1e-12 &&
             (pb - b).norm() <= (pb - oracle::random_in_ball(rng, d, eps)).norm() + 1e-12 &&
             (pg - g).norm() <= (pg - cg).norm() + 1e-12;
      }
      if (ok) ++beaten;
    }
  }
  report(3, "projection oracles", beaten == trials,
         fmt("%d/%d trials beat 1e4 candidates for all three projections", beaten, trials),
         seconds_since(t0));
}

void degenerate_solve() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.base_seed = 404;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double eps = i % 2 == 0 ? 2.0 : 3.0;
    ProblemSpec spec = make_problem(cfg, draw_trial(cfg, i), eps, 64.0, 1.0);
    const CVector xc = zero_forcing_target(spec.channel, spec.symbols);
    const CVector expected = xc / xc.norm();
    worst = std::max(worst, (solve(spec).waveform.vec() - expected).norm() / expected.norm());
  }
  report(4, "analytic degenerate solve", worst <= 1e-3,
         fmt("worst relative error %.2e over 20 instances", worst), seconds_since(t0));
}

/// Smallest grid gamma at which the CCDF has dropped to `level` or below.
double gamma_at(const CurveTable& t, const std::string& label, double level) {
  const auto& c = t.at(label);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] <= level) return t.axis_values[i];
  }
  return t.axis_values.back();
}

void ccdf_trend() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.rho_grid = {0.1, 1.0};
  cfg.eta_grid = {{0.0, 4.8, 8.5}, true};
  // Similarity radius at which the rho = 0.1, eta = 0 dB curve sits highest.
  cfg.epsilon_grid = {0.6};
  cfg.n_trials = 500;
  cfg.base_seed = 2;
  const CurveTable t = run_ccdf(cfg);
  const double g01_0 = gamma_at(t, "rho=0.1 eta=0dB", 1e-2);
  const double g1_0 = gamma_at(t, "rho=1 eta=0dB", 1e-2);
  const double g01_48 = gamma_at(t, "rho=0.1 eta=4.8dB", 1e-2);
  const double g1_48 = gamma_at(t, "rho=1 eta=4.8dB", 1e-2);
  const double g01_85 = gamma_at(t, "rho=0.1 eta=8.5dB", 1e-2);
  const double g1_85 = gamma_at(t, "rho=1 eta=8.5dB", 1e-2);
  const double gap0 = g01_0 - g1_0;
  const double gap85 = g01_85 - g1_85;
  info(fmt("ccdf eps=0.6 gamma@1e-2 [dB]: eta=0dB rho=0.1 %.2f rho=1 %.2f; eta=4.8dB rho=0.1 %.2f rho=1 "
           "%.2f; eta=8.5dB rho=0.1 %.2f rho=1 %.2f",
           g01_0, g1_0, g01_48, g1_48, g01_85, g1_85));
  info(fmt("soft target gamma(rho=0.1, eta=0dB) = 4.19 +- 1 dB: %.2f dB (%s)", g01_0,
           std::abs(g01_0 - 4.19) <= 1.0 ? "met" : "missed"));
  info(fmt("soft target gamma(rho=0.1, eta=4.8dB) = 6.11 +- 1 dB: %.2f dB (%s)", g01_48,
           std::abs(g01_48 - 6.11) <= 1.0 ? "met" : "missed"));
  report(5, "ccdf trend", std::abs(gap0 - 2.0) <= 1.0 && std::abs(gap85) <= 0.3,
         fmt("gap at 0 dB %.2f dB (want 2 +- 1), gap at 8.5 dB %.2f dB (want <= 0.3)", gap0, gap85),
         seconds_since(t0));
}

void sumrate_trend() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.eta_grid = {{1.0, 1.25, 3.0}, false};
  cfg.epsilon_grid = {0.2, 0.6, 1.0, 1.42, 1.5, 2.0};
  cfg.snr_grid_db = {10.0};
  cfg.n_trials = 200;
  cfg.base_seed = 3;
  const CurveTable t = run_sumrate(cfg);
  const auto& se = t.metadata.at("standard_error");
  const std::vector<std::string> labels = {"eta=1", "eta=1.25", "eta=3"};
  bool monotone = true;
  std::string where;
  auto check = [&](double lo, double lo_se, double hi, double hi_se, const std::string& what) {
    if (hi < lo - 3.0 * std::hypot(lo_se, hi_se)) {
      monotone = false;
      where += " " + what;
    }
  };
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const auto& r = t.at(labels[k]);
    const auto s = se.at(labels[k]).get<std::vector<double>>();
    info(fmt("sumrate %s: %.3f %.3f %.3f %.3f %.3f %.3f", labels[k].c_str(), r[0], r[1], r[2],
             r[3], r[4], r[5]));
    for (std::size_t e = 0; e + 1 < r.size(); ++e) {
      check(r[e], s[e], r[e + 1], s[e + 1], labels[k] + "@eps" + format_number(t.axis_values[e + 1]));
    }
    if (k + 1 < labels.size()) {
      const auto& up = t.at(labels[k + 1]);
      const auto su = se.at(labels[k + 1]).get<std::vector<double>>();
      for (std::size_t e = 0; e < r.size(); ++e) {
        check(r[e], s[e], up[e], su[e], labels[k + 1] + "@eps" + format_number(t.axis_values[e]));
      }
    }
  }
  const double target = std::log2(11.0);
  double worst = 0.0;
  for (std::size_t e = 0; e < t.axis_values.size(); ++e) {
    if (t.axis_values[e] >= 1.5) {
      worst = std::max(worst, std::abs(t.at("eta=3")[e] - target) / target);
    }
  }
  report(6, "sumrate trend", monotone && worst <= 0.05,
         fmt("monotone within 3 SE: %s%s; eta=3, eps>=1.5 worst deviation from log2(11) %.2f%%",
             monotone ? "yes" : "no at", where.c_str(), 100.0 * worst),
         seconds_since(t0));
}

/// SNR in dB where a decreasing SER curve crosses `level`, interpolating log SER.
double snr_at(const std::vector<double>& snr, const std::vector<double>& ser, double level) {
  for (std::size_t j = 0; j + 1 < ser.size(); ++j) {
    if (ser[j] >= level && ser[j + 1] < level && ser[j + 1] > 0.0) {
      const double f = std::log(ser[j] / level) / std::log(ser[j] / ser[j + 1]);
      return snr[j] + f * (snr[j + 1] - snr[j]);
    }
  }
  return std::nan("");
}

void ser_properties() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.n_antennas = 5;
  cfg.k_users = 2;
  cfg.epsilon_grid = {1.0};
  cfg.eta_grid = {{1.5}, false};
  cfg.snr_grid_db = {-4, -2, 0, 2, 4, 6, 8, 10, 12, 14};
  cfg.n_trials = 100;
  cfg.min_errors = 100;
  cfg.max_symbols = 200'000;
  cfg.base_seed = 4;
  const CurveTable t = run_ser(cfg);
  const auto& zero = t.at("zero_mui");
  const auto& admm = t.at("admm");
  const double symbols = t.metadata.at("symbols_per_point").get<double>();
  bool match = true;
  double worst_z = 0.0;
  for (std::size_t j = 0; j < zero.size(); ++j) {
    const double p = oracle::qpsk_ser(from_db(cfg.snr_grid_db[j]));
    const double z = std::abs(zero[j] - p) / std::sqrt(p * (1.0 - p) / symbols);
    worst_z = std::max(worst_z, z);
    match = match && z <= 3.0;
  }
  bool above = true;
  bool monotone = true;
  for (std::size_t j = 0; j < admm.size(); ++j) {
    above = above && admm[j] >= zero[j];
    if (j > 0) monotone = monotone && admm[j] <= admm[j - 1];
  }
  std::string curve;
  for (std::size_t j = 0; j < admm.size(); ++j) curve += " " + format_number(admm[j]);
  info("ser admm (eta=1.5):" + curve);
  const double gap = snr_at(cfg.snr_grid_db, admm, 0.1) - snr_at(cfg.snr_grid_db, zero, 0.1);
  info(fmt("soft target gap at SER 1e-1 between 3 and 9 dB: %.2f dB (%s)", gap,
           gap >= 3.0 && gap <= 9.0 ? "met" : "missed"));
  report(7, "ser properties", match && above && monotone,
         fmt("zero-MUI worst |z| %.2f (<= 3), admm above zero-MUI: %s, admm non-increasing: %s, "
             "%.0f symbols/point",
             worst_z, above ? "yes" : "no", monotone ? "yes" : "no", symbols),
         seconds_since(t0));
}

void determinism() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.rho_grid = {0.5, 1.0};
  cfg.eta_grid = {{1.5, 3.0}, false};
  cfg.epsilon_grid = {0.5, 1.5};
  cfg.snr_grid_db = {0.0, 6.0};
  cfg.n_trials = 20;
  cfg.m_iter = 500;
  cfg.max_symbols = 5000;
  cfg.base_seed = 99;
  ExperimentConfig threaded = cfg;
  threaded.threads = 4;
  ExperimentConfig single_snr = cfg;
  single_snr.snr_grid_db = {10.0};
  ExperimentConfig single_snr_threaded = single_snr;
  single_snr_threaded.threads = 4;

  const std::vector<std::pair<std::string, std::function<std::string(const ExperimentConfig&)>>>
      runs = {{"ccdf", [](const auto& c) { return curve_table_csv(run_ccdf(c)); }},
              {"sumrate", [](const auto& c) { return curve_table_csv(run_sumrate(c)); }},
              {"ser", [](const auto& c) { return curve_table_csv(run_ser(c)); }}};
  bool same = true;
  std::string detail;
  for (const auto& [name, fn] : runs) {
    const ExperimentConfig& a = name == "sumrate" ? single_snr : cfg;
    const ExperimentConfig& b = name == "sumrate" ? single_snr_threaded : threaded;
    const std::string first = fn(a);
    const bool ok = first == fn(a) && first == fn(b);
    same = same && ok;
    detail += name + (ok ? " identical; " : " DIFFERS; ");
  }
  report(8, "determinism", same, detail + "reruns and 1 vs 4 threads", seconds_since(t0));
}

}  // namespace

int main() {
  feasibility();
  stationarity();
  projections();
  degenerate_solve();
  ccdf_trend();
  sumrate_trend();
  ser_properties();
  determinism();
  std::printf("%s: %d criterion(s) failed\n", failures == 0 ? "ALL PASS" : "SOME FAILED", failures);
  return failures == 0 ? 0 : 1;
}
