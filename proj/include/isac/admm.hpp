#pragma once

#include <vector>

#include "isac/signal_model.hpp"

namespace isac {

/// One waveform design problem: minimize ||x - x_comm||^2 subject to
/// ||x|| = 1, ||x - x0|| <= epsilon and |x(i)|^2 <= eta / (N L) for all i.
struct ProblemSpec {
  ChannelRealization channel;
  SymbolBlock symbols;
  ReferenceWaveform reference;
  double epsilon = 1.0;
  double eta = 2.0;  // linear PAPR cap
  double rho = 1.0;
  int max_iterations = 2000;
  double feasibility_tolerance = 1e-3;
  /// Stop once all three primal residual norms drop below feasibility_tolerance.
  bool early_stop = false;

  int n_antennas() const { return channel.n_antennas(); }
  int n_samples() const { return symbols.n_samples(); }
  int block_size() const { return n_antennas() * n_samples(); }

  /// Throws SpecError naming the first violated invariant.
  void validate() const;
};

/// ADMM iterates. gamma and w hold one (Re, Im) pair per sample and share the
/// lifted layout of x_bar: the pair for sample n sits at (n, NL + n), so
/// sum_n F_n w_n is w itself.
struct AdmmState {
  RVector x_bar;
  RVector alpha;
  RVector beta;
  RVector gamma;
  RVector u;
  RVector v;
  RVector w;
  int iteration = 0;

  /// All-zero initialization for a block of `block_size` complex samples.
  static AdmmState zeros(int block_size);
  int block_size() const { return static_cast<int>(x_bar.size() / 2); }
};

struct DualVariables {
  RVector u;
  RVector v;
  RVector w;
};

struct ConstraintViolations {
  double norm_gap = 0.0;           // | ||x||^2 - 1 |
  double similarity_excess = 0.0;  // max(0, ||x - x0|| - epsilon)
  double papr_excess = 0.0;        // max(0, PAPR(x) - eta)

  bool within(double tolerance) const {
    return norm_gap <= tolerance && similarity_excess <= tolerance && papr_excess <= tolerance;
  }
};

/// Primal residual norms of the three couplings.
struct Residuals {
  double sphere = 0.0;      // ||x - alpha||
  double similarity = 0.0;  // ||x - x0 - beta||
  double papr = 0.0;        // sqrt(sum_n ||F_n x - gamma_n||^2)

  double max() const;
};

struct SolveResult {
  Waveform waveform;
  double objective = 0.0;  // ||x_bar - x_bar_comm||^2
  ConstraintViolations violations;
  std::vector<Residuals> residual_history;
  int iterations_run = 0;
  bool stopped_early = false;
};

/// vec(H^H (H H^H)^{-1} S). Throws SingularityError if H lacks full row rank.
CVector zero_forcing_target(const ChannelRealization& h, const SymbolBlock& s);

RVector x_update(const AdmmState& state, double rho, const RVector& x_bar_comm,
                 const RVector& x_bar_0);

/// Projection of x_bar + u/rho onto the unit sphere. At the origin the
/// projection is set-valued; `previous` is returned if it is a unit vector,
/// otherwise DegenerateProjectionError is thrown.
RVector alpha_update(const RVector& x_bar, const RVector& u, double rho, const RVector& previous);

/// Projection of x_bar - x0 + v/rho onto the ball of radius epsilon.
RVector beta_update(const RVector& x_bar, const RVector& x_bar_0, const RVector& v, double rho,
                    double epsilon);

/// Per-sample projection of F_n x_bar + w_n/rho onto the disc of squared
/// radius eta / n_total.
RVector gamma_update(const RVector& x_bar, const RVector& w, double rho, double eta, int n_total);

DualVariables dual_updates(const AdmmState& state, const RVector& x_bar_new,
                           const RVector& alpha_new, const RVector& beta_new,
                           const RVector& gamma_new, double rho, const RVector& x_bar_0);

Residuals primal_residuals(const RVector& x_bar, const RVector& alpha, const RVector& beta,
                           const RVector& gamma, const RVector& x_bar_0);

ConstraintViolations constraint_violations(const CVector& x, const ReferenceWaveform& x0,
                                           double epsilon, double eta);

/// Runs the ADMM iteration (x, alpha, beta, gamma, then duals) for one problem.
class AdmmSolver {
 public:
  explicit AdmmSolver(ProblemSpec spec);
  AdmmSolver(ProblemSpec spec, AdmmState initial);

  /// One full iteration; returns the primal residuals after it.
  Residuals step();
  /// Iterates until max_iterations (or the early-stop criterion) and reports.
  SolveResult run();

  const AdmmState& state() const { return state_; }
  const ProblemSpec& spec() const { return spec_; }
  const RVector& x_bar_comm() const { return x_bar_comm_; }

 private:
  ProblemSpec spec_;
  AdmmState state_;
  RVector x_bar_comm_;
  RVector x_bar_0_;
};

SolveResult solve(const ProblemSpec& spec);

}  // namespace isac
