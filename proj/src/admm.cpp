#include "isac/admm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "isac/errors.hpp"
#include "isac/kpi.hpp"

namespace isac {

namespace {

constexpr double kDegenerateNorm = 1e-12;

void require_same_size(const RVector& a, const RVector& b, const char* what) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(what) + ": length " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
}

}  // namespace

void ProblemSpec::validate() const {
  const auto k = channel.k_users();
  const auto n = channel.n_antennas();
  if (k < 1 || n < 1) throw SpecError("channel must be non-empty");
  if (k > n) {
    throw SpecError("k_users (" + std::to_string(k) + ") must not exceed n_antennas (" +
                    std::to_string(n) + ")");
  }
  if (symbols.k_users() != k) throw SpecError("symbol block rows must equal k_users");
  if (symbols.n_samples() < 1) throw SpecError("symbol block must have at least one sample");
  if (reference.waveform.n_antennas() != n || reference.waveform.n_samples() != n_samples()) {
    throw SpecError("reference waveform must be n_antennas x n_samples");
  }
  if (reference.lifted.values.size() != 2 * static_cast<Eigen::Index>(block_size())) {
    throw SpecError("reference lifting has the wrong length");
  }
  if (std::abs(reference.waveform.entries.squaredNorm() - 1.0) > 1e-9) {
    throw SpecError("reference waveform must have unit Frobenius norm");
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw SpecError("epsilon must be >= 0");
  if (!(eta >= 1.0)) throw SpecError("eta must be >= 1 (PAPR is never below 1)");
  if (eta > block_size()) {
    throw SpecError("eta must not exceed N*L = " + std::to_string(block_size()));
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) throw SpecError("rho must be > 0");
  if (max_iterations < 1) throw SpecError("max_iterations must be >= 1");
  if (!(feasibility_tolerance > 0.0)) throw SpecError("feasibility_tolerance must be > 0");
  if (epsilon == 0.0 && eta < papr(reference.vec())) {
    throw SpecError("infeasible: epsilon = 0 pins x to the reference, whose PAPR exceeds eta");
  }
}

AdmmState AdmmState::zeros(int block_size) {
  const RVector z = RVector::Zero(2 * static_cast<Eigen::Index>(block_size));
  return AdmmState{z, z, z, z, z, z, z, 0};
}

double Residuals::max() const { return std::max({sphere, similarity, papr}); }

CVector zero_forcing_target(const ChannelRealization& h, const SymbolBlock& s) {
  if (h.matrix.rows() != s.symbols.rows()) {
    throw DimensionError("zero forcing needs H and S with the same number of users");
  }
  if (h.k_users() > h.n_antennas()) {
    throw SingularityError("H H^H is singular: more users than antennas");
  }
  const CMatrix gram = h.matrix * h.matrix.adjoint();
  Eigen::LLT<CMatrix> llt(gram);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-12)) {
    throw SingularityError("H H^H is singular: channel lacks full row rank");
  }
  const CMatrix x = h.matrix.adjoint() * llt.solve(s.symbols);
  return Eigen::Map<const CVector>(x.data(), x.size());
}

RVector x_update(const AdmmState& state, double rho, const RVector& x_bar_comm,
                 const RVector& x_bar_0) {
  require_same_size(state.x_bar, x_bar_comm, "x_update x_bar_comm");
  require_same_size(state.x_bar, x_bar_0, "x_update x_bar_0");
  for (const RVector* v : {&state.alpha, &state.beta, &state.gamma, &state.u, &state.v, &state.w}) {
    require_same_size(state.x_bar, *v, "x_update state");
  }
  return (2.0 * x_bar_comm - state.u - state.v - state.w +
          rho * (state.alpha + x_bar_0 + state.beta + state.gamma)) /
         (2.0 + 3.0 * rho);
}

RVector alpha_update(const RVector& x_bar, const RVector& u, double rho, const RVector& previous) {
  require_same_size(x_bar, u, "alpha_update");
  RVector t = x_bar + u / rho;
  const double norm = t.norm();
  if (norm < kDegenerateNorm) {
    if (previous.size() == x_bar.size() && std::abs(previous.norm() - 1.0) < 1e-9) return previous;
    throw DegenerateProjectionError("sphere projection of the origin has no prior iterate");
  }
  return t / norm;
}

RVector beta_update(const RVector& x_bar, const RVector& x_bar_0, const RVector& v, double rho,
                    double epsilon) {
  require_same_size(x_bar, x_bar_0, "beta_update");
  require_same_size(x_bar, v, "beta_update");
  RVector t = x_bar - x_bar_0 + v / rho;
  const double norm = t.norm();
  if (norm <= epsilon) return t;
  return (epsilon / norm) * t;
}

RVector gamma_update(const RVector& x_bar, const RVector& w, double rho, double eta, int n_total) {
  require_same_size(x_bar, w, "gamma_update");
  if (x_bar.size() != 2 * static_cast<Eigen::Index>(n_total)) {
    throw DimensionError("gamma_update: lifted length must be 2*n_total");
  }
  const double cap_sq = eta / n_total;
  const double cap = std::sqrt(cap_sq);
  RVector t = x_bar + w / rho;
  for (int n = 0; n < n_total; ++n) {
    double& re = t(n);
    double& im = t(n_total + n);
    const double mag_sq = re * re + im * im;
    if (mag_sq > cap_sq) {
      const double scale = cap / std::sqrt(mag_sq);
      re *= scale;
      im *= scale;
    }
  }
  return t;
}

DualVariables dual_updates(const AdmmState& state, const RVector& x_bar_new,
                           const RVector& alpha_new, const RVector& beta_new,
                           const RVector& gamma_new, double rho, const RVector& x_bar_0) {
  return DualVariables{state.u + rho * (x_bar_new - alpha_new),
                       state.v + rho * (x_bar_new - x_bar_0 - beta_new),
                       state.w + rho * (x_bar_new - gamma_new)};
}

Residuals primal_residuals(const RVector& x_bar, const RVector& alpha, const RVector& beta,
                           const RVector& gamma, const RVector& x_bar_0) {
  return Residuals{(x_bar - alpha).norm(), (x_bar - x_bar_0 - beta).norm(),
                   (x_bar - gamma).norm()};
}

ConstraintViolations constraint_violations(const CVector& x, const ReferenceWaveform& x0,
                                           double epsilon, double eta) {
  ConstraintViolations c;
  c.norm_gap = std::abs(x.squaredNorm() - 1.0);
  c.similarity_excess = std::max(0.0, similarity_distance(x, x0) - epsilon);
  c.papr_excess = x.squaredNorm() > 0.0 ? std::max(0.0, papr(x) - eta)
                                        : std::numeric_limits<double>::infinity();
  return c;
}

AdmmSolver::AdmmSolver(ProblemSpec spec)
    : AdmmSolver(std::move(spec), AdmmState{}) {}

AdmmSolver::AdmmSolver(ProblemSpec spec, AdmmState initial)
    : spec_(std::move(spec)), state_(std::move(initial)) {
  spec_.validate();
  x_bar_comm_ = lift(zero_forcing_target(spec_.channel, spec_.symbols)).values;
  x_bar_0_ = spec_.reference.lifted.values;
  if (state_.x_bar.size() == 0) {
    state_ = AdmmState::zeros(spec_.block_size());
  } else if (state_.block_size() != spec_.block_size()) {
    throw DimensionError("initial ADMM state does not match the problem size");
  }
}

Residuals AdmmSolver::step() {
  const double rho = spec_.rho;
  RVector x = x_update(state_, rho, x_bar_comm_, x_bar_0_);
  RVector alpha = alpha_update(x, state_.u, rho, state_.alpha);
  RVector beta = beta_update(x, x_bar_0_, state_.v, rho, spec_.epsilon);
  RVector gamma = gamma_update(x, state_.w, rho, spec_.eta, spec_.block_size());
  DualVariables duals = dual_updates(state_, x, alpha, beta, gamma, rho, x_bar_0_);
  const Residuals r = primal_residuals(x, alpha, beta, gamma, x_bar_0_);
  state_.x_bar = std::move(x);
  state_.alpha = std::move(alpha);
  state_.beta = std::move(beta);
  state_.gamma = std::move(gamma);
  state_.u = std::move(duals.u);
  state_.v = std::move(duals.v);
  state_.w = std::move(duals.w);
  ++state_.iteration;
  return r;
}

SolveResult AdmmSolver::run() {
  SolveResult result;
  result.residual_history.reserve(
      static_cast<std::size_t>(std::max(0, spec_.max_iterations - state_.iteration)));
  while (state_.iteration < spec_.max_iterations) {
    const Residuals r = step();
    result.residual_history.push_back(r);
    if (spec_.early_stop && r.max() < spec_.feasibility_tolerance) {
      result.stopped_early = true;
      break;
    }
  }
  result.iterations_run = static_cast<int>(result.residual_history.size());
  const CVector x = unlift(RealLifted{state_.x_bar});
  result.waveform = Waveform::from_vec(x, spec_.n_antennas(), spec_.n_samples());
  result.objective = (state_.x_bar - x_bar_comm_).squaredNorm();
  result.violations = constraint_violations(x, spec_.reference, spec_.epsilon, spec_.eta);
  return result;
}

SolveResult solve(const ProblemSpec& spec) { return AdmmSolver(spec).run(); }

}  // namespace isac
