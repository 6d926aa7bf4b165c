#include "isac/kpi.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "isac/errors.hpp"

namespace isac {

namespace {

CMatrix interference(const ChannelRealization& h, const Waveform& x, const SymbolBlock& s) {
  if (h.matrix.cols() != x.entries.rows() || h.matrix.rows() != s.symbols.rows() ||
      x.entries.cols() != s.symbols.cols()) {
    throw DimensionError("MUI needs H (KxN), X (NxL), S (KxL); got H " +
                         std::to_string(h.matrix.rows()) + "x" + std::to_string(h.matrix.cols()) +
                         ", X " + std::to_string(x.entries.rows()) + "x" +
                         std::to_string(x.entries.cols()) + ", S " +
                         std::to_string(s.symbols.rows()) + "x" + std::to_string(s.symbols.cols()));
  }
  return h.matrix * x.entries - s.symbols;
}

}  // namespace

double mui_energy(const ChannelRealization& h, const Waveform& x, const SymbolBlock& s) {
  return interference(h, x, s).squaredNorm();
}

std::vector<double> sinr_per_user(const ChannelRealization& h, const Waveform& x,
                                  const SymbolBlock& s, double noise_variance) {
  if (!(noise_variance > 0.0)) throw DomainError("noise_variance must be > 0");
  const CMatrix e = interference(h, x, s);
  const double inv_l = 1.0 / static_cast<double>(e.cols());
  std::vector<double> sinr(static_cast<std::size_t>(e.rows()));
  for (Eigen::Index k = 0; k < e.rows(); ++k) {
    sinr[static_cast<std::size_t>(k)] = 1.0 / (inv_l * e.row(k).squaredNorm() + noise_variance);
  }
  return sinr;
}

double sum_rate(std::span<const double> sinr) {
  double total = 0.0;
  for (double s : sinr) {
    if (!(s >= 0.0)) throw DomainError("SINR must be non-negative");
    total += std::log2(1.0 + s);
  }
  return total;
}

double papr(const CVector& x) {
  if (x.size() == 0) throw DomainError("PAPR of an empty vector");
  const RVector power = x.cwiseAbs2();
  const double mean = power.mean();
  if (!(mean > 0.0)) throw DomainError("PAPR of an all-zero vector");
  return power.maxCoeff() / mean;
}

double to_db(double linear) { return 10.0 * std::log10(linear); }
double from_db(double db) { return std::pow(10.0, db / 10.0); }

std::vector<double> ccdf(std::span<const double> papr_samples_db,
                         std::span<const double> gamma_grid_db) {
  if (papr_samples_db.empty()) throw DomainError("CCDF of an empty sample set");
  std::vector<double> sorted(papr_samples_db.begin(), papr_samples_db.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  std::vector<double> out;
  out.reserve(gamma_grid_db.size());
  for (double gamma : gamma_grid_db) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), gamma);
    out.push_back(static_cast<double>(above) / n);
  }
  return out;
}

double similarity_distance(const CVector& x, const ReferenceWaveform& x0) {
  const CVector ref = x0.vec();
  if (x.size() != ref.size()) {
    throw DimensionError("similarity needs equal lengths, got " + std::to_string(x.size()) +
                         " and " + std::to_string(ref.size()));
  }
  return (x - ref).norm();
}

double awgn_capacity_per_user(double snr_linear) {
  if (!(snr_linear >= 0.0)) throw DomainError("SNR must be non-negative");
  return std::log2(1.0 + snr_linear);
}

KpiReport evaluate_kpis(const ChannelRealization& h, const Waveform& x, const SymbolBlock& s,
                        const ReferenceWaveform& x0, double noise_variance,
                        double transmit_gain) {
  const Waveform x_tx{transmit_gain * x.entries};
  KpiReport r;
  r.mui_energy = mui_energy(h, x_tx, s);
  r.per_user_sinr = sinr_per_user(h, x_tx, s, noise_variance);
  r.per_user_rate.reserve(r.per_user_sinr.size());
  for (double s_k : r.per_user_sinr) r.per_user_rate.push_back(std::log2(1.0 + s_k));
  r.sum_rate = sum_rate(r.per_user_sinr);
  const CVector xv = x.vec();
  r.papr_linear = papr(xv);
  r.papr_db = to_db(r.papr_linear);
  r.similarity_distance = similarity_distance(xv, x0);
  return r;
}

}  // namespace isac
