#pragma once

#include <span>
#include <vector>

#include "isac/signal_model.hpp"

namespace isac {

struct KpiReport {
  double mui_energy = 0.0;
  std::vector<double> per_user_sinr;
  std::vector<double> per_user_rate;
  double sum_rate = 0.0;
  double papr_linear = 1.0;
  double papr_db = 0.0;
  double similarity_distance = 0.0;

  double rate_per_user() const {
    return per_user_rate.empty() ? 0.0 : sum_rate / static_cast<double>(per_user_rate.size());
  }
};

/// ||H X - S||_F^2.
double mui_energy(const ChannelRealization& h, const Waveform& x, const SymbolBlock& s);

/// SINR_k = 1 / ((1/L) ||(HX - S)_k||^2 + noise_variance): the time average over
/// the block stands in for the expectation, with unit symbol energy.
std::vector<double> sinr_per_user(const ChannelRealization& h, const Waveform& x,
                                  const SymbolBlock& s, double noise_variance);

/// Sum over users of log2(1 + SINR_k), in bits/s/Hz.
double sum_rate(std::span<const double> sinr);

/// Peak over mean of |x(i)|^2.
double papr(const CVector& x);

double to_db(double linear);
double from_db(double db);

/// Fraction of samples strictly above each threshold (all in dB).
std::vector<double> ccdf(std::span<const double> papr_samples_db,
                         std::span<const double> gamma_grid_db);

double similarity_distance(const CVector& x, const ReferenceWaveform& x0);

double awgn_capacity_per_user(double snr_linear);

/// Full report for a designed unit-norm block. MUI, SINR and rates see the
/// block scaled by `transmit_gain`; PAPR and similarity see it unscaled.
KpiReport evaluate_kpis(const ChannelRealization& h, const Waveform& x, const SymbolBlock& s,
                        const ReferenceWaveform& x0, double noise_variance,
                        double transmit_gain = 1.0);

}  // namespace isac
