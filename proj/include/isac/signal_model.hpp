#pragma once

#include <complex>
#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace isac {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Uniform linear array geometry.
struct ArrayConfig {
  int n_antennas = 1;
  double spacing_over_wavelength = 0.5;

  void validate() const;
};

/// Transmit block X, N antennas x L time samples.
struct Waveform {
  CMatrix entries;

  int n_antennas() const { return static_cast<int>(entries.rows()); }
  int n_samples() const { return static_cast<int>(entries.cols()); }
  /// Column-major vectorization vec(X).
  CVector vec() const;
  static Waveform from_vec(const CVector& x, int n_antennas, int n_samples);
};

/// Real lifting [Re(x); Im(x)] of a complex vector.
struct RealLifted {
  RVector values;

  int complex_length() const { return static_cast<int>(values.size() / 2); }
};

struct ChannelRealization {
  CMatrix matrix;  // K x N
  double noise_variance = 0.0;

  int k_users() const { return static_cast<int>(matrix.rows()); }
  int n_antennas() const { return static_cast<int>(matrix.cols()); }
};

enum class ConstellationKind { kQpsk, kQam16 };

/// Unit-average-energy constellation. Point order is fixed and defines
/// symbol indices (and detector tie-breaking).
struct Constellation {
  ConstellationKind kind;
  std::vector<Complex> points;

  static Constellation make(ConstellationKind kind);
  std::string_view name() const;
};

ConstellationKind parse_constellation(std::string_view name);
std::string_view constellation_name(ConstellationKind kind);

struct SymbolBlock {
  CMatrix symbols;  // K x L
  ConstellationKind constellation = ConstellationKind::kQpsk;

  int k_users() const { return static_cast<int>(symbols.rows()); }
  int n_samples() const { return static_cast<int>(symbols.cols()); }
};

/// Radar reference x0, kept as both the N x L matrix and its lifting.
struct ReferenceWaveform {
  Waveform waveform;
  RealLifted lifted;

  CVector vec() const { return waveform.vec(); }
};

CVector steering_vector(const ArrayConfig& cfg, double theta);

/// i.i.d. CN(0, 1) K x N channel; a pure function of its arguments.
ChannelRealization draw_channel(int k_users, const ArrayConfig& cfg,
                                double noise_variance, std::uint64_t rng_seed);

SymbolBlock draw_symbols(int k_users, int n_samples,
                         ConstellationKind constellation,
                         std::uint64_t rng_seed);

/// Linear-FM phase ramp over the vectorized block:
/// x0(i) = exp(j*pi*i^2 / (N*L)) / sqrt(N*L), i = n*L + l.
ReferenceWaveform chirp_reference(int n_antennas, int n_samples);

RealLifted lift(const CVector& x);
CVector unlift(const RealLifted& x_bar);
/// Checked unlift: throws DimensionError unless x_bar has 2*expected_length entries.
CVector unlift(const RealLifted& x_bar, int expected_length);

/// Derives an independent 64-bit stream seed from a base seed and a path of
/// stream identifiers (trial index, object tag, ...).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

}  // namespace isac
