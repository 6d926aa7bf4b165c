#include "isac/signal_model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "isac/errors.hpp"

namespace isac {

namespace {

// Stream tags keep channel and symbol generators independent even when the
// caller hands both the same seed.
constexpr std::uint64_t kChannelStream = 0x6368616e6e656cULL;
constexpr std::uint64_t kSymbolStream = 0x73796d626f6cULL;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

void ArrayConfig::validate() const {
  if (n_antennas < 1) throw SpecError("n_antennas must be >= 1");
  if (!(spacing_over_wavelength > 0.0) || !std::isfinite(spacing_over_wavelength)) {
    throw SpecError("spacing_over_wavelength must be positive and finite");
  }
}

CVector Waveform::vec() const {
  return Eigen::Map<const CVector>(entries.data(), entries.size());
}

Waveform Waveform::from_vec(const CVector& x, int n_antennas, int n_samples) {
  if (n_antennas < 1 || n_samples < 1 ||
      x.size() != static_cast<Eigen::Index>(n_antennas) * n_samples) {
    throw DimensionError("cannot reshape vector of length " + std::to_string(x.size()) +
                         " into " + std::to_string(n_antennas) + "x" +
                         std::to_string(n_samples));
  }
  return Waveform{Eigen::Map<const CMatrix>(x.data(), n_antennas, n_samples)};
}

Constellation Constellation::make(ConstellationKind kind) {
  Constellation c{kind, {}};
  switch (kind) {
    case ConstellationKind::kQpsk: {
      const double a = 1.0 / std::sqrt(2.0);
      c.points = {{a, a}, {-a, a}, {-a, -a}, {a, -a}};
      break;
    }
    case ConstellationKind::kQam16: {
      const double a = 1.0 / std::sqrt(10.0);
      for (int q : {3, 1, -1, -3}) {
        for (int i : {-3, -1, 1, 3}) c.points.emplace_back(i * a, q * a);
      }
      break;
    }
  }
  return c;
}

std::string_view constellation_name(ConstellationKind kind) {
  return kind == ConstellationKind::kQpsk ? "qpsk" : "16qam";
}

std::string_view Constellation::name() const { return constellation_name(kind); }

ConstellationKind parse_constellation(std::string_view name) {
  if (name == "qpsk" || name == "QPSK") return ConstellationKind::kQpsk;
  if (name == "16qam" || name == "16QAM") return ConstellationKind::kQam16;
  throw SpecError("unknown constellation '" + std::string(name) + "' (expected qpsk or 16qam)");
}

CVector steering_vector(const ArrayConfig& cfg, double theta) {
  cfg.validate();
  const double phase_step = 2.0 * std::numbers::pi * cfg.spacing_over_wavelength * std::sin(theta);
  CVector a(cfg.n_antennas);
  for (int n = 0; n < cfg.n_antennas; ++n) a(n) = std::polar(1.0, -phase_step * n);
  return a;
}

ChannelRealization draw_channel(int k_users, const ArrayConfig& cfg, double noise_variance,
                                std::uint64_t rng_seed) {
  cfg.validate();
  if (k_users < 1) throw SpecError("k_users must be >= 1");
  if (!(noise_variance >= 0.0)) throw DomainError("noise_variance must be >= 0");
  std::mt19937_64 rng(derive_seed(rng_seed, kChannelStream));
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  ChannelRealization h{CMatrix(k_users, cfg.n_antennas), noise_variance};
  for (Eigen::Index j = 0; j < h.matrix.cols(); ++j) {
    for (Eigen::Index i = 0; i < h.matrix.rows(); ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      h.matrix(i, j) = {re, im};
    }
  }
  return h;
}

SymbolBlock draw_symbols(int k_users, int n_samples, ConstellationKind constellation,
                         std::uint64_t rng_seed) {
  if (k_users < 1 || n_samples < 1) throw SpecError("k_users and n_samples must be >= 1");
  const Constellation c = Constellation::make(constellation);
  std::mt19937_64 rng(derive_seed(rng_seed, kSymbolStream));
  std::uniform_int_distribution<std::size_t> pick(0, c.points.size() - 1);
  SymbolBlock s{CMatrix(k_users, n_samples), constellation};
  for (Eigen::Index j = 0; j < s.symbols.cols(); ++j) {
    for (Eigen::Index i = 0; i < s.symbols.rows(); ++i) s.symbols(i, j) = c.points[pick(rng)];
  }
  return s;
}

ReferenceWaveform chirp_reference(int n_antennas, int n_samples) {
  if (n_antennas < 1 || n_samples < 1) throw SpecError("chirp dimensions must be >= 1");
  const double total = static_cast<double>(n_antennas) * n_samples;
  const double amplitude = 1.0 / std::sqrt(total);
  CMatrix x0(n_antennas, n_samples);
  for (int n = 0; n < n_antennas; ++n) {
    for (int l = 0; l < n_samples; ++l) {
      // (i^2 mod 2NL) keeps the phase argument small for large blocks.
      const auto i = static_cast<std::uint64_t>(n) * n_samples + l;
      const auto period = 2 * static_cast<std::uint64_t>(total);
      const auto wrapped = static_cast<double>((i * i) % period);
      x0(n, l) = std::polar(amplitude, std::numbers::pi * wrapped / total);
    }
  }
  ReferenceWaveform ref{Waveform{std::move(x0)}, {}};
  ref.lifted = lift(ref.vec());
  return ref;
}

RealLifted lift(const CVector& x) {
  const Eigen::Index m = x.size();
  RealLifted out{RVector(2 * m)};
  out.values.head(m) = x.real();
  out.values.tail(m) = x.imag();
  return out;
}

CVector unlift(const RealLifted& x_bar) {
  if (x_bar.values.size() % 2 != 0) {
    throw DimensionError("lifted vector has odd length " + std::to_string(x_bar.values.size()));
  }
  const Eigen::Index m = x_bar.values.size() / 2;
  CVector x(m);
  for (Eigen::Index i = 0; i < m; ++i) x(i) = {x_bar.values(i), x_bar.values(m + i)};
  return x;
}

CVector unlift(const RealLifted& x_bar, int expected_length) {
  if (x_bar.values.size() != 2 * static_cast<Eigen::Index>(expected_length)) {
    throw DimensionError("lifted vector length " + std::to_string(x_bar.values.size()) +
                         " != 2*" + std::to_string(expected_length));
  }
  return unlift(x_bar);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t s = splitmix64(base);
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ b);
  return splitmix64(s ^ c);
}

}  // namespace isac
