#include "simfiber/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "simfiber/rng.hpp"

namespace simfiber {

namespace {

// Symbol vectors per RNG block. Each block owns a derived seed, so the bit
// stream consumed by a block never depends on how many blocks ran before it
// or on which thread ran it.
constexpr std::int64_t kBerBlockSymbols = 4096;

double log2_det_hermitian(const ComplexMatrix& a) {
  Eigen::LLT<ComplexMatrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        "noise-plus-interference matrix is not positive definite");
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    acc += std::log2(llt.matrixLLT()(i, i).real());
  }
  return 2.0 * acc;
}

}  // namespace

double nmse(const ComplexMatrix& h, double alpha, int S) {
  if (h.rows() != S || h.cols() != S) {
    throw std::invalid_argument("equivalent channel must be S x S");
  }
  if (alpha == 0.0) {
    throw std::domain_error("NMSE is undefined for alpha = 0");
  }
  ComplexMatrix residual = h;
  residual.diagonal().array() -= alpha;
  return residual.squaredNorm() / (alpha * alpha * static_cast<double>(S));
}

double capacity_exact(const CapacityInputs& inputs, CapacityFormula formula) {
  const Eigen::Index s = inputs.H.rows();
  if (s < 1 || inputs.H.cols() != s) {
    throw std::invalid_argument("equivalent channel must be square");
  }
  if (!(inputs.pt > 0.0) || !(inputs.n0 > 0.0)) {
    throw std::invalid_argument("transmit and noise powers must be positive");
  }
  ComplexMatrix residual = inputs.H;
  residual.diagonal().array() -= inputs.alpha;
  double residual_weight =
      formula == CapacityFormula::power_scaled_interference ? inputs.pt : 1.0;
  ComplexMatrix denom = residual_weight * (residual * residual.adjoint());
  denom.diagonal().array() += inputs.n0;
  // log2 det(I + a^2*Pt*denom^-1) = log2 det(denom + a^2*Pt*I) - log2 det(denom)
  ComplexMatrix boosted = denom;
  boosted.diagonal().array() += inputs.alpha * inputs.alpha * inputs.pt;
  return log2_det_hermitian(boosted) - log2_det_hermitian(denom);
}

double capacity_upper_bound(double alpha, double pt, double n0, int S) {
  if (!(pt > 0.0) || !(n0 > 0.0)) {
    throw std::invalid_argument("transmit and noise powers must be positive");
  }
  return static_cast<double>(S) * std::log2(1.0 + alpha * alpha * pt / n0);
}

double ber_qpsk_awgn(double snr) {
  // Q(x) = erfc(x / sqrt(2)) / 2
  return 0.5 * std::erfc(std::sqrt(snr) / std::sqrt(2.0));
}

double ber_qpsk(const ComplexMatrix& h, const CapacityInputs& inputs,
                const BerConfig& config) {
  const Eigen::Index s = h.rows();
  if (s < 1 || h.cols() != s) {
    throw std::invalid_argument("channel must be square");
  }
  if (config.n_symbols < 1) {
    throw std::invalid_argument("symbol count must be positive");
  }
  if (!(inputs.pt > 0.0) || !(inputs.n0 > 0.0)) {
    throw std::invalid_argument("transmit and noise powers must be positive");
  }

  // Per-dimension amplitudes: unit-energy QPSK scaled to power pt, noise of
  // total power n0 split across I/Q.
  const double symbol_amp = std::sqrt(inputs.pt / 2.0);
  const double noise_amp = std::sqrt(inputs.n0 / 2.0);
  // Detection needs only the sign of the nominal gain; alpha = 0 degrades
  // to guessing on raw noise, as it should.
  const double gain_sign = inputs.alpha < 0.0 ? -1.0 : 1.0;

  ComplexVector symbols(s);
  ComplexVector received(s);
  std::vector<std::uint32_t> bits(static_cast<std::size_t>(2 * s));

  std::int64_t bit_errors = 0;
  const std::int64_t n_blocks =
      (config.n_symbols + kBerBlockSymbols - 1) / kBerBlockSymbols;
  for (std::int64_t block = 0; block < n_blocks; ++block) {
    Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(block)));
    const std::int64_t begin = block * kBerBlockSymbols;
    const std::int64_t end =
        std::min(begin + kBerBlockSymbols, config.n_symbols);
    for (std::int64_t sym = begin; sym < end; ++sym) {
      for (Eigen::Index i = 0; i < s; ++i) {
        std::uint64_t draw = rng.next_u64();
        std::uint32_t b0 = draw & 1u;
        std::uint32_t b1 = (draw >> 1) & 1u;
        bits[static_cast<std::size_t>(2 * i)] = b0;
        bits[static_cast<std::size_t>(2 * i + 1)] = b1;
        symbols(i) = Complex(b0 ? symbol_amp : -symbol_amp,
                             b1 ? symbol_amp : -symbol_amp);
      }
      received.noalias() = h * symbols;
      for (Eigen::Index i = 0; i < s; ++i) {
        received(i) += Complex(noise_amp * rng.gaussian(),
                               noise_amp * rng.gaussian());
        std::uint32_t d0 = gain_sign * received(i).real() >= 0.0 ? 1u : 0u;
        std::uint32_t d1 = gain_sign * received(i).imag() >= 0.0 ? 1u : 0u;
        bit_errors += d0 != bits[static_cast<std::size_t>(2 * i)];
        bit_errors += d1 != bits[static_cast<std::size_t>(2 * i + 1)];
      }
    }
  }
  return static_cast<double>(bit_errors) /
         (2.0 * static_cast<double>(s) *
          static_cast<double>(config.n_symbols));
}

std::vector<ComplexMatrix> apply_attenuation(
    std::vector<ComplexMatrix> matrices, double ratio) {
  if (!(ratio >= 0.0) || ratio >= 1.0) {
    throw std::invalid_argument(
        "attenuation ratio must lie in [0, 1)");
  }
  const double amplitude_scale = std::sqrt(1.0 - ratio);
  for (auto& m : matrices) {
    m *= amplitude_scale;
  }
  return matrices;
}

}  // namespace simfiber
