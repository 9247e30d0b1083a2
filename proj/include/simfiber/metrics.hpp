#pragma once

#include <cstdint>
#include <vector>

#include "simfiber/types.hpp"

namespace simfiber {

// Inputs shared by the capacity and BER evaluations: the fitted equivalent
// channel H (S x S), the fitted gain alpha, the per-stream transmit power
// and the post-combining noise power.
struct CapacityInputs {
  ComplexMatrix H;
  double alpha = 1.0;
  double pt = 1.0;  // per-stream transmit power [W]
  double n0 = 1.0;  // noise power [W]
};

enum class CapacityFormula {
  // Treats the residual interference E = H - alpha*I as carrying the
  // per-stream source power: C = log2 det(I + alpha^2*Pt*(Pt*EE^H + N0*I)^-1).
  // Consistent with a source covariance of Pt*I, and the default.
  power_scaled_interference,
  // Leaves the residual term unweighted:
  // C = log2 det(I + alpha^2*Pt*(EE^H + N0*I)^-1).
  unscaled_interference,
};

// Normalized fitting error ||H - alpha*I||_F^2 / (alpha^2 * S).
// Throws std::domain_error when alpha = 0.
double nmse(const ComplexMatrix& h, double alpha, int S);

// Channel capacity of the fitted link under the chosen residual model,
// in bits/s/Hz.
double capacity_exact(const CapacityInputs& inputs, CapacityFormula formula);

// Perfect-fitting capacity S * log2(1 + alpha^2 * pt / n0); an upper bound
// on capacity_exact for any residual.
double capacity_upper_bound(double alpha, double pt, double n0, int S);

struct BerConfig {
  std::int64_t n_symbols = 100000;  // QPSK symbol vectors per evaluation
  std::uint64_t seed = 1;
};

// Monte Carlo uncoded QPSK bit error rate over y = H*s + n with per-stream
// power pt and post-combining white noise CN(0, n0); each receive port is
// detected independently against the nominal gain alpha. Deterministic in
// the seed and independent of how the symbol blocks are scheduled.
double ber_qpsk(const ComplexMatrix& h, const CapacityInputs& inputs,
                const BerConfig& config);

// Analytic uncoded QPSK bit error rate on an AWGN channel with per-symbol
// SNR snr: Q(sqrt(snr)).
double ber_qpsk_awgn(double snr);

// Scales every per-layer transmission matrix amplitude by sqrt(1 - ratio),
// so each traversed layer keeps (1 - ratio) of the signal energy.
std::vector<ComplexMatrix> apply_attenuation(std::vector<ComplexMatrix> matrices,
                                             double ratio);

}  // namespace simfiber
