#pragma once

#include <utility>

#include "simfiber/types.hpp"

namespace simfiber {

// Singular value decomposition G = D * diag(sigma) * V^H with the singular
// values in non-increasing order.
struct SvdTriple {
  ComplexMatrix D;     // left singular vectors (rows(G) x rows(G))
  RealVector sigma;    // singular values, non-increasing
  ComplexMatrix V;     // right singular vectors (cols(G) x cols(G))
  int rank = 0;        // count of sigma_i > 1e-12 * sigma_1
};

SvdTriple svd_decompose(const ComplexMatrix& g);

// Ideal diagonalizing transceivers built from the channel's SVD:
//   P = V[:, 1..S] * diag(sigma_{1..S})^{-1/2},
//   Q = diag(sigma_{1..S})^{-1/2} * D[:, 1..S]^H,
// giving Q*G*P = I_S exactly. Throws std::domain_error when the channel is
// rank-deficient for the requested stream count (sigma_S < 1e-12 * sigma_1).
std::pair<ComplexMatrix, ComplexMatrix> svd_ideal_transceivers(
    const ComplexMatrix& g, int S);

// Zero-forcing precoder for a conventional S x S MIMO channel:
//   P_zf = sqrt(pt / tr[(G G^H)^-1]) * G^H (G G^H)^-1,
// normalized so ||P_zf||_F^2 = pt; the effective channel G * P_zf is a
// scaled identity. Throws std::domain_error on singular channels.
ComplexMatrix zf_precoder(const ComplexMatrix& g, double pt);

}  // namespace simfiber
