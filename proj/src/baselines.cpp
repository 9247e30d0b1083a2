#include "simfiber/baselines.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/SVD>

namespace simfiber {

namespace {
constexpr double kRankTolerance = 1e-12;
}

SvdTriple svd_decompose(const ComplexMatrix& g) {
  if (g.rows() < 1 || g.cols() < 1) {
    throw std::invalid_argument("channel matrix must be non-empty");
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(g,
                                      Eigen::ComputeFullU | Eigen::ComputeFullV);
  SvdTriple triple;
  triple.D = svd.matrixU();
  triple.sigma = svd.singularValues();
  triple.V = svd.matrixV();
  triple.rank = 0;
  const double cutoff = kRankTolerance * triple.sigma(0);
  for (Eigen::Index i = 0; i < triple.sigma.size(); ++i) {
    if (triple.sigma(i) > cutoff) ++triple.rank;
  }
  return triple;
}

std::pair<ComplexMatrix, ComplexMatrix> svd_ideal_transceivers(
    const ComplexMatrix& g, int S) {
  if (S < 1 || S > std::min(g.rows(), g.cols())) {
    throw std::invalid_argument("stream count must be in 1..min(dim(G))");
  }
  SvdTriple triple = svd_decompose(g);
  if (triple.sigma(S - 1) < kRankTolerance * triple.sigma(0)) {
    throw std::domain_error(
        "channel is rank-deficient for " + std::to_string(S) + " streams");
  }
  RealVector inv_sqrt(S);
  for (int i = 0; i < S; ++i) {
    inv_sqrt(i) = 1.0 / std::sqrt(triple.sigma(i));
  }
  ComplexMatrix precoder = triple.V.leftCols(S) * inv_sqrt.asDiagonal();
  ComplexMatrix combiner =
      inv_sqrt.asDiagonal() * triple.D.leftCols(S).adjoint();
  return {std::move(precoder), std::move(combiner)};
}

ComplexMatrix zf_precoder(const ComplexMatrix& g, double pt) {
  const Eigen::Index s = g.rows();
  if (s < 1 || g.cols() != s) {
    throw std::invalid_argument("zero-forcing needs a square channel");
  }
  if (!(pt > 0.0)) {
    throw std::invalid_argument("transmit power must be positive");
  }
  ComplexMatrix gram = g * g.adjoint();
  Eigen::JacobiSVD<ComplexMatrix> svd(g);
  const RealVector& sigma = svd.singularValues();
  if (sigma(s - 1) < kRankTolerance * sigma(0)) {
    throw std::domain_error("channel is singular, zero-forcing undefined");
  }
  ComplexMatrix gram_inverse = gram.partialPivLu().solve(
      ComplexMatrix::Identity(s, s));
  double trace = gram_inverse.trace().real();
  double scale = std::sqrt(pt / trace);
  return scale * (g.adjoint() * gram_inverse);
}

}  // namespace simfiber
