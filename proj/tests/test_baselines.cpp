#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "simfiber/baselines.hpp"
#include "simfiber/channel.hpp"
#include "simfiber/rng.hpp"

using namespace simfiber;

namespace {

ComplexMatrix random_matrix(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  ComplexMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      m(i, j) = Complex(rng.gaussian(), rng.gaussian());
    }
  }
  return m;
}

}  // namespace

TEST_CASE("svd factorization reconstructs the matrix") {
  for (auto [rows, cols] : {std::pair{6, 6}, std::pair{4, 7}, std::pair{7, 4}}) {
    ComplexMatrix g = random_matrix(rows, cols, 17 + rows * 10 + cols);
    SvdTriple svd = svd_decompose(g);

    REQUIRE(svd.D.rows() == rows);
    REQUIRE(svd.D.cols() == rows);
    REQUIRE(svd.V.rows() == cols);
    REQUIRE(svd.V.cols() == cols);
    REQUIRE(svd.sigma.size() == std::min(rows, cols));

    for (int i = 1; i < svd.sigma.size(); ++i) {
      CHECK(svd.sigma(i) <= svd.sigma(i - 1));
      CHECK(svd.sigma(i) >= 0.0);
    }
    CHECK(svd.rank == std::min(rows, cols));  // generic matrices are full rank

    ComplexMatrix sigma = ComplexMatrix::Zero(rows, cols);
    for (int i = 0; i < svd.sigma.size(); ++i) sigma(i, i) = svd.sigma(i);
    ComplexMatrix rebuilt = svd.D * sigma * svd.V.adjoint();
    CHECK((rebuilt - g).norm() <= 1e-12 * g.norm());

    // unitarity of both factors
    CHECK((svd.D.adjoint() * svd.D - ComplexMatrix::Identity(rows, rows))
              .norm() <= 1e-12);
    CHECK((svd.V.adjoint() * svd.V - ComplexMatrix::Identity(cols, cols))
              .norm() <= 1e-12);
  }
}

TEST_CASE("svd rank counts significant singular values") {
  ComplexMatrix a = random_matrix(5, 2, 3);
  ComplexMatrix b = random_matrix(2, 5, 4);
  SvdTriple svd = svd_decompose(a * b);  // rank-2 5x5 product
  CHECK(svd.rank == 2);
  CHECK(svd.sigma(2) <= 1e-12 * svd.sigma(0));
}

TEST_CASE("svd ideal transceivers diagonalize exactly") {
  SUBCASE("square channel") {
    ComplexMatrix g = random_matrix(16, 16, 9);
    auto [p, q] = svd_ideal_transceivers(g, 4);
    REQUIRE(p.rows() == 16);
    REQUIRE(p.cols() == 4);
    REQUIRE(q.rows() == 4);
    REQUIRE(q.cols() == 16);
    ComplexMatrix qgp = q * g * p;
    CHECK((qgp - ComplexMatrix::Identity(4, 4)).norm() <= 1e-12);
  }
  SUBCASE("wide channel") {
    ComplexMatrix g = random_matrix(8, 16, 10);
    auto [p, q] = svd_ideal_transceivers(g, 4);
    ComplexMatrix qgp = q * g * p;
    CHECK((qgp - ComplexMatrix::Identity(4, 4)).norm() <= 1e-12);
  }
  SUBCASE("stream count equal to the rank works") {
    ComplexMatrix g = random_matrix(6, 6, 11);
    auto [p, q] = svd_ideal_transceivers(g, 6);
    CHECK((q * g * p - ComplexMatrix::Identity(6, 6)).norm() <= 1e-11);
  }
}

TEST_CASE("svd ideal transceivers reject impossible requests") {
  ComplexMatrix g = random_matrix(6, 6, 12);
  CHECK_THROWS_AS(svd_ideal_transceivers(g, 0), std::invalid_argument);
  CHECK_THROWS_AS(svd_ideal_transceivers(g, 7), std::invalid_argument);

  // rank-1 channel cannot carry two streams
  ComplexMatrix u = random_matrix(6, 1, 13);
  ComplexMatrix v = random_matrix(1, 6, 14);
  CHECK_THROWS_AS(svd_ideal_transceivers(u * v, 2), std::domain_error);
  // but one stream is fine
  auto [p, q] = svd_ideal_transceivers(u * v, 1);
  CHECK((q * (u * v) * p - ComplexMatrix::Identity(1, 1)).norm() <= 1e-12);
}

TEST_CASE("zero-forcing precoder yields a scaled identity") {
  ComplexMatrix g = random_matrix(4, 4, 21);
  const double pt = 2.7;
  ComplexMatrix p = zf_precoder(g, pt);
  REQUIRE(p.rows() == 4);
  REQUIRE(p.cols() == 4);

  // power normalization
  CHECK(p.squaredNorm() == doctest::Approx(pt).epsilon(1e-12));

  // G * P = c * I with the advertised c
  ComplexMatrix gp = g * p;
  ComplexMatrix ggh_inv = (g * g.adjoint()).inverse();
  double c = std::sqrt(pt / ggh_inv.trace().real());
  ComplexMatrix expected = c * ComplexMatrix::Identity(4, 4);
  CHECK((gp - expected).norm() <= 1e-12 * expected.norm());
}

TEST_CASE("zero-forcing validation") {
  CHECK_THROWS_AS(zf_precoder(random_matrix(3, 4, 5), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(zf_precoder(random_matrix(3, 3, 5), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(zf_precoder(random_matrix(3, 3, 5), -2.0),
                  std::invalid_argument);

  // singular square channel
  ComplexMatrix u = random_matrix(3, 1, 6);
  ComplexMatrix v = random_matrix(1, 3, 7);
  CHECK_THROWS_AS(zf_precoder(u * v, 1.0), std::domain_error);
}

TEST_CASE("svd ideal transceivers serve sampled fiber channels") {
  // the shape used throughout the simulations: NS x MS with beta = 1
  ComplexMatrix g = sample_rayleigh_channel(8, 16, 1.0, 99);
  auto [p, q] = svd_ideal_transceivers(g, 4);
  ComplexMatrix qgp = q * g * p;
  CHECK((qgp - ComplexMatrix::Identity(4, 4)).norm() <= 1e-12);
}
