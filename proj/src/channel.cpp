#include "simfiber/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "simfiber/rng.hpp"

namespace simfiber {

namespace {

int checked_grid_side(int atoms, const char* which) {
  int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(atoms))));
  if (side < 1 || side * side != atoms) {
    throw std::invalid_argument(std::string(which) +
                                " atom count must be a perfect square, got " +
                                std::to_string(atoms));
  }
  return side;
}

}  // namespace

void TwoLayerTopology::validate() const {
  if (S < 1 || M < 1 || N < 1) {
    throw std::invalid_argument("topology requires S >= 1, M >= 1, N >= 1");
  }
  if (!(rho1_mag > 0.0) || !(rho2_mag > 0.0)) {
    throw std::invalid_argument("meta-fiber amplitude gains must be positive");
  }
  if (!std::isfinite(psi1) || !std::isfinite(psi2)) {
    throw std::invalid_argument("meta-fiber phase offsets must be finite");
  }
}

void MultiLayerTopology::validate() const {
  if (S < 1 || L < 1 || K < 1 || W < 1 || U < 1) {
    throw std::invalid_argument(
        "topology requires S, L, K, W, U all >= 1");
  }
  checked_grid_side(W, "TX layer");
  checked_grid_side(U, "RX layer");
  if (!(atom_spacing > 0.0) || !(layer_spacing > 0.0)) {
    throw std::invalid_argument("atom and layer spacings must be positive");
  }
  if (!(atom_area > 0.0) || !(wavelength > 0.0)) {
    throw std::invalid_argument("atom area and wavelength must be positive");
  }
}

int MultiLayerTopology::tx_grid_side() const {
  return checked_grid_side(W, "TX layer");
}

int MultiLayerTopology::rx_grid_side() const {
  return checked_grid_side(U, "RX layer");
}

void LinkBudget::validate() const {
  if (!(beta0 > 0.0) || !(distance_m > 0.0)) {
    throw std::invalid_argument("beta0 and distance must be positive");
  }
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("path-loss exponent must be positive");
  }
  if (!(pt > 0.0) || !(n0 > 0.0)) {
    throw std::invalid_argument("transmit and noise powers must be positive");
  }
}

LinkBudget LinkBudget::from_wavelength(double wavelength, double distance_m,
                                       double gamma, double pt, double n0) {
  if (!(wavelength > 0.0)) {
    throw std::invalid_argument("wavelength must be positive");
  }
  LinkBudget budget;
  double factor = 4.0 * M_PI / wavelength;
  budget.beta0 = factor * factor;
  budget.distance_m = distance_m;
  budget.gamma = gamma;
  budget.pt = pt;
  budget.n0 = n0;
  budget.validate();
  return budget;
}

SubareaPhases synthesize_subarea_phases(Complex target, double chi,
                                        const TwoLayerTopology& topology) {
  topology.validate();
  if (!(chi > 0.0)) {
    throw std::invalid_argument("input amplitude chi must be positive");
  }
  double reach = 2.0 * chi * topology.rho1_mag * topology.rho2_mag;
  double magnitude = std::abs(target);
  if (magnitude > reach) {
    throw std::domain_error(
        "requested amplitude " + std::to_string(magnitude) +
        " exceeds the reachable maximum " + std::to_string(reach));
  }
  // The two input atoms produce 2*cos(theta)*e^{j*psi1}; the output atom
  // rotates the sum onto the requested argument.
  double half_ratio = magnitude / reach;  // = |target| / (2*chi*rho1*rho2) / 1
  if (half_ratio > 1.0) half_ratio = 1.0;
  double split = std::acos(half_ratio);
  SubareaPhases phases;
  phases.theta1_1 = split;
  phases.theta1_2 = -split;
  phases.theta2_1 = std::arg(target) - topology.psi1 - topology.psi2;
  return phases;
}

std::pair<ComplexMatrix, ComplexMatrix> build_tx_fiber_matrices(
    const TwoLayerTopology& topology) {
  topology.validate();
  const int S = topology.S;
  const int M = topology.M;
  const Complex fiber1 = std::polar(topology.rho1_mag, topology.psi1);
  const Complex fiber2 = std::polar(topology.rho2_mag, topology.psi2);

  ComplexMatrix w1 = ComplexMatrix::Zero(2 * M * S, S);
  for (int s = 0; s < S; ++s) {
    w1.block(2 * M * s, s, 2 * M, 1).setConstant(fiber1);
  }
  ComplexMatrix w2 = ComplexMatrix::Zero(M * S, 2 * M * S);
  for (int i = 0; i < M * S; ++i) {
    w2(i, 2 * i) = fiber2;
    w2(i, 2 * i + 1) = fiber2;
  }
  return {std::move(w1), std::move(w2)};
}

std::pair<ComplexMatrix, ComplexMatrix> build_rx_fiber_matrices(
    const TwoLayerTopology& topology) {
  topology.validate();
  const int S = topology.S;
  const int N = topology.N;
  const Complex fiber1 = std::polar(topology.rho1_mag, topology.psi1);
  const Complex fiber2 = std::polar(topology.rho2_mag, topology.psi2);

  ComplexMatrix u2 = ComplexMatrix::Zero(2 * N * S, N * S);
  for (int i = 0; i < N * S; ++i) {
    u2(2 * i, i) = fiber2;
    u2(2 * i + 1, i) = fiber2;
  }
  ComplexMatrix u1 = ComplexMatrix::Zero(S, 2 * N * S);
  for (int s = 0; s < S; ++s) {
    u1.block(s, 2 * N * s, 1, 2 * N).setConstant(fiber1);
  }
  return {std::move(u2), std::move(u1)};
}

double path_gain(const LinkBudget& budget, PathGainConvention convention) {
  budget.validate();
  double decay = std::pow(budget.distance_m, -budget.gamma);
  switch (convention) {
    case PathGainConvention::free_space_gain:
      return decay / budget.beta0;
    case PathGainConvention::inverse_free_space:
      return budget.beta0 * decay;
  }
  throw std::invalid_argument("unknown path-gain convention");
}

ComplexMatrix sample_rayleigh_channel(int rows, int cols, double beta,
                                      std::uint64_t seed) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("channel dimensions must be positive");
  }
  if (!(beta > 0.0)) {
    throw std::invalid_argument("channel variance beta must be positive");
  }
  Rng rng(seed);
  ComplexMatrix g(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      g(i, j) = rng.complex_gaussian(beta);
    }
  }
  return g;
}

namespace {

// One scalar diffraction coefficient. Lateral offsets are carried as integer
// multiples of half the atom spacing so that equal geometric offsets map to
// bitwise-equal coefficients (exact translation invariance).
Complex diffraction_entry(long long dx_half_units, long long dy_half_units,
                          const MultiLayerTopology& topology) {
  double half = 0.5 * topology.atom_spacing;
  double lateral_sq =
      static_cast<double>(dx_half_units * dx_half_units +
                          dy_half_units * dy_half_units) *
      half * half;
  double r = std::sqrt(lateral_sq +
                       topology.layer_spacing * topology.layer_spacing);
  if (r == 0.0) {
    throw std::domain_error("degenerate geometry: coincident elements (r = 0)");
  }
  double cos_chi = topology.layer_spacing / r;
  double two_pi_r = 2.0 * M_PI * r;
  Complex radial(1.0 / two_pi_r, -1.0 / topology.wavelength);
  Complex phase = std::polar(1.0, two_pi_r / topology.wavelength);
  return (topology.atom_area * cos_chi / r) * radial * phase;
}

}  // namespace

ComplexMatrix build_diffraction_matrix(const MultiLayerTopology& topology,
                                       Side side, int layer_index) {
  topology.validate();
  const int layers = side == Side::tx ? topology.L : topology.K;
  if (layer_index < 1 || layer_index > layers) {
    throw std::invalid_argument("layer index " + std::to_string(layer_index) +
                                " out of range 1.." + std::to_string(layers));
  }
  const int atoms = side == Side::tx ? topology.W : topology.U;
  const int grid =
      side == Side::tx ? topology.tx_grid_side() : topology.rx_grid_side();
  const int S = topology.S;

  if (layer_index == 1) {
    // Port array to innermost layer. Ports sit on a centered uniform linear
    // array along x with the same element spacing as the grid.
    ComplexMatrix coupling(atoms, S);
    for (int n = 0; n < atoms; ++n) {
      int ix = n % grid;
      int iy = n / grid;
      long long ax = 2LL * ix - (grid - 1);
      long long ay = 2LL * iy - (grid - 1);
      for (int s = 0; s < S; ++s) {
        long long px = 2LL * s - (S - 1);
        coupling(n, s) = diffraction_entry(ax - px, ay, topology);
      }
    }
    if (side == Side::rx) {
      // On the receive side the signal flows layer -> ports, so the
      // port-coupling matrix is S x U.
      return coupling.transpose();
    }
    return coupling;
  }

  // Layer-to-layer coupling between two identical centered grids; the
  // coefficient depends only on the integer index offset.
  ComplexMatrix coupling(atoms, atoms);
  for (int n = 0; n < atoms; ++n) {
    int nx = n % grid;
    int ny = n / grid;
    for (int m = 0; m < atoms; ++m) {
      int mx = m % grid;
      int my = m / grid;
      coupling(n, m) =
          diffraction_entry(2LL * (nx - mx), 2LL * (ny - my), topology);
    }
  }
  return coupling;
}

}  // namespace simfiber
