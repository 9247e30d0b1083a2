#pragma once

#include <cstdint>
#include <utility>

#include "simfiber/types.hpp"

namespace simfiber {

// Phase triple steering one meta-fiber sub-area so that the two-atom
// interference pattern reproduces a requested complex amplitude.
struct SubareaPhases {
  double theta1_1;  // first input-layer atom [rad]
  double theta1_2;  // second input-layer atom [rad]
  double theta2_1;  // output-layer atom [rad]
};

// Solves the single sub-area synthesis problem: choose the three phases so
// that chi * rho1 * rho2 * (e^{j(theta1_1+psi1)} + e^{j(theta1_2+psi1)})
// * e^{j(theta2_1+psi2)} equals the requested value. Throws
// std::domain_error when |target| exceeds the reachable amplitude
// 2*chi*rho1_mag*rho2_mag.
SubareaPhases synthesize_subarea_phases(Complex target, double chi,
                                        const TwoLayerTopology& topology);

// Static transmission matrices of the TX meta-fiber stack:
//   W1 (2MS x S): each port s feeds its 2M input-layer atoms,
//   W2 (MS x 2MS): consecutive input atom pairs merge into one output atom.
// Entries outside the fiber pattern are exactly zero.
std::pair<ComplexMatrix, ComplexMatrix> build_tx_fiber_matrices(
    const TwoLayerTopology& topology);

// Static transmission matrices of the RX meta-fiber stack:
//   U2 (2NS x NS): each input-layer atom fans out to two output-layer atoms,
//   U1 (S x 2NS): each port sums its 2N output-layer atoms.
std::pair<ComplexMatrix, ComplexMatrix> build_rx_fiber_matrices(
    const TwoLayerTopology& topology);

enum class PathGainConvention {
  // beta = d^{-gamma} / beta0: the free-space aperture gain at the reference
  // distance times the power-law decay. Keeps beta << 1 at radio
  // wavelengths, i.e. an actual loss.
  free_space_gain,
  // beta = beta0 * d^{-gamma} with beta0 = (4*pi/lambda)^2 as sometimes
  // quoted; at centimeter wavelengths this exceeds one, so it amplifies.
  inverse_free_space,
};

// Average channel power gain between TX-SIM output and RX-SIM input.
double path_gain(const LinkBudget& budget, PathGainConvention convention);

// rows x cols matrix of i.i.d. CN(0, beta) entries, deterministic in seed.
// Entries are drawn row by row, left to right.
ComplexMatrix sample_rayleigh_channel(int rows, int cols, double beta,
                                      std::uint64_t seed);

enum class Side { tx, rx };

// Free-space coupling between adjacent layers of a conventional stacked
// metasurface, from scalar diffraction theory:
//   w(n, m) = (A_t * cos_chi / r) * (1/(2*pi*r) - j/lambda) * e^{j*2*pi*r/lambda}
// where r is the atom-to-atom distance and cos_chi = layer_spacing / r.
// layer_index = 1 couples the port array to the innermost layer and returns
// W x S (tx) or S x U (rx); layer_index >= 2 couples two full layers and
// returns W x W (tx) or U x U (rx). Throws std::domain_error on coincident
// elements (r = 0).
ComplexMatrix build_diffraction_matrix(const MultiLayerTopology& topology,
                                       Side side, int layer_index);

}  // namespace simfiber
