#pragma once

#include <complex>

#include <Eigen/Dense>

namespace simfiber {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Meta-fiber connected SIM with two programmable layers per side.
// Each of the S transmit ports feeds its own decoupled sub-area: the port
// splits into 2M input-layer atoms (type-1 fibers, gain rho1_mag*e^{j*psi1}),
// and input atoms are paired two-to-one onto M output-layer atoms (type-2
// fibers, gain rho2_mag*e^{j*psi2}). The receive side mirrors this: N
// input-layer atoms per port fan out to 2N output-layer atoms, which are
// summed into the port.
struct TwoLayerTopology {
  int S = 1;              // stream / port count
  int M = 1;              // output-layer atoms per TX sub-area
  int N = 1;              // input-layer atoms per RX sub-area
  double rho1_mag = 1.0;  // port-side meta-fiber amplitude gain
  double rho2_mag = 1.0;  // layer-to-layer meta-fiber amplitude gain
  double psi1 = 0.0;      // port-side meta-fiber phase offset [rad]
  double psi2 = 0.0;      // layer-to-layer meta-fiber phase offset [rad]

  void validate() const;

  int tx_input_atoms() const { return 2 * M * S; }
  int tx_output_atoms() const { return M * S; }
  int rx_input_atoms() const { return N * S; }
  int rx_output_atoms() const { return 2 * N * S; }
};

// Conventional stacked metasurface: L (TX) / K (RX) layers of W (resp. U)
// atoms on centered uniform square grids, coaxially aligned, coupled by
// free-space diffraction. The S ports form a centered uniform linear array
// along the grid x-axis at one layer spacing from the innermost layer.
struct MultiLayerTopology {
  int S = 1;                   // port count
  int L = 1;                   // TX metasurface layer count
  int K = 1;                   // RX metasurface layer count
  int W = 1;                   // atoms per TX layer (perfect square)
  int U = 1;                   // atoms per RX layer (perfect square)
  double atom_spacing = 0.5;   // adjacent meta-atom spacing [m]
  double layer_spacing = 0.5;  // adjacent layer spacing [m]
  double atom_area = 0.25;     // meta-atom aperture area [m^2]
  double wavelength = 1.0;     // carrier wavelength [m]

  void validate() const;

  int tx_grid_side() const;  // sqrt(W); validate() rejects non-squares
  int rx_grid_side() const;  // sqrt(U)
};

// Scalar link-budget parameters shared by path gain, capacity and BER.
struct LinkBudget {
  double beta0 = 1.0;       // reference path-gain factor at unit distance
  double distance_m = 1.0;  // link distance d [m]
  double gamma = 2.0;       // path-loss exponent
  double pt = 1.0;          // per-stream transmit power [W]
  double n0 = 1.0;          // noise power at the receive ports [W]

  void validate() const;

  // beta0 = (4*pi/wavelength)^2, the inverse of the free-space gain at the
  // unit reference distance.
  static LinkBudget from_wavelength(double wavelength, double distance_m,
                                    double gamma, double pt, double n0);
};

}  // namespace simfiber
