#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "simfiber/types.hpp"

namespace simfiber {

// Decision variables of the fitting problem: one phase vector per
// programmable layer (entries wrapped to [0, 2*pi)) plus the real scalar
// channel gain alpha of the target alpha * I_S.
struct PhaseState {
  std::vector<RealVector> layer_phases;
  double alpha = 1.0;
};

// The channel-fitting problem min ||Q G P - alpha * I_S||_F^2 expressed as a
// single alternating matrix chain
//   Q G P = chain[n] * Phi_n * chain[n-1] * ... * Phi_1 * chain[0]
// where Phi_p = diag(e^{j*theta_p}) is the p-th programmable layer. The
// first n_tx_layers phase layers live inside the precoder P, the remaining
// ones inside the combiner Q, and chain[n_tx_layers] is the propagation
// channel G. Both SIM architectures reduce to this form.
struct FitProblem {
  std::vector<ComplexMatrix> chain;
  int n_tx_layers = 0;
  int S = 0;
  // The fitting target is alpha * e^{j*target_phase} * I_S; the default 0
  // targets a real positive gain.
  double target_phase = 0.0;

  int layer_count() const { return static_cast<int>(chain.size()) - 1; }
  int layer_size(int p) const {
    return static_cast<int>(chain[static_cast<std::size_t>(p) - 1].rows());
  }
  const ComplexMatrix& channel() const {
    return chain[static_cast<std::size_t>(n_tx_layers)];
  }
};

// Assembles a FitProblem from explicit per-layer transmission matrices.
// tx_matrices are listed in propagation order starting at the ports
// (tx_matrices[0] maps ports to the first programmable layer); rx_matrices
// are listed in propagation order starting at the channel-facing layer and
// ending with the matrix into the receive ports. A programmable phase layer
// sits after every matrix except the last rx one.
FitProblem make_fit_problem(std::vector<ComplexMatrix> tx_matrices,
                            ComplexMatrix g,
                            std::vector<ComplexMatrix> rx_matrices, int S,
                            double target_phase = 0.0);

// Convenience constructor for the meta-fiber architecture: builds the fiber
// matrices internally from the topology.
FitProblem make_two_layer_problem(const TwoLayerTopology& topology,
                                  const ComplexMatrix& g,
                                  double target_phase = 0.0);

struct SolverConfig {
  int max_iterations = 20;
  // Stop when the objective decrease over one full sweep falls below this
  // absolute threshold.
  double objective_decrement_threshold = 1e-14;
  enum class Init { identity, random } init = Init::identity;
  enum class Order { ascending, randomized } order = Order::ascending;
  std::uint64_t rng_seed = 0;  // used by random init / randomized order
  // When set, FitResult::update_trace records the objective value after
  // every single coordinate update (each phase and each alpha step).
  bool record_update_trace = false;
};

struct FitResult {
  PhaseState state;
  // Objective after each outer iteration; position 0 holds the value at the
  // initial point. Monotonically non-increasing.
  std::vector<double> objective_trace;
  // nmse_trace[i] = objective_trace[i] / (alpha_i^2 * S) with the alpha in
  // effect at that point (infinity if alpha = 0).
  std::vector<double> nmse_trace;
  int iterations_used = 0;
  bool converged = false;
  std::vector<double> update_trace;  // see SolverConfig::record_update_trace
};

// Initial state per config: all phases zero (identity) or uniform in
// [0, 2*pi), alpha = 1.
PhaseState initial_state(const FitProblem& problem, const SolverConfig& config);

// End-to-end precoder P = Phi_{n_tx} * chain[n_tx-1] * ... * Phi_1 * chain[0].
ComplexMatrix assemble_precoder(const PhaseState& state,
                                const FitProblem& problem);

// End-to-end combiner Q = chain[n] * Phi_n * ... * chain[n_tx+1] * Phi_{n_tx+1}.
ComplexMatrix assemble_combiner(const PhaseState& state,
                                const FitProblem& problem);

// Equivalent channel H = Q * G * P.
ComplexMatrix equivalent_channel(const PhaseState& state,
                                 const FitProblem& problem);

// J = ||Q G P - alpha * e^{j*target_phase} * I_S||_F^2.
double objective(const PhaseState& state, const FitProblem& problem);

// Cascade factorization around layer p (1-based): returns (left, right) with
// left * Phi_p * right = Q G P. left is S x Q_p, right is Q_p x S.
std::pair<ComplexMatrix, ComplexMatrix> cascade_pair(int p,
                                                     const PhaseState& state,
                                                     const FitProblem& problem);

// Cascades of the two-layer meta-fiber solver, q in 1..4 (q=1: TX input
// layer, q=2: TX output layer, q=3: RX input layer, q=4: RX output layer).
std::pair<ComplexMatrix, ComplexMatrix> cascades_2layer(
    int q, const PhaseState& state, const FitProblem& problem);

// Cascades of the multi-layer solver, p in 1..L+K counted from the TX ports
// outward, then from the RX channel-facing layer in to the ports.
std::pair<ComplexMatrix, ComplexMatrix> cascades_multilayer(
    int p, const PhaseState& state, const FitProblem& problem);

// Restricting J to the phase of atom m with everything else fixed gives
//   J(theta) = const + 2 * Re[c * e^{j*theta}],
// minimized in closed form. Returns the J-minimizing angle among the two
// stationary roots, wrapped to [0, 2*pi); leaves the phase unchanged when
// the atom has no influence (|Re c| and |Im c| both below 1e-15).
double phase_update_closed_form(const ComplexMatrix& left,
                                const ComplexMatrix& right, Complex target_gain,
                                const RealVector& phases, int m);

// Least-squares gain against the target direction:
// alpha = Re(e^{-j*target_phase} * tr H) / S.
double alpha_update(const ComplexMatrix& h, double target_phase = 0.0);

// Alternating optimization: sweeps the layers in order, updating every atom
// phase in closed form against cascades refreshed once per layer sweep, then
// refits alpha; repeats until the per-sweep objective decrement falls below
// the threshold or max_iterations is reached.
FitResult run_ao(const FitProblem& problem, const SolverConfig& config);

// Named entry points for the two architectures (both drive the same sweep).
FitResult run_ao_2layer(const FitProblem& problem, const SolverConfig& config);
FitResult run_ao_multilayer(const FitProblem& problem,
                            const SolverConfig& config);

}  // namespace simfiber
