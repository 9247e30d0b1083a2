#include "simfiber/optimizer.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "simfiber/channel.hpp"
#include "simfiber/rng.hpp"

namespace simfiber {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
// Below this coefficient magnitude an atom has no measurable influence on
// the objective and its phase is left untouched.
constexpr double kNoInfluence = 1e-15;

double wrap_angle(double theta) {
  double wrapped = std::fmod(theta, kTwoPi);
  if (wrapped < 0.0) wrapped += kTwoPi;
  if (wrapped >= kTwoPi) wrapped = 0.0;
  return wrapped;
}

ComplexVector to_phasors(const RealVector& phases) {
  ComplexVector v(phases.size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) {
    v(i) = std::polar(1.0, phases(i));
  }
  return v;
}

void validate_problem(const FitProblem& problem) {
  const int n = problem.layer_count();
  if (problem.S < 1) {
    throw std::invalid_argument("stream count must be positive");
  }
  if (n < 2 || problem.n_tx_layers < 1 || problem.n_tx_layers >= n) {
    throw std::invalid_argument(
        "problem needs at least one programmable layer per side");
  }
  if (problem.chain.front().cols() != problem.S) {
    throw std::invalid_argument("first TX matrix must have S columns");
  }
  if (problem.chain.back().rows() != problem.S) {
    throw std::invalid_argument("last RX matrix must have S rows");
  }
  for (std::size_t i = 0; i + 1 < problem.chain.size(); ++i) {
    if (problem.chain[i + 1].cols() != problem.chain[i].rows()) {
      throw std::invalid_argument(
          "matrix chain dimensions do not compose after layer " +
          std::to_string(i + 1));
    }
  }
}

void validate_state(const PhaseState& state, const FitProblem& problem) {
  const int n = problem.layer_count();
  if (static_cast<int>(state.layer_phases.size()) != n) {
    throw std::invalid_argument("state has " +
                                std::to_string(state.layer_phases.size()) +
                                " phase vectors, problem has " +
                                std::to_string(n) + " layers");
  }
  for (int p = 1; p <= n; ++p) {
    if (state.layer_phases[p - 1].size() != problem.layer_size(p)) {
      throw std::invalid_argument("phase vector length mismatch at layer " +
                                  std::to_string(p));
    }
  }
}

double nmse_from_objective(double j_value, double alpha, int S) {
  if (alpha == 0.0) return std::numeric_limits<double>::infinity();
  return j_value / (alpha * alpha * static_cast<double>(S));
}

// Fisher-Yates with an explicit generator; std::shuffle draws in an
// implementation-defined way, which would break replay across platforms.
void shuffle_indices(std::vector<int>& indices, Rng& rng) {
  for (std::size_t i = indices.size(); i > 1; --i) {
    std::size_t pick = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(indices[i - 1], indices[pick]);
  }
}

}  // namespace

FitProblem make_fit_problem(std::vector<ComplexMatrix> tx_matrices,
                            ComplexMatrix g,
                            std::vector<ComplexMatrix> rx_matrices, int S,
                            double target_phase) {
  if (tx_matrices.empty() || rx_matrices.empty()) {
    throw std::invalid_argument(
        "each side needs at least one transmission matrix");
  }
  FitProblem problem;
  problem.S = S;
  problem.n_tx_layers = static_cast<int>(tx_matrices.size());
  problem.target_phase = target_phase;
  problem.chain.reserve(tx_matrices.size() + 1 + rx_matrices.size());
  for (auto& m : tx_matrices) problem.chain.push_back(std::move(m));
  problem.chain.push_back(std::move(g));
  for (auto& m : rx_matrices) problem.chain.push_back(std::move(m));
  validate_problem(problem);
  return problem;
}

FitProblem make_two_layer_problem(const TwoLayerTopology& topology,
                                  const ComplexMatrix& g, double target_phase) {
  topology.validate();
  if (g.rows() != topology.rx_input_atoms() ||
      g.cols() != topology.tx_output_atoms()) {
    throw std::invalid_argument(
        "channel must be (N*S) x (M*S) for this topology, got " +
        std::to_string(g.rows()) + " x " + std::to_string(g.cols()));
  }
  auto [w1, w2] = build_tx_fiber_matrices(topology);
  auto [u2, u1] = build_rx_fiber_matrices(topology);
  return make_fit_problem({std::move(w1), std::move(w2)}, g,
                          {std::move(u2), std::move(u1)}, topology.S,
                          target_phase);
}

PhaseState initial_state(const FitProblem& problem,
                         const SolverConfig& config) {
  validate_problem(problem);
  PhaseState state;
  state.alpha = 1.0;
  const int n = problem.layer_count();
  state.layer_phases.reserve(static_cast<std::size_t>(n));
  Rng rng(mix_seed(config.rng_seed, 0x1a17));
  for (int p = 1; p <= n; ++p) {
    RealVector phases = RealVector::Zero(problem.layer_size(p));
    if (config.init == SolverConfig::Init::random) {
      for (Eigen::Index i = 0; i < phases.size(); ++i) {
        phases(i) = rng.uniform() * kTwoPi;
      }
    }
    state.layer_phases.push_back(std::move(phases));
  }
  return state;
}

ComplexMatrix assemble_precoder(const PhaseState& state,
                                const FitProblem& problem) {
  validate_problem(problem);
  validate_state(state, problem);
  ComplexMatrix acc = problem.chain[0];
  for (int p = 1; p <= problem.n_tx_layers; ++p) {
    acc = to_phasors(state.layer_phases[p - 1]).asDiagonal() * acc;
    if (p < problem.n_tx_layers) {
      acc = problem.chain[static_cast<std::size_t>(p)] * acc;
    }
  }
  return acc;
}

ComplexMatrix assemble_combiner(const PhaseState& state,
                                const FitProblem& problem) {
  validate_problem(problem);
  validate_state(state, problem);
  const int n = problem.layer_count();
  const int first = problem.n_tx_layers + 1;
  ComplexMatrix acc = problem.chain[static_cast<std::size_t>(first)] *
                      to_phasors(state.layer_phases[first - 1]).asDiagonal();
  for (int p = first + 1; p <= n; ++p) {
    acc = problem.chain[static_cast<std::size_t>(p)] *
          (to_phasors(state.layer_phases[p - 1]).asDiagonal() * acc);
  }
  return acc;
}

ComplexMatrix equivalent_channel(const PhaseState& state,
                                 const FitProblem& problem) {
  return assemble_combiner(state, problem) *
         (problem.channel() * assemble_precoder(state, problem));
}

double objective(const PhaseState& state, const FitProblem& problem) {
  ComplexMatrix residual = equivalent_channel(state, problem);
  residual.diagonal().array() -=
      state.alpha * std::polar(1.0, problem.target_phase);
  return residual.squaredNorm();
}

std::pair<ComplexMatrix, ComplexMatrix> cascade_pair(
    int p, const PhaseState& state, const FitProblem& problem) {
  validate_problem(problem);
  validate_state(state, problem);
  const int n = problem.layer_count();
  if (p < 1 || p > n) {
    throw std::invalid_argument("layer index " + std::to_string(p) +
                                " out of range 1.." + std::to_string(n));
  }
  ComplexMatrix right = problem.chain[0];
  for (int i = 1; i < p; ++i) {
    right = problem.chain[static_cast<std::size_t>(i)] *
            (to_phasors(state.layer_phases[i - 1]).asDiagonal() * right);
  }
  ComplexMatrix left = problem.chain[static_cast<std::size_t>(n)];
  for (int i = n; i > p; --i) {
    left = (left * to_phasors(state.layer_phases[i - 1]).asDiagonal()) *
           problem.chain[static_cast<std::size_t>(i - 1)];
  }
  return {std::move(left), std::move(right)};
}

std::pair<ComplexMatrix, ComplexMatrix> cascades_2layer(
    int q, const PhaseState& state, const FitProblem& problem) {
  if (problem.layer_count() != 4 || problem.n_tx_layers != 2) {
    throw std::invalid_argument(
        "two-layer cascades require a 2+2 programmable chain");
  }
  if (q < 1 || q > 4) {
    throw std::invalid_argument("layer index q must be in 1..4");
  }
  return cascade_pair(q, state, problem);
}

std::pair<ComplexMatrix, ComplexMatrix> cascades_multilayer(
    int p, const PhaseState& state, const FitProblem& problem) {
  return cascade_pair(p, state, problem);
}

namespace {

// Shared core of the closed-form coordinate step. With everything but atom
// m fixed, J(theta) = ||offset + e^{j*theta} * influence||_F^2
//                   = const + 2*Re[c * e^{j*theta}],
// where offset is the target-shifted contribution of all other atoms and
// c = sum(conj(offset) .* influence). The stationary angles are
// atan2(-Im c, Re c) and its antipode; the antipode is the minimizer, but
// both are evaluated and the lower-J one returned.
struct CoordinateStep {
  double theta;        // selected angle, wrapped to [0, 2*pi)
  bool moved;          // false when the atom has no influence
  Complex c;           // sinusoid coefficient
  double j_constant;   // ||offset||^2 + ||influence||^2
};

CoordinateStep solve_coordinate(const ComplexMatrix& offset,
                                const ComplexMatrix& influence,
                                double current_theta) {
  CoordinateStep step;
  step.j_constant = offset.squaredNorm() + influence.squaredNorm();
  step.c = (offset.conjugate().cwiseProduct(influence)).sum();
  if (std::abs(step.c.real()) < kNoInfluence &&
      std::abs(step.c.imag()) < kNoInfluence) {
    step.theta = wrap_angle(current_theta);
    step.moved = false;
    return step;
  }
  double root1 = std::atan2(-step.c.imag(), step.c.real());
  double root2 = root1 + M_PI;
  double j1 = step.c.real() * std::cos(root1) - step.c.imag() * std::sin(root1);
  double j2 = step.c.real() * std::cos(root2) - step.c.imag() * std::sin(root2);
  step.theta = wrap_angle(j1 <= j2 ? root1 : root2);
  step.moved = true;
  return step;
}

}  // namespace

double phase_update_closed_form(const ComplexMatrix& left,
                                const ComplexMatrix& right, Complex target_gain,
                                const RealVector& phases, int m) {
  if (left.cols() != right.rows() || left.cols() != phases.size()) {
    throw std::invalid_argument("cascade and phase-vector sizes disagree");
  }
  if (m < 0 || m >= phases.size()) {
    throw std::invalid_argument("atom index out of range");
  }
  ComplexVector phasors = to_phasors(phases);
  ComplexMatrix h = left * phasors.asDiagonal() * right;
  ComplexMatrix influence = left.col(m) * right.row(m);
  ComplexMatrix offset = h - phasors(m) * influence;
  offset.diagonal().array() -= target_gain;
  return solve_coordinate(offset, influence, phases(m)).theta;
}

double alpha_update(const ComplexMatrix& h, double target_phase) {
  if (h.rows() != h.cols() || h.rows() < 1) {
    throw std::invalid_argument("equivalent channel must be square");
  }
  Complex rotated_trace = std::polar(1.0, -target_phase) * h.trace();
  return rotated_trace.real() / static_cast<double>(h.rows());
}

FitResult run_ao(const FitProblem& problem, const SolverConfig& config) {
  validate_problem(problem);
  if (config.max_iterations < 1) {
    throw std::invalid_argument("max_iterations must be >= 1");
  }
  if (!(config.objective_decrement_threshold >= 0.0)) {
    throw std::invalid_argument("objective decrement threshold must be >= 0");
  }

  const int n = problem.layer_count();
  const int S = problem.S;
  const Complex target_dir = std::polar(1.0, problem.target_phase);
  const bool randomized = config.order == SolverConfig::Order::randomized;

  FitResult result;
  result.state = initial_state(problem, config);
  PhaseState& state = result.state;
  Rng order_rng(mix_seed(config.rng_seed, 0x0bde));

  std::vector<ComplexVector> phasors(static_cast<std::size_t>(n));
  for (int p = 1; p <= n; ++p) {
    phasors[p - 1] = to_phasors(state.layer_phases[p - 1]);
  }

  double j_value = objective(state, problem);
  result.objective_trace.push_back(j_value);
  result.nmse_trace.push_back(nmse_from_objective(j_value, state.alpha, S));
  if (config.record_update_trace) result.update_trace.push_back(j_value);

  std::vector<int> layer_order(static_cast<std::size_t>(n));
  std::iota(layer_order.begin(), layer_order.end(), 1);

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    if (randomized) shuffle_indices(layer_order, order_rng);
    for (int p : layer_order) {
      auto [left, right] = cascade_pair(p, state, problem);
      const Eigen::Index q_size = right.rows();
      RealVector& phases = state.layer_phases[p - 1];
      ComplexVector& layer_phasors = phasors[p - 1];

      std::vector<int> atom_order(static_cast<std::size_t>(q_size));
      std::iota(atom_order.begin(), atom_order.end(), 0);
      if (randomized) shuffle_indices(atom_order, order_rng);

      // Workspaces reused across the atom loop; every update recomputes the
      // layer-local equivalent channel from the cascades in O(S^2 * Q_p).
      ComplexMatrix scaled_right(q_size, S);
      ComplexMatrix h(S, S);
      ComplexMatrix influence(S, S);
      ComplexMatrix offset(S, S);
      for (int m : atom_order) {
        scaled_right.noalias() = layer_phasors.asDiagonal() * right;
        h.noalias() = left * scaled_right;
        influence.noalias() = left.col(m) * right.row(m);
        offset = h - layer_phasors(m) * influence;
        offset.diagonal().array() -= state.alpha * target_dir;
        CoordinateStep step = solve_coordinate(offset, influence, phases(m));
        phases(m) = step.theta;
        layer_phasors(m) = std::polar(1.0, step.theta);
        if (config.record_update_trace) {
          result.update_trace.push_back(
              (offset + layer_phasors(m) * influence).squaredNorm());
        }
      }
    }

    ComplexMatrix h_now = equivalent_channel(state, problem);
    state.alpha = alpha_update(h_now, problem.target_phase);
    h_now.diagonal().array() -= state.alpha * target_dir;
    double j_new = h_now.squaredNorm();
    if (config.record_update_trace) result.update_trace.push_back(j_new);
    result.objective_trace.push_back(j_new);
    result.nmse_trace.push_back(nmse_from_objective(j_new, state.alpha, S));
    result.iterations_used = iter;
    if (j_value - j_new < config.objective_decrement_threshold) {
      result.converged = true;
      break;
    }
    j_value = j_new;
  }
  return result;
}

FitResult run_ao_2layer(const FitProblem& problem, const SolverConfig& config) {
  if (problem.layer_count() != 4 || problem.n_tx_layers != 2) {
    throw std::invalid_argument(
        "two-layer solver requires a 2+2 programmable chain");
  }
  return run_ao(problem, config);
}

FitResult run_ao_multilayer(const FitProblem& problem,
                            const SolverConfig& config) {
  return run_ao(problem, config);
}

}  // namespace simfiber
