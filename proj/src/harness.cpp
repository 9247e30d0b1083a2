#include "simfiber/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

#include "json.hpp"

#include "simfiber/baselines.hpp"
#include "simfiber/optimizer.hpp"
#include "simfiber/rng.hpp"

namespace simfiber {

namespace {

using nlohmann::json;

// Seed-derivation salts: every independent random draw of an experiment
// owns a distinct stream derived from the trial seed.
constexpr std::uint64_t kSaltTwoLayerChannel = 0x2c;
constexpr std::uint64_t kSaltMultiLayerChannel = 0x7c;
constexpr std::uint64_t kSaltZfChannel = 0x5f;
constexpr std::uint64_t kSaltBerTwoLayer = 0xbe2;
constexpr std::uint64_t kSaltBerMultiLayer = 0xbe7;

struct KindEntry {
  ExperimentKind kind;
  const char* name;
};

constexpr KindEntry kKindTable[] = {
    {ExperimentKind::convergence, "convergence"},
    {ExperimentKind::heatmap, "heatmap"},
    {ExperimentKind::sweep_atoms, "sweep_atoms"},
    {ExperimentKind::sweep_streams, "sweep_streams"},
    {ExperimentKind::sweep_distance, "sweep_distance"},
    {ExperimentKind::sweep_attenuation, "sweep_attenuation"},
    {ExperimentKind::capacity_compare, "capacity_compare"},
    {ExperimentKind::ber_curve, "ber_curve"},
    {ExperimentKind::scaling_bench, "scaling_bench"},
};

[[noreturn]] void config_error(const std::string& message) {
  throw std::invalid_argument("config error: " + message);
}

ExperimentKind kind_from_name(const std::string& name) {
  for (const auto& entry : kKindTable) {
    if (name == entry.name) return entry.kind;
  }
  std::string known;
  for (const auto& entry : kKindTable) {
    if (!known.empty()) known += ", ";
    known += entry.name;
  }
  config_error("unknown experiment kind '" + name + "' (expected one of: " +
               known + ")");
}

const char* format_name(OutputFormat format) {
  return format == OutputFormat::csv ? "csv" : "jsonl";
}

const char* convention_name(PathGainConvention convention) {
  return convention == PathGainConvention::free_space_gain
             ? "free_space_gain"
             : "inverse_free_space";
}

const char* formula_name(CapacityFormula formula) {
  return formula == CapacityFormula::power_scaled_interference
             ? "power_scaled_interference"
             : "unscaled_interference";
}

const char* architecture_name(Architecture architecture) {
  return architecture == Architecture::two_layer ? "two_layer" : "multi_layer";
}

double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

std::string shortest_double(double value) {
  char buffer[32];
  auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

// --- config parsing ------------------------------------------------------

long long require_integer(const json& value, const std::string& key,
                          long long min_value, long long max_value) {
  if (!value.is_number_integer()) {
    config_error("key '" + key + "' must be an integer");
  }
  long long v = value.get<long long>();
  if (v < min_value || v > max_value) {
    config_error("key '" + key + "' must be in [" + std::to_string(min_value) +
                 ", " + std::to_string(max_value) + "], got " +
                 std::to_string(v));
  }
  return v;
}

double require_number(const json& value, const std::string& key) {
  if (!value.is_number()) {
    config_error("key '" + key + "' must be a number");
  }
  return value.get<double>();
}

double require_positive(const json& value, const std::string& key) {
  double v = require_number(value, key);
  if (!(v > 0.0)) {
    config_error("key '" + key + "' must be positive");
  }
  return v;
}

std::string require_string(const json& value, const std::string& key) {
  if (!value.is_string()) {
    config_error("key '" + key + "' must be a string");
  }
  return value.get<std::string>();
}

std::vector<int> require_int_list(const json& value, const std::string& key,
                                  long long min_value) {
  if (!value.is_array() || value.empty()) {
    config_error("key '" + key + "' must be a non-empty array of integers");
  }
  std::vector<int> out;
  for (const auto& element : value) {
    out.push_back(static_cast<int>(require_integer(
        element, key, min_value, std::numeric_limits<int>::max())));
  }
  return out;
}

std::vector<double> require_number_list(const json& value,
                                        const std::string& key) {
  if (!value.is_array() || value.empty()) {
    config_error("key '" + key + "' must be a non-empty array of numbers");
  }
  std::vector<double> out;
  for (const auto& element : value) {
    out.push_back(require_number(element, key));
  }
  return out;
}

const std::set<std::string>& common_keys() {
  static const std::set<std::string> keys = {
      "kind", "trials", "master_seed", "workers", "out", "format",
      "path_gain_convention", "capacity_formula", "streams",
      "tx_subarea_atoms", "rx_subarea_atoms", "rho1_mag", "rho2_mag", "psi1",
      "psi2", "tx_layers", "rx_layers", "tx_layer_atoms", "rx_layer_atoms",
      "wavelength_m", "atom_spacing_m", "layer_spacing_m", "atom_area_m2",
      "distance_m", "gamma", "pt_dbm", "n0_dbm", "max_iterations",
      "objective_decrement_threshold", "attenuation"};
  return keys;
}

std::set<std::string> kind_keys(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::convergence:
    case ExperimentKind::heatmap:
      return {"architecture"};
    case ExperimentKind::sweep_atoms:
      return {"atoms_list"};
    case ExperimentKind::sweep_streams:
      return {"streams_list"};
    case ExperimentKind::sweep_distance:
      return {"distances_m", "transceiver"};
    case ExperimentKind::sweep_attenuation:
      return {"attenuation_list"};
    case ExperimentKind::capacity_compare:
      return {};
    case ExperimentKind::ber_curve:
      return {"snr_db_list", "n_symbols"};
    case ExperimentKind::scaling_bench:
      return {"m_list", "bench_repeats"};
  }
  return {};
}

std::set<std::string> all_kind_keys() {
  std::set<std::string> keys;
  for (const auto& entry : kKindTable) {
    auto specific = kind_keys(entry.kind);
    keys.insert(specific.begin(), specific.end());
  }
  return keys;
}

bool uses_multi_layer(const ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::sweep_attenuation:
    case ExperimentKind::capacity_compare:
    case ExperimentKind::ber_curve:
      return true;
    case ExperimentKind::convergence:
    case ExperimentKind::heatmap:
    case ExperimentKind::sweep_distance:
      return c.architecture == Architecture::multi_layer;
    default:
      return false;
  }
}

bool uses_two_layer(const ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::convergence:
    case ExperimentKind::heatmap:
    case ExperimentKind::sweep_distance:
      return c.architecture == Architecture::two_layer;
    default:
      return true;
  }
}

TwoLayerTopology two_layer_topology(const ExperimentConfig& c, int S, int M,
                                    int N) {
  TwoLayerTopology topo;
  topo.S = S;
  topo.M = M;
  topo.N = N;
  topo.rho1_mag = c.rho1_mag;
  topo.rho2_mag = c.rho2_mag;
  topo.psi1 = c.psi1;
  topo.psi2 = c.psi2;
  return topo;
}

MultiLayerTopology multi_layer_topology(const ExperimentConfig& c, int S,
                                        int W, int U) {
  MultiLayerTopology topo;
  topo.S = S;
  topo.L = c.tx_layers;
  topo.K = c.rx_layers;
  topo.W = W;
  topo.U = U;
  topo.atom_spacing = c.atom_spacing_m;
  topo.layer_spacing = c.layer_spacing_m;
  topo.atom_area = c.atom_area_m2;
  topo.wavelength = c.wavelength_m;
  return topo;
}

LinkBudget make_budget(const ExperimentConfig& c, double distance) {
  return LinkBudget::from_wavelength(c.wavelength_m, distance, c.gamma,
                                     dbm_to_watts(c.pt_dbm),
                                     dbm_to_watts(c.n0_dbm));
}

void validate_config(const ExperimentConfig& c) {
  try {
    make_budget(c, c.distance_m).validate();
    if (uses_two_layer(c)) {
      two_layer_topology(c, c.streams, c.tx_subarea_atoms, c.rx_subarea_atoms)
          .validate();
    }
    if (uses_multi_layer(c)) {
      multi_layer_topology(c, c.streams, c.tx_layer_atoms, c.rx_layer_atoms)
          .validate();
    }
  } catch (const std::invalid_argument& error) {
    config_error(error.what());
  }
  if (!(c.attenuation >= 0.0) || c.attenuation >= 1.0) {
    config_error("key 'attenuation' must lie in [0, 1)");
  }
  if (c.kind == ExperimentKind::sweep_atoms) {
    for (int m : c.atoms_list) {
      if (m < 1) config_error("'atoms_list' entries must be >= 1");
    }
  }
  if (c.kind == ExperimentKind::sweep_streams) {
    for (int s : c.streams_list) {
      if (s < 1) config_error("'streams_list' entries must be >= 1");
    }
  }
  if (c.kind == ExperimentKind::sweep_distance) {
    for (double d : c.distances_m) {
      if (!(d > 0.0)) config_error("'distances_m' entries must be positive");
    }
    if (c.transceiver != "ao" && c.transceiver != "svd_ideal") {
      config_error("key 'transceiver' must be 'ao' or 'svd_ideal'");
    }
  }
  if (c.kind == ExperimentKind::sweep_attenuation) {
    for (double e : c.attenuation_list) {
      if (!(e >= 0.0) || e >= 1.0) {
        config_error("'attenuation_list' entries must lie in [0, 1)");
      }
    }
  }
  if (c.kind == ExperimentKind::scaling_bench) {
    for (int m : c.m_list) {
      if (m < 1) config_error("'m_list' entries must be >= 1");
    }
  }
}

}  // namespace

const char* kind_name(ExperimentKind kind) {
  for (const auto& entry : kKindTable) {
    if (entry.kind == kind) return entry.name;
  }
  return "unknown";
}

ExperimentConfig parse_config(const std::string& json_text) {
  json document;
  try {
    document = json::parse(json_text);
  } catch (const json::parse_error& error) {
    config_error(std::string("not valid JSON: ") + error.what());
  }
  if (!document.is_object()) {
    config_error("top level must be a JSON object");
  }
  if (!document.contains("kind")) {
    config_error("missing required key 'kind'");
  }

  ExperimentConfig c;
  c.kind = kind_from_name(require_string(document["kind"], "kind"));

  const std::set<std::string> allowed_specific = kind_keys(c.kind);
  const std::set<std::string> any_specific = all_kind_keys();
  bool atom_area_given = false;
  bool format_given = false;

  for (const auto& [key, value] : document.items()) {
    if (common_keys().count(key) == 0 && allowed_specific.count(key) == 0) {
      if (any_specific.count(key) != 0 || key == "architecture") {
        config_error("key '" + key + "' is not valid for kind '" +
                     kind_name(c.kind) + "'");
      }
      config_error("unknown config key '" + key + "'");
    }
    if (key == "kind") {
      continue;
    } else if (key == "trials") {
      c.trials = static_cast<int>(require_integer(value, key, 1, 1000000));
    } else if (key == "master_seed") {
      if (!value.is_number_integer() || value.get<long long>() < 0) {
        if (!value.is_number_unsigned()) {
          config_error("key 'master_seed' must be a non-negative integer");
        }
      }
      c.master_seed = value.get<std::uint64_t>();
    } else if (key == "workers") {
      c.workers = static_cast<int>(require_integer(value, key, 1, 4096));
    } else if (key == "out") {
      c.out = require_string(value, key);
    } else if (key == "format") {
      std::string name = require_string(value, key);
      if (name == "csv") {
        c.format = OutputFormat::csv;
      } else if (name == "jsonl") {
        c.format = OutputFormat::json_lines;
      } else {
        config_error("key 'format' must be 'csv' or 'jsonl'");
      }
      format_given = true;
    } else if (key == "path_gain_convention") {
      std::string name = require_string(value, key);
      if (name == "free_space_gain") {
        c.convention = PathGainConvention::free_space_gain;
      } else if (name == "inverse_free_space") {
        c.convention = PathGainConvention::inverse_free_space;
      } else {
        config_error(
            "key 'path_gain_convention' must be 'free_space_gain' or "
            "'inverse_free_space'");
      }
    } else if (key == "capacity_formula") {
      std::string name = require_string(value, key);
      if (name == "power_scaled_interference") {
        c.formula = CapacityFormula::power_scaled_interference;
      } else if (name == "unscaled_interference") {
        c.formula = CapacityFormula::unscaled_interference;
      } else {
        config_error(
            "key 'capacity_formula' must be 'power_scaled_interference' or "
            "'unscaled_interference'");
      }
    } else if (key == "architecture") {
      std::string name = require_string(value, key);
      if (name == "two_layer") {
        c.architecture = Architecture::two_layer;
      } else if (name == "multi_layer") {
        c.architecture = Architecture::multi_layer;
      } else {
        config_error("key 'architecture' must be 'two_layer' or 'multi_layer'");
      }
    } else if (key == "streams") {
      c.streams = static_cast<int>(require_integer(value, key, 1, 1024));
    } else if (key == "tx_subarea_atoms") {
      c.tx_subarea_atoms = static_cast<int>(require_integer(value, key, 1, 100000));
    } else if (key == "rx_subarea_atoms") {
      c.rx_subarea_atoms = static_cast<int>(require_integer(value, key, 1, 100000));
    } else if (key == "rho1_mag") {
      c.rho1_mag = require_positive(value, key);
    } else if (key == "rho2_mag") {
      c.rho2_mag = require_positive(value, key);
    } else if (key == "psi1") {
      c.psi1 = require_number(value, key);
    } else if (key == "psi2") {
      c.psi2 = require_number(value, key);
    } else if (key == "tx_layers") {
      c.tx_layers = static_cast<int>(require_integer(value, key, 1, 64));
    } else if (key == "rx_layers") {
      c.rx_layers = static_cast<int>(require_integer(value, key, 1, 64));
    } else if (key == "tx_layer_atoms") {
      c.tx_layer_atoms = static_cast<int>(require_integer(value, key, 1, 100000));
    } else if (key == "rx_layer_atoms") {
      c.rx_layer_atoms = static_cast<int>(require_integer(value, key, 1, 100000));
    } else if (key == "wavelength_m") {
      c.wavelength_m = require_positive(value, key);
    } else if (key == "atom_spacing_m") {
      c.atom_spacing_m = require_positive(value, key);
    } else if (key == "layer_spacing_m") {
      c.layer_spacing_m = require_positive(value, key);
    } else if (key == "atom_area_m2") {
      c.atom_area_m2 = require_positive(value, key);
      atom_area_given = true;
    } else if (key == "distance_m") {
      c.distance_m = require_positive(value, key);
    } else if (key == "gamma") {
      c.gamma = require_positive(value, key);
    } else if (key == "pt_dbm") {
      c.pt_dbm = require_number(value, key);
    } else if (key == "n0_dbm") {
      c.n0_dbm = require_number(value, key);
    } else if (key == "max_iterations") {
      c.max_iterations = static_cast<int>(require_integer(value, key, 1, 100000));
    } else if (key == "objective_decrement_threshold") {
      double v = require_number(value, key);
      if (!(v >= 0.0)) {
        config_error("key 'objective_decrement_threshold' must be >= 0");
      }
      c.objective_decrement_threshold = v;
    } else if (key == "attenuation") {
      c.attenuation = require_number(value, key);
    } else if (key == "atoms_list") {
      c.atoms_list = require_int_list(value, key, 1);
    } else if (key == "streams_list") {
      c.streams_list = require_int_list(value, key, 1);
    } else if (key == "distances_m") {
      c.distances_m = require_number_list(value, key);
    } else if (key == "attenuation_list") {
      c.attenuation_list = require_number_list(value, key);
    } else if (key == "snr_db_list") {
      c.snr_db_list = require_number_list(value, key);
    } else if (key == "n_symbols") {
      c.n_symbols = require_integer(value, key, 1,
                                    std::numeric_limits<long long>::max());
    } else if (key == "m_list") {
      c.m_list = require_int_list(value, key, 1);
    } else if (key == "bench_repeats") {
      c.bench_repeats = static_cast<int>(require_integer(value, key, 1, 1000));
    } else if (key == "transceiver") {
      c.transceiver = require_string(value, key);
    }
  }

  if (!atom_area_given) {
    c.atom_area_m2 = (c.wavelength_m / 2.0) * (c.wavelength_m / 2.0);
  }
  if (!format_given && c.kind == ExperimentKind::heatmap) {
    c.format = OutputFormat::json_lines;
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream input(path, std::ios::binary);
  if (!input) {
    throw std::invalid_argument("cannot read config file '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << input.rdbuf();
  return parse_config(buffer.str());
}

std::string resolved_params_json(const ExperimentConfig& c) {
  json j;
  j["kind"] = kind_name(c.kind);
  j["trials"] = c.trials;
  j["master_seed"] = c.master_seed;
  j["path_gain_convention"] = convention_name(c.convention);
  j["capacity_formula"] = formula_name(c.formula);
  j["streams"] = c.streams;
  j["tx_subarea_atoms"] = c.tx_subarea_atoms;
  j["rx_subarea_atoms"] = c.rx_subarea_atoms;
  j["rho1_mag"] = c.rho1_mag;
  j["rho2_mag"] = c.rho2_mag;
  j["psi1"] = c.psi1;
  j["psi2"] = c.psi2;
  j["tx_layers"] = c.tx_layers;
  j["rx_layers"] = c.rx_layers;
  j["tx_layer_atoms"] = c.tx_layer_atoms;
  j["rx_layer_atoms"] = c.rx_layer_atoms;
  j["wavelength_m"] = c.wavelength_m;
  j["atom_spacing_m"] = c.atom_spacing_m;
  j["layer_spacing_m"] = c.layer_spacing_m;
  j["atom_area_m2"] = c.atom_area_m2;
  j["distance_m"] = c.distance_m;
  j["gamma"] = c.gamma;
  j["pt_dbm"] = c.pt_dbm;
  j["n0_dbm"] = c.n0_dbm;
  j["max_iterations"] = c.max_iterations;
  j["objective_decrement_threshold"] = c.objective_decrement_threshold;
  j["attenuation"] = c.attenuation;
  switch (c.kind) {
    case ExperimentKind::convergence:
    case ExperimentKind::heatmap:
      j["architecture"] = architecture_name(c.architecture);
      break;
    case ExperimentKind::sweep_atoms:
      j["atoms_list"] = c.atoms_list;
      break;
    case ExperimentKind::sweep_streams:
      j["streams_list"] = c.streams_list;
      break;
    case ExperimentKind::sweep_distance:
      j["distances_m"] = c.distances_m;
      j["transceiver"] = c.transceiver;
      break;
    case ExperimentKind::sweep_attenuation:
      j["attenuation_list"] = c.attenuation_list;
      break;
    case ExperimentKind::capacity_compare:
      break;
    case ExperimentKind::ber_curve:
      j["snr_db_list"] = c.snr_db_list;
      j["n_symbols"] = c.n_symbols;
      break;
    case ExperimentKind::scaling_bench:
      j["m_list"] = c.m_list;
      j["bench_repeats"] = c.bench_repeats;
      break;
  }
  return j.dump();
}

std::string default_output_name(const ExperimentConfig& config) {
  return std::string(kind_name(config.kind)) + "." +
         format_name(config.format);
}

// --- experiment execution ------------------------------------------------

namespace {

struct FittedLink {
  FitResult result;
  ComplexMatrix h;
  double beta = 0.0;
};

SolverConfig solver_from(const ExperimentConfig& c) {
  SolverConfig solver;
  solver.max_iterations = c.max_iterations;
  solver.objective_decrement_threshold = c.objective_decrement_threshold;
  return solver;
}

FittedLink fit_two_layer_link(const ExperimentConfig& c, int S, int M, int N,
                              double distance, double attenuation,
                              std::uint64_t trial_seed) {
  TwoLayerTopology topo = two_layer_topology(c, S, M, N);
  double beta = path_gain(make_budget(c, distance), c.convention);
  ComplexMatrix g = sample_rayleigh_channel(
      N * S, M * S, beta, mix_seed(trial_seed, kSaltTwoLayerChannel));
  auto [w1, w2] = build_tx_fiber_matrices(topo);
  auto [u2, u1] = build_rx_fiber_matrices(topo);
  std::vector<ComplexMatrix> tx;
  tx.push_back(std::move(w1));
  tx.push_back(std::move(w2));
  std::vector<ComplexMatrix> rx;
  rx.push_back(std::move(u2));
  rx.push_back(std::move(u1));
  if (attenuation > 0.0) {
    tx = apply_attenuation(std::move(tx), attenuation);
    rx = apply_attenuation(std::move(rx), attenuation);
  }
  FitProblem problem =
      make_fit_problem(std::move(tx), std::move(g), std::move(rx), S);
  FittedLink link;
  link.result = run_ao(problem, solver_from(c));
  link.h = equivalent_channel(link.result.state, problem);
  link.beta = beta;
  return link;
}

FittedLink fit_multi_layer_link(const ExperimentConfig& c, int S, int W, int U,
                                double distance, double attenuation,
                                std::uint64_t trial_seed) {
  MultiLayerTopology topo = multi_layer_topology(c, S, W, U);
  double beta = path_gain(make_budget(c, distance), c.convention);
  ComplexMatrix g = sample_rayleigh_channel(
      U, W, beta, mix_seed(trial_seed, kSaltMultiLayerChannel));
  std::vector<ComplexMatrix> tx;
  for (int l = 1; l <= topo.L; ++l) {
    tx.push_back(build_diffraction_matrix(topo, Side::tx, l));
  }
  std::vector<ComplexMatrix> rx;
  for (int k = topo.K; k >= 1; --k) {
    rx.push_back(build_diffraction_matrix(topo, Side::rx, k));
  }
  if (attenuation > 0.0) {
    tx = apply_attenuation(std::move(tx), attenuation);
    rx = apply_attenuation(std::move(rx), attenuation);
  }
  FitProblem problem =
      make_fit_problem(std::move(tx), std::move(g), std::move(rx), S);
  FittedLink link;
  link.result = run_ao(problem, solver_from(c));
  link.h = equivalent_channel(link.result.state, problem);
  link.beta = beta;
  return link;
}

FittedLink fit_link(const ExperimentConfig& c, Architecture architecture,
                    double distance, double attenuation,
                    std::uint64_t trial_seed) {
  if (architecture == Architecture::two_layer) {
    return fit_two_layer_link(c, c.streams, c.tx_subarea_atoms,
                              c.rx_subarea_atoms, distance, attenuation,
                              trial_seed);
  }
  return fit_multi_layer_link(c, c.streams, c.tx_layer_atoms,
                              c.rx_layer_atoms, distance, attenuation,
                              trial_seed);
}

double capacity_of(const ExperimentConfig& c, const ComplexMatrix& h,
                   double alpha) {
  CapacityInputs inputs;
  inputs.H = h;
  inputs.alpha = alpha;
  inputs.pt = dbm_to_watts(c.pt_dbm);
  inputs.n0 = dbm_to_watts(c.n0_dbm);
  return capacity_exact(inputs, c.formula);
}

ResultRecord make_record(const ExperimentConfig& c, int trial,
                         std::uint64_t trial_seed, std::string metric,
                         int iteration, double value,
                         const std::string& params) {
  ResultRecord record;
  record.experiment = kind_name(c.kind);
  record.trial = trial;
  record.trial_seed = trial_seed;
  record.metric = std::move(metric);
  record.iteration = iteration;
  record.value = value;
  record.params = params;
  return record;
}

// Runs fn(trial, derived_seed) across the configured worker count and
// returns each trial's records in trial order regardless of scheduling.
template <typename TrialFn>
std::vector<std::vector<ResultRecord>> for_each_trial(
    const ExperimentConfig& c, TrialFn fn) {
  std::vector<std::vector<ResultRecord>> slots(
      static_cast<std::size_t>(c.trials));
  const int workers = std::max(1, std::min(c.workers, c.trials));
  if (workers == 1) {
    for (int trial = 0; trial < c.trials; ++trial) {
      slots[static_cast<std::size_t>(trial)] =
          fn(trial, mix_seed(c.master_seed, static_cast<std::uint64_t>(trial)));
    }
    return slots;
  }
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        int trial = next.fetch_add(1);
        if (trial >= c.trials) break;
        try {
          slots[static_cast<std::size_t>(trial)] = fn(
              trial, mix_seed(c.master_seed, static_cast<std::uint64_t>(trial)));
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          break;
        }
      }
    });
  }
  for (auto& thread : pool) thread.join();
  if (first_error) std::rethrow_exception(first_error);
  return slots;
}

// Canonical in-group order: trials ascending, aggregates (trial = -1) last,
// then metric name, then iteration.
void canonical_sort(std::vector<ResultRecord>& rows) {
  std::sort(rows.begin(), rows.end(),
            [](const ResultRecord& a, const ResultRecord& b) {
              int ta = a.trial < 0 ? std::numeric_limits<int>::max() : a.trial;
              int tb = b.trial < 0 ? std::numeric_limits<int>::max() : b.trial;
              if (ta != tb) return ta < tb;
              if (a.metric != b.metric) return a.metric < b.metric;
              return a.iteration < b.iteration;
            });
}

// Mean and sample standard deviation of one per-trial metric, appended as
// "<name>_mean" / "<name>_std" aggregate rows.
void append_aggregates(std::vector<ResultRecord>& rows,
                       const ExperimentConfig& c, const std::string& metric,
                       int iteration, const std::string& params) {
  std::vector<double> values;
  for (const auto& row : rows) {
    if (row.trial >= 0 && row.metric == metric && row.iteration == iteration) {
      values.push_back(row.value);
    }
  }
  if (values.empty()) return;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double variance = 0.0;
  for (double v : values) variance += (v - mean) * (v - mean);
  variance = values.size() > 1
                 ? variance / static_cast<double>(values.size() - 1)
                 : 0.0;
  rows.push_back(make_record(c, -1, 0, metric + "_mean", iteration, mean,
                             params));
  rows.push_back(make_record(c, -1, 0, metric + "_std", iteration,
                             std::sqrt(variance), params));
}

std::vector<ResultRecord> flatten(
    std::vector<std::vector<ResultRecord>> slots) {
  std::vector<ResultRecord> rows;
  for (auto& slot : slots) {
    rows.insert(rows.end(), std::make_move_iterator(slot.begin()),
                std::make_move_iterator(slot.end()));
  }
  return rows;
}

std::vector<ResultRecord> run_convergence(const ExperimentConfig& c) {
  const std::string params = resolved_params_json(c);
  auto slots = for_each_trial(c, [&](int trial, std::uint64_t seed) {
    FittedLink link =
        fit_link(c, c.architecture, c.distance_m, c.attenuation, seed);
    std::vector<ResultRecord> rows;
    const auto& objective_trace = link.result.objective_trace;
    const auto& nmse_trace = link.result.nmse_trace;
    for (std::size_t i = 0; i < objective_trace.size(); ++i) {
      rows.push_back(make_record(c, trial, seed, "objective",
                                 static_cast<int>(i), objective_trace[i],
                                 params));
      rows.push_back(make_record(c, trial, seed, "nmse", static_cast<int>(i),
                                 nmse_trace[i], params));
    }
    rows.push_back(make_record(c, trial, seed, "alpha", -1,
                               link.result.state.alpha, params));
    rows.push_back(make_record(c, trial, seed, "nmse_final", -1,
                               nmse_trace.back(), params));
    rows.push_back(make_record(c, trial, seed, "objective_final", -1,
                               objective_trace.back(), params));
    rows.push_back(make_record(c, trial, seed, "iterations", -1,
                               static_cast<double>(link.result.iterations_used),
                               params));
    return rows;
  });
  auto rows = flatten(std::move(slots));
  append_aggregates(rows, c, "nmse_final", -1, params);
  append_aggregates(rows, c, "objective_final", -1, params);
  canonical_sort(rows);
  return rows;
}

std::vector<ResultRecord> run_heatmap(const ExperimentConfig& c) {
  const std::string params = resolved_params_json(c);
  auto slots = for_each_trial(c, [&](int trial, std::uint64_t seed) {
    FittedLink link =
        fit_link(c, c.architecture, c.distance_m, c.attenuation, seed);
    std::vector<ResultRecord> rows;
    double diag_energy = 0.0;
    double off_energy = 0.0;
    for (Eigen::Index i = 0; i < link.h.rows(); ++i) {
      for (Eigen::Index j = 0; j < link.h.cols(); ++j) {
        char name[32];
        std::snprintf(name, sizeof(name), "abs_h[%02d][%02d]",
                      static_cast<int>(i), static_cast<int>(j));
        double magnitude = std::abs(link.h(i, j));
        rows.push_back(make_record(c, trial, seed, name, -1, magnitude,
                                   params));
        if (i == j) {
          diag_energy += magnitude * magnitude;
        } else {
          off_energy += magnitude * magnitude;
        }
      }
    }
    rows.push_back(make_record(c, trial, seed, "off_diag_ratio", -1,
                               off_energy / diag_energy, params));
    rows.push_back(make_record(c, trial, seed, "nmse_final", -1,
                               link.result.nmse_trace.back(), params));
    rows.push_back(make_record(c, trial, seed, "alpha", -1,
                               link.result.state.alpha, params));
    return rows;
  });
  auto rows = flatten(std::move(slots));
  append_aggregates(rows, c, "off_diag_ratio", -1, params);
  append_aggregates(rows, c, "nmse_final", -1, params);
  canonical_sort(rows);
  return rows;
}

void append_fit_metrics(std::vector<ResultRecord>& rows,
                        const ExperimentConfig& c, int trial,
                        std::uint64_t seed, const FittedLink& link,
                        const std::string& suffix, const std::string& params) {
  double alpha = link.result.state.alpha;
  rows.push_back(make_record(c, trial, seed, "capacity" + suffix, -1,
                             capacity_of(c, link.h, alpha), params));
  rows.push_back(make_record(c, trial, seed, "capacity_bound" + suffix, -1,
                             capacity_upper_bound(alpha, dbm_to_watts(c.pt_dbm),
                                                  dbm_to_watts(c.n0_dbm),
                                                  c.streams),
                             params));
  rows.push_back(make_record(c, trial, seed, "nmse" + suffix, -1,
                             link.result.nmse_trace.back(), params));
  rows.push_back(
      make_record(c, trial, seed, "alpha" + suffix, -1, alpha, params));
}

std::vector<ResultRecord> run_point_sweep(
    const std::vector<ExperimentConfig>& points) {
  std::vector<ResultRecord> all_rows;
  for (const auto& point : points) {
    const std::string params = resolved_params_json(point);
    auto slots = for_each_trial(point, [&](int trial, std::uint64_t seed) {
      std::vector<ResultRecord> rows;
      if (point.kind == ExperimentKind::sweep_distance &&
          point.transceiver == "svd_ideal") {
        double beta =
            path_gain(make_budget(point, point.distance_m), point.convention);
        int rows_g = point.architecture == Architecture::two_layer
                         ? point.rx_subarea_atoms * point.streams
                         : point.rx_layer_atoms;
        int cols_g = point.architecture == Architecture::two_layer
                         ? point.tx_subarea_atoms * point.streams
                         : point.tx_layer_atoms;
        ComplexMatrix g = sample_rayleigh_channel(
            rows_g, cols_g, beta,
            mix_seed(seed, point.architecture == Architecture::two_layer
                               ? kSaltTwoLayerChannel
                               : kSaltMultiLayerChannel));
        auto [precoder, combiner] = svd_ideal_transceivers(g, point.streams);
        ComplexMatrix h = combiner * g * precoder;
        rows.push_back(make_record(point, trial, seed, "capacity", -1,
                                   capacity_of(point, h, 1.0), params));
        rows.push_back(make_record(
            point, trial, seed, "capacity_bound", -1,
            capacity_upper_bound(1.0, dbm_to_watts(point.pt_dbm),
                                 dbm_to_watts(point.n0_dbm), point.streams),
            params));
        ComplexMatrix residual = h;
        residual.diagonal().array() -= 1.0;
        rows.push_back(make_record(point, trial, seed, "diag_error", -1,
                                   std::sqrt(residual.squaredNorm()), params));
        return rows;
      }
      FittedLink link = fit_link(point, point.architecture, point.distance_m,
                                 point.attenuation, seed);
      append_fit_metrics(rows, point, trial, seed, link, "", params);
      return rows;
    });
    auto rows = flatten(std::move(slots));
    append_aggregates(rows, point, "capacity", -1, params);
    append_aggregates(rows, point, "nmse", -1, params);
    canonical_sort(rows);
    all_rows.insert(all_rows.end(), std::make_move_iterator(rows.begin()),
                    std::make_move_iterator(rows.end()));
  }
  return all_rows;
}

std::vector<ResultRecord> run_sweep_attenuation(const ExperimentConfig& c) {
  std::vector<ResultRecord> all_rows;
  for (double epsilon : c.attenuation_list) {
    ExperimentConfig point = c;
    point.attenuation = epsilon;
    const std::string params = resolved_params_json(point);
    auto slots = for_each_trial(point, [&](int trial, std::uint64_t seed) {
      std::vector<ResultRecord> rows;
      FittedLink two = fit_link(point, Architecture::two_layer,
                                point.distance_m, epsilon, seed);
      FittedLink multi = fit_link(point, Architecture::multi_layer,
                                  point.distance_m, epsilon, seed);
      append_fit_metrics(rows, point, trial, seed, two, "_two_layer", params);
      append_fit_metrics(rows, point, trial, seed, multi, "_multi_layer",
                         params);
      return rows;
    });
    auto rows = flatten(std::move(slots));
    append_aggregates(rows, point, "capacity_two_layer", -1, params);
    append_aggregates(rows, point, "capacity_multi_layer", -1, params);
    canonical_sort(rows);
    all_rows.insert(all_rows.end(), std::make_move_iterator(rows.begin()),
                    std::make_move_iterator(rows.end()));
  }
  return all_rows;
}

std::vector<ResultRecord> run_capacity_compare(const ExperimentConfig& c) {
  const std::string params = resolved_params_json(c);
  auto slots = for_each_trial(c, [&](int trial, std::uint64_t seed) {
    std::vector<ResultRecord> rows;
    FittedLink two = fit_link(c, Architecture::two_layer, c.distance_m,
                              c.attenuation, seed);
    FittedLink multi = fit_link(c, Architecture::multi_layer, c.distance_m,
                                c.attenuation, seed);
    append_fit_metrics(rows, c, trial, seed, two, "_two_layer", params);
    append_fit_metrics(rows, c, trial, seed, multi, "_multi_layer", params);

    // Conventional S x S MIMO with zero-forcing precoding at the same path
    // gain; the effective channel is gain * I with the total transmit power
    // normalized to S * pt (one power budget per stream, as elsewhere).
    double beta = path_gain(make_budget(c, c.distance_m), c.convention);
    double pt_total = dbm_to_watts(c.pt_dbm) * c.streams;
    double n0 = dbm_to_watts(c.n0_dbm);
    ComplexMatrix g_zf = sample_rayleigh_channel(
        c.streams, c.streams, beta, mix_seed(seed, kSaltZfChannel));
    ComplexMatrix precoder = zf_precoder(g_zf, pt_total);
    double gain = ((g_zf * precoder).trace() /
                   static_cast<double>(c.streams)).real();
    rows.push_back(make_record(c, trial, seed, "zf_gain", -1, gain, params));
    rows.push_back(make_record(
        c, trial, seed, "capacity_zf", -1,
        c.streams * std::log2(1.0 + gain * gain / n0), params));
    return rows;
  });
  auto rows = flatten(std::move(slots));
  append_aggregates(rows, c, "capacity_two_layer", -1, params);
  append_aggregates(rows, c, "capacity_multi_layer", -1, params);
  append_aggregates(rows, c, "capacity_zf", -1, params);
  canonical_sort(rows);
  return rows;
}

std::vector<ResultRecord> run_ber_curve(const ExperimentConfig& c) {
  // One fit per trial per architecture (the fit does not depend on the
  // transmit power), then a BER evaluation per SNR grid point.
  std::vector<ExperimentConfig> points;
  std::vector<std::string> point_params;
  for (std::size_t i = 0; i < c.snr_db_list.size(); ++i) {
    ExperimentConfig point = c;
    point.pt_dbm = c.n0_dbm + c.snr_db_list[i];
    points.push_back(point);
    point_params.push_back(resolved_params_json(point));
  }
  auto slots = for_each_trial(c, [&](int trial, std::uint64_t seed) {
    std::vector<ResultRecord> rows;
    FittedLink two = fit_link(c, Architecture::two_layer, c.distance_m,
                              c.attenuation, seed);
    FittedLink multi = fit_link(c, Architecture::multi_layer, c.distance_m,
                                c.attenuation, seed);
    const double n0 = dbm_to_watts(c.n0_dbm);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& point = points[i];
      const double pt = dbm_to_watts(point.pt_dbm);
      CapacityInputs link_inputs;
      link_inputs.pt = pt;
      link_inputs.n0 = n0;
      BerConfig ber_config;
      ber_config.n_symbols = c.n_symbols;

      link_inputs.H = two.h;
      link_inputs.alpha = two.result.state.alpha;
      ber_config.seed = mix_seed(mix_seed(seed, kSaltBerTwoLayer),
                                 static_cast<std::uint64_t>(i));
      rows.push_back(make_record(point, trial, seed, "ber_two_layer",
                                 static_cast<int>(i),
                                 ber_qpsk(two.h, link_inputs, ber_config),
                                 point_params[i]));

      link_inputs.H = multi.h;
      link_inputs.alpha = multi.result.state.alpha;
      ber_config.seed = mix_seed(mix_seed(seed, kSaltBerMultiLayer),
                                 static_cast<std::uint64_t>(i));
      rows.push_back(make_record(point, trial, seed, "ber_multi_layer",
                                 static_cast<int>(i),
                                 ber_qpsk(multi.h, link_inputs, ber_config),
                                 point_params[i]));
    }
    return rows;
  });
  auto pooled = flatten(std::move(slots));
  std::vector<ResultRecord> all_rows;
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::vector<ResultRecord> rows;
    for (const auto& row : pooled) {
      if (row.iteration == static_cast<int>(i)) rows.push_back(row);
    }
    // Equal symbol counts per trial, so the mean over trials equals the
    // bit-pooled rate.
    append_aggregates(rows, points[i], "ber_two_layer", static_cast<int>(i),
                      point_params[i]);
    append_aggregates(rows, points[i], "ber_multi_layer", static_cast<int>(i),
                      point_params[i]);
    canonical_sort(rows);
    all_rows.insert(all_rows.end(), std::make_move_iterator(rows.begin()),
                    std::make_move_iterator(rows.end()));
  }
  return all_rows;
}

std::vector<ResultRecord> run_scaling_bench(const ExperimentConfig& c) {
  using clock = std::chrono::steady_clock;
  std::vector<ResultRecord> all_rows;
  std::vector<double> sizes;
  std::vector<double> best_times;
  for (std::size_t mi = 0; mi < c.m_list.size(); ++mi) {
    const int m = c.m_list[mi];
    ExperimentConfig point = c;
    point.tx_subarea_atoms = m;
    point.rx_subarea_atoms = m;
    const std::string params = resolved_params_json(point);
    const std::uint64_t seed =
        mix_seed(c.master_seed, 0x5ca1e000ULL + static_cast<std::uint64_t>(mi));

    TwoLayerTopology topo = two_layer_topology(point, point.streams, m, m);
    double beta = path_gain(make_budget(point, point.distance_m),
                            point.convention);
    ComplexMatrix g =
        sample_rayleigh_channel(topo.rx_input_atoms(), topo.tx_output_atoms(),
                                beta, mix_seed(seed, kSaltTwoLayerChannel));
    FitProblem problem = make_two_layer_problem(topo, g);

    SolverConfig timed;
    timed.max_iterations = 10000;
    timed.objective_decrement_threshold = 0.0;
    run_ao(problem, timed);  // warmup

    // Each sample pools whole solver runs until the timed window is long
    // enough that clock noise is negligible, then normalizes per sweep.
    constexpr double kMinWindowSeconds = 0.05;
    double best = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < c.bench_repeats; ++rep) {
      double elapsed_total = 0.0;
      long iterations_total = 0;
      while (elapsed_total < kMinWindowSeconds) {
        auto begin = clock::now();
        FitResult result = run_ao(problem, timed);
        elapsed_total +=
            std::chrono::duration<double>(clock::now() - begin).count();
        iterations_total += std::max(1, result.iterations_used);
      }
      double seconds = elapsed_total / static_cast<double>(iterations_total);
      best = std::min(best, seconds);
      all_rows.push_back(make_record(point, rep, seed, "sweep_seconds", -1,
                                     seconds, params));
    }
    all_rows.push_back(make_record(point, -1, 0, "sweep_seconds_min", -1,
                                   best, params));
    sizes.push_back(static_cast<double>(m));
    best_times.push_back(best);
  }
  if (sizes.size() >= 2) {
    PowerLawFit fit = fit_power_law(sizes, best_times);
    const std::string params = resolved_params_json(c);
    all_rows.push_back(
        make_record(c, -1, 0, "scaling_slope", -1, fit.slope, params));
    all_rows.push_back(make_record(c, -1, 0, "scaling_r_squared", -1,
                                   fit.r_squared, params));
  }
  return all_rows;
}

}  // namespace

PowerLawFit fit_power_law(const std::vector<double>& sizes,
                          const std::vector<double>& times) {
  if (sizes.size() != times.size() || sizes.size() < 2) {
    throw std::invalid_argument(
        "power-law fit needs matching lists with at least two points");
  }
  const std::size_t n = sizes.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(sizes[i] > 0.0) || !(times[i] > 0.0)) {
      throw std::invalid_argument("power-law fit needs positive data");
    }
    lx[i] = std::log(sizes[i]);
    ly[i] = std::log(times[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  PowerLawFit fit;
  fit.slope = sxy / sxx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 0.0;
  return fit;
}

std::vector<ResultRecord> run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  switch (config.kind) {
    case ExperimentKind::convergence:
      return run_convergence(config);
    case ExperimentKind::heatmap:
      return run_heatmap(config);
    case ExperimentKind::sweep_atoms: {
      std::vector<ExperimentConfig> points;
      for (int m : config.atoms_list) {
        ExperimentConfig point = config;
        point.tx_subarea_atoms = m;
        point.rx_subarea_atoms = m;
        points.push_back(point);
      }
      return run_point_sweep(points);
    }
    case ExperimentKind::sweep_streams: {
      std::vector<ExperimentConfig> points;
      for (int s : config.streams_list) {
        ExperimentConfig point = config;
        point.streams = s;
        points.push_back(point);
      }
      return run_point_sweep(points);
    }
    case ExperimentKind::sweep_distance: {
      std::vector<ExperimentConfig> points;
      for (double d : config.distances_m) {
        ExperimentConfig point = config;
        point.distance_m = d;
        points.push_back(point);
      }
      return run_point_sweep(points);
    }
    case ExperimentKind::sweep_attenuation:
      return run_sweep_attenuation(config);
    case ExperimentKind::capacity_compare:
      return run_capacity_compare(config);
    case ExperimentKind::ber_curve:
      return run_ber_curve(config);
    case ExperimentKind::scaling_bench:
      return run_scaling_bench(config);
  }
  throw std::invalid_argument("unhandled experiment kind");
}

// --- serialization -------------------------------------------------------

namespace {

constexpr const char* kCsvHeader =
    "experiment,trial,trial_seed,metric,iteration,value,params";

std::string csv_quote(const std::string& text) {
  std::string quoted = "\"";
  for (char ch : text) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  quoted += '"';
  return quoted;
}

}  // namespace

std::string render_results(const std::vector<ResultRecord>& records,
                           OutputFormat format) {
  std::string out;
  if (format == OutputFormat::csv) {
    out += kCsvHeader;
    out += '\n';
    for (const auto& record : records) {
      out += record.experiment;
      out += ',';
      out += std::to_string(record.trial);
      out += ',';
      out += std::to_string(record.trial_seed);
      out += ',';
      out += record.metric;
      out += ',';
      if (record.iteration >= 0) out += std::to_string(record.iteration);
      out += ',';
      out += shortest_double(record.value);
      out += ',';
      out += csv_quote(record.params);
      out += '\n';
    }
    return out;
  }
  for (const auto& record : records) {
    json j;
    j["experiment"] = record.experiment;
    j["trial"] = record.trial;
    j["trial_seed"] = record.trial_seed;
    j["metric"] = record.metric;
    if (record.iteration >= 0) j["iteration"] = record.iteration;
    j["value"] = record.value;
    j["params"] = json::parse(record.params);
    out += j.dump();
    out += '\n';
  }
  return out;
}

void emit_results(const std::vector<ResultRecord>& records,
                  const std::string& path, OutputFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << render_results(records, format);
  out.flush();
  if (!out) {
    throw std::runtime_error("failed while writing results to '" + path + "'");
  }
}

std::vector<ResultRecord> parse_results(const std::string& content,
                                        OutputFormat format) {
  std::vector<ResultRecord> records;
  std::istringstream stream(content);
  std::string line;
  if (format == OutputFormat::csv) {
    if (!std::getline(stream, line) || line != kCsvHeader) {
      throw std::invalid_argument("missing or unexpected CSV header");
    }
    while (std::getline(stream, line)) {
      if (line.empty()) continue;
      ResultRecord record;
      std::size_t pos = 0;
      auto next_field = [&](const char* field) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) {
          throw std::invalid_argument(std::string("truncated CSV row at ") +
                                      field);
        }
        std::string value = line.substr(pos, comma - pos);
        pos = comma + 1;
        return value;
      };
      record.experiment = next_field("experiment");
      record.trial = std::stoi(next_field("trial"));
      record.trial_seed = std::stoull(next_field("trial_seed"));
      record.metric = next_field("metric");
      std::string iteration = next_field("iteration");
      record.iteration = iteration.empty() ? -1 : std::stoi(iteration);
      record.value = std::stod(next_field("value"));
      std::string params = line.substr(pos);
      if (params.size() < 2 || params.front() != '"' || params.back() != '"') {
        throw std::invalid_argument("params cell must be quoted");
      }
      params = params.substr(1, params.size() - 2);
      std::string unescaped;
      for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i] == '"' && i + 1 < params.size() && params[i + 1] == '"') {
          ++i;
        }
        unescaped += params[i];
      }
      record.params = unescaped;
      records.push_back(std::move(record));
    }
    return records;
  }
  while (std::getline(stream, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    ResultRecord record;
    record.experiment = j.at("experiment").get<std::string>();
    record.trial = j.at("trial").get<int>();
    record.trial_seed = j.at("trial_seed").get<std::uint64_t>();
    record.metric = j.at("metric").get<std::string>();
    record.iteration = j.contains("iteration") ? j.at("iteration").get<int>() : -1;
    record.value = j.at("value").get<double>();
    record.params = j.at("params").dump();
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace simfiber
