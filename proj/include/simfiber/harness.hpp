#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "simfiber/channel.hpp"
#include "simfiber/metrics.hpp"
#include "simfiber/types.hpp"

namespace simfiber {

enum class ExperimentKind {
  convergence,
  heatmap,
  sweep_atoms,
  sweep_streams,
  sweep_distance,
  sweep_attenuation,
  capacity_compare,
  ber_curve,
  scaling_bench,
};

enum class OutputFormat { csv, json_lines };

enum class Architecture { two_layer, multi_layer };

const char* kind_name(ExperimentKind kind);

// Declarative experiment description. Field defaults are the reference
// simulation setup (28 GHz carrier, half-wavelength spacing, 150 m link);
// a config file overrides them per experiment.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::convergence;
  int trials = 10;
  std::uint64_t master_seed = 1;
  int workers = 1;
  std::string out;  // output path; empty means "<kind>.<ext>"
  OutputFormat format = OutputFormat::csv;
  PathGainConvention convention = PathGainConvention::free_space_gain;
  CapacityFormula formula = CapacityFormula::power_scaled_interference;
  Architecture architecture = Architecture::two_layer;

  // Meta-fiber (two-layer) SIM.
  int streams = 4;           // S
  int tx_subarea_atoms = 25; // M
  int rx_subarea_atoms = 25; // N
  double rho1_mag = 1.0;
  double rho2_mag = 1.0;
  double psi1 = 0.0;
  double psi2 = 0.0;

  // Conventional multi-layer SIM.
  int tx_layers = 7;         // L
  int rx_layers = 7;         // K
  int tx_layer_atoms = 100;  // W
  int rx_layer_atoms = 100;  // U
  double wavelength_m = 0.0107;
  double atom_spacing_m = 0.00535;
  double layer_spacing_m = 0.00535;
  double atom_area_m2 = 0.00535 * 0.00535;  // (wavelength / 2)^2

  // Link budget.
  double distance_m = 150.0;
  double gamma = 3.5;
  double pt_dbm = 20.0;
  double n0_dbm = -110.0;

  // Solver.
  int max_iterations = 20;
  double objective_decrement_threshold = 1e-14;

  // Per-layer energy attenuation ratio applied to both SIM stacks.
  double attenuation = 0.0;

  // Kind-specific controls.
  std::vector<int> atoms_list = {5, 10, 15, 20, 25};      // sweep_atoms
  std::vector<int> streams_list = {1, 2, 3, 4, 5, 6};     // sweep_streams
  std::vector<double> distances_m = {50, 100, 150, 200, 250};
  std::vector<double> attenuation_list = {0.0, 0.05, 0.1, 0.15, 0.2};
  // ber_curve transmit-SNR grid (pt/n0 in dB); the default spans the
  // detection waterfall of the default link geometry.
  std::vector<double> snr_db_list = {78, 82, 86, 90, 94, 98};
  std::int64_t n_symbols = 100000;                        // ber_curve
  std::vector<int> m_list = {8, 16, 32, 64};              // scaling_bench
  int bench_repeats = 3;                                  // scaling_bench
  std::string transceiver = "ao";  // sweep_distance: "ao" | "svd_ideal"
};

// Parses and validates a JSON config document. Unknown keys, keys that do
// not apply to the requested kind, type mismatches and out-of-range values
// are all rejected with field-level messages (std::invalid_argument).
ExperimentConfig parse_config(const std::string& json_text);

// Reads the file at path and parses it; file errors carry the path.
ExperimentConfig load_config(const std::string& path);

// Canonical JSON serialization of the fully resolved parameter set (sorted
// keys, defaults materialized). Execution details that cannot change any
// computed value (output path, format, worker count) are excluded.
std::string resolved_params_json(const ExperimentConfig& config);

// One metric observation. Aggregate rows (means and standard deviations
// across trials) use trial = -1 and trial_seed = 0. Records are replayable
// from their fields alone: params holds the full resolved parameter set in
// effect for this observation, including the path-gain convention and the
// capacity formula.
struct ResultRecord {
  std::string experiment;
  int trial = 0;
  std::uint64_t trial_seed = 0;
  std::string metric;
  int iteration = -1;  // -1 when not applicable; grid index for curve kinds
  double value = 0.0;
  std::string params;
};

// Runs the experiment described by config. Deterministic for a fixed master
// seed: trials draw from derived per-trial seeds, and record order is
// canonical (per parameter group: trials ascending, then metric name, then
// iteration; aggregates last), so the worker count never changes the output.
std::vector<ResultRecord> run_experiment(const ExperimentConfig& config);

// Serializes records; CSV keeps one fixed documented header, JSON-lines
// holds one record object per line. Byte-stable for identical inputs.
std::string render_results(const std::vector<ResultRecord>& records,
                           OutputFormat format);

// Renders to path; I/O failures raise std::runtime_error naming the path.
void emit_results(const std::vector<ResultRecord>& records,
                  const std::string& path, OutputFormat format);

// Inverse of render_results, used for round-trip checks and tooling.
std::vector<ResultRecord> parse_results(const std::string& content,
                                        OutputFormat format);

std::string default_output_name(const ExperimentConfig& config);

// Least-squares fit of log(times) against log(sizes): times ~ a * sizes^slope.
struct PowerLawFit {
  double slope = 0.0;
  double r_squared = 0.0;
};
PowerLawFit fit_power_law(const std::vector<double>& sizes,
                          const std::vector<double>& times);

}  // namespace simfiber
