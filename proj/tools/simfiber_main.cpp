#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "simfiber/harness.hpp"

namespace {

using simfiber::ExperimentConfig;
using simfiber::OutputFormat;

OutputFormat format_from_name(const std::string& name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "jsonl") return OutputFormat::json_lines;
  throw std::invalid_argument("format must be 'csv' or 'jsonl'");
}

void run_command(const std::string& config_path, const std::string& out,
                 const std::string& format, int workers, std::int64_t seed,
                 bool seed_given) {
  ExperimentConfig config = simfiber::load_config(config_path);
  if (!out.empty()) config.out = out;
  if (!format.empty()) config.format = format_from_name(format);
  if (workers > 0) config.workers = workers;
  if (seed_given) {
    if (seed < 0) throw std::invalid_argument("seed must be non-negative");
    config.master_seed = static_cast<std::uint64_t>(seed);
  }
  auto records = simfiber::run_experiment(config);
  std::string path =
      config.out.empty() ? simfiber::default_output_name(config) : config.out;
  simfiber::emit_results(records, path, config.format);
  std::cout << "wrote " << records.size() << " records to " << path << "\n";
}

void validate_command(const std::string& config_path) {
  ExperimentConfig config = simfiber::load_config(config_path);
  std::cout << "config is valid\n";
  std::cout << "kind: " << simfiber::kind_name(config.kind) << "\n";
  std::cout << "trials: " << config.trials << "\n";
  std::cout << "workers: " << config.workers << "\n";
  std::cout << "resolved: " << simfiber::resolved_params_json(config) << "\n";
}

void bench_command(const std::string& kind, const std::string& out) {
  if (kind != "scaling_bench") {
    throw std::invalid_argument("bench supports only --kind scaling_bench");
  }
  ExperimentConfig config;
  config.kind = simfiber::ExperimentKind::scaling_bench;
  config.streams = 2;
  auto records = simfiber::run_experiment(config);

  std::cout << "atoms_per_subarea  seconds_per_sweep\n";
  double slope = 0.0;
  double r_squared = 0.0;
  for (const auto& record : records) {
    if (record.metric == "sweep_seconds_min") {
      auto params = nlohmann::json::parse(record.params);
      std::cout << "  " << params.at("tx_subarea_atoms").get<int>() << "\t\t   "
                << record.value << "\n";
    } else if (record.metric == "scaling_slope") {
      slope = record.value;
    } else if (record.metric == "scaling_r_squared") {
      r_squared = record.value;
    }
  }
  std::cout << "log-log slope: " << slope << " (r^2 = " << r_squared << ")\n";
  if (!out.empty()) {
    simfiber::emit_results(records, out, config.format);
    std::cout << "wrote " << records.size() << " records to " << out << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stacked-metasurface channel diagonalization simulator"};
  app.require_subcommand(1);

  std::string run_config;
  std::string run_out;
  std::string run_format;
  int run_workers = 0;
  std::int64_t run_seed = 0;
  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("--config", run_config, "experiment config (JSON)")
      ->required();
  run->add_option("--out", run_out, "output path");
  run->add_option("--format", run_format, "output format")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  run->add_option("--workers", run_workers, "worker threads")
      ->check(CLI::PositiveNumber);
  auto* seed_option =
      run->add_option("--seed", run_seed, "master seed override");

  std::string validate_config_path;
  auto* validate =
      app.add_subcommand("validate", "check a config file without running");
  validate->add_option("--config", validate_config_path, "experiment config (JSON)")
      ->required();

  std::string bench_kind;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "run a built-in benchmark");
  bench->add_option("--kind", bench_kind, "benchmark kind")->required();
  bench->add_option("--out", bench_out, "optional output path for records");

  run->callback([&]() {
    run_command(run_config, run_out, run_format, run_workers, run_seed,
                seed_option->count() > 0);
  });
  validate->callback([&]() { validate_command(validate_config_path); });
  bench->callback([&]() { bench_command(bench_kind, bench_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    int code = app.exit(error);
    return code == 0 ? 0 : 1;
  } catch (const std::invalid_argument& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 2;
  }
  return 0;
}
