#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "simfiber/harness.hpp"
#include "simfiber/rng.hpp"

using namespace simfiber;

namespace {

std::vector<ResultRecord> run_json(const std::string& text) {
  return run_experiment(parse_config(text));
}

std::vector<double> aggregate_values(const std::vector<ResultRecord>& records,
                                     const std::string& metric) {
  std::vector<double> values;
  for (const auto& r : records) {
    if (r.trial == -1 && r.metric == metric) values.push_back(r.value);
  }
  return values;
}

const ResultRecord* find_record(const std::vector<ResultRecord>& records,
                                int trial, const std::string& metric,
                                int iteration = -1) {
  for (const auto& r : records) {
    if (r.trial == trial && r.metric == metric && r.iteration == iteration) {
      return &r;
    }
  }
  return nullptr;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return v.size() > 1;
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) return false;
  }
  return v.size() > 1;
}

}  // namespace

TEST_CASE("config parsing applies defaults") {
  ExperimentConfig c = parse_config(R"({"kind": "convergence"})");
  CHECK(c.kind == ExperimentKind::convergence);
  CHECK(c.trials == 10);
  CHECK(c.master_seed == 1);
  CHECK(c.workers == 1);
  CHECK(c.format == OutputFormat::csv);
  CHECK(c.architecture == Architecture::two_layer);
  CHECK(c.streams == 4);
  CHECK(c.tx_subarea_atoms == 25);
  CHECK(c.tx_layers == 7);
  CHECK(c.tx_layer_atoms == 100);
  CHECK(c.wavelength_m == doctest::Approx(0.0107));
  CHECK(c.atom_area_m2 == doctest::Approx(0.00535 * 0.00535));
  CHECK(c.distance_m == 150.0);
  CHECK(c.max_iterations == 20);
  CHECK(c.transceiver == "ao");
}

TEST_CASE("config parsing rejects malformed input") {
  SUBCASE("missing kind") {
    CHECK_THROWS_AS(parse_config(R"({"trials": 3})"), std::invalid_argument);
  }
  SUBCASE("unknown kind") {
    CHECK_THROWS_AS(parse_config(R"({"kind": "guesswork"})"),
                    std::invalid_argument);
  }
  SUBCASE("unknown key") {
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"kind": "convergence", "bogus": 1})"),
        "config error: unknown config key 'bogus'", std::invalid_argument);
  }
  SUBCASE("key from another kind") {
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"kind": "convergence", "atoms_list": [2, 3]})"),
        "config error: key 'atoms_list' is not valid for kind 'convergence'",
        std::invalid_argument);
  }
  SUBCASE("type mismatches") {
    CHECK_THROWS_AS(parse_config(R"({"kind": "convergence", "trials": "x"})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        parse_config(R"({"kind": "convergence", "trials": 2.5})"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        parse_config(R"({"kind": "convergence", "streams": true})"),
        std::invalid_argument);
  }
  SUBCASE("out-of-range values") {
    CHECK_THROWS_AS(parse_config(R"({"kind": "convergence", "trials": 0})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"kind": "convergence", "workers": 0})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        parse_config(R"({"kind": "convergence", "master_seed": -1})"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        parse_config(R"({"kind": "convergence", "attenuation": 1.0})"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        parse_config(R"({"kind": "convergence", "wavelength_m": 0.0})"),
        std::invalid_argument);
  }
  SUBCASE("not json at all") {
    CHECK_THROWS_AS(parse_config("kind: convergence"), std::invalid_argument);
  }
}

TEST_CASE("atom area defaults to a half-wavelength square") {
  ExperimentConfig c = parse_config(
      R"({"kind": "convergence", "wavelength_m": 0.02,
          "atom_spacing_m": 0.01, "layer_spacing_m": 0.01})");
  CHECK(c.atom_area_m2 == doctest::Approx(1e-4).epsilon(1e-14));

  ExperimentConfig explicit_area = parse_config(
      R"({"kind": "convergence", "wavelength_m": 0.02,
          "atom_spacing_m": 0.01, "layer_spacing_m": 0.01,
          "atom_area_m2": 3e-5})");
  CHECK(explicit_area.atom_area_m2 == doctest::Approx(3e-5).epsilon(1e-14));
}

TEST_CASE("kind-aware validation of the multi-layer stack") {
  // capacity_compare fits a multi-layer stack, so its grids must be square
  CHECK_THROWS_AS(
      parse_config(R"({"kind": "capacity_compare", "tx_layer_atoms": 50})"),
      std::invalid_argument);
  // sweep_atoms never touches that stack, so the same key is only stored
  CHECK_NOTHROW(
      parse_config(R"({"kind": "sweep_atoms", "tx_layer_atoms": 50})"));
  // sweep_distance only uses it when the architecture selects it
  CHECK_NOTHROW(parse_config(
      R"({"kind": "sweep_distance", "tx_layer_atoms": 50})"));
  CHECK_THROWS_AS(
      parse_config(R"({"kind": "sweep_distance", "tx_layer_atoms": 50,
                       "architecture": "multi_layer"})"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      parse_config(R"({"kind": "sweep_distance", "transceiver": "mmse"})"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      parse_config(
          R"({"kind": "sweep_attenuation", "attenuation_list": [0.0, 1.0]})"),
      std::invalid_argument);
}

TEST_CASE("heatmap defaults to json lines while everything else is csv") {
  ExperimentConfig heatmap = parse_config(R"({"kind": "heatmap"})");
  CHECK(heatmap.format == OutputFormat::json_lines);
  CHECK(default_output_name(heatmap) == "heatmap.jsonl");

  ExperimentConfig forced = parse_config(
      R"({"kind": "heatmap", "format": "csv"})");
  CHECK(forced.format == OutputFormat::csv);
  CHECK(default_output_name(forced) == "heatmap.csv");

  ExperimentConfig conv = parse_config(R"({"kind": "convergence"})");
  CHECK(default_output_name(conv) == "convergence.csv");
}

TEST_CASE("resolved parameters serialize the effective configuration") {
  ExperimentConfig c = parse_config(
      R"({"kind": "sweep_atoms", "trials": 3, "workers": 4,
          "out": "somewhere.csv", "atoms_list": [2, 3]})");
  nlohmann::json params = nlohmann::json::parse(resolved_params_json(c));
  CHECK(params.at("kind") == "sweep_atoms");
  CHECK(params.at("trials") == 3);
  CHECK(params.at("master_seed") == 1);
  CHECK(params.at("streams") == 4);
  CHECK(params.at("atoms_list") == nlohmann::json({2, 3}));
  CHECK(params.at("path_gain_convention") == "free_space_gain");
  CHECK(params.at("capacity_formula") == "power_scaled_interference");
  // execution details cannot change values and are excluded
  CHECK_FALSE(params.contains("out"));
  CHECK_FALSE(params.contains("format"));
  CHECK_FALSE(params.contains("workers"));
  // keys of other kinds are excluded
  CHECK_FALSE(params.contains("snr_db_list"));
  CHECK_FALSE(params.contains("architecture"));

  ExperimentConfig conv = parse_config(R"({"kind": "convergence"})");
  nlohmann::json conv_params =
      nlohmann::json::parse(resolved_params_json(conv));
  CHECK(conv_params.at("architecture") == "two_layer");
}

TEST_CASE("load_config names the missing file") {
  CHECK_THROWS_WITH_AS(load_config("/no/such/config.json"),
                       "cannot read config file '/no/such/config.json'",
                       std::invalid_argument);
}

TEST_CASE("convergence runs emit canonical per-iteration records") {
  auto records = run_json(
      R"({"kind": "convergence", "trials": 3, "streams": 2,
          "tx_subarea_atoms": 4, "rx_subarea_atoms": 4,
          "max_iterations": 5, "objective_decrement_threshold": 0.0})");
  REQUIRE_FALSE(records.empty());

  for (const auto& r : records) {
    CHECK(r.experiment == "convergence");
    if (r.trial >= 0) {
      CHECK(r.trial_seed == mix_seed(1, static_cast<std::uint64_t>(r.trial)));
    } else {
      CHECK(r.trial_seed == 0);
    }
    CHECK_FALSE(r.params.empty());
    nlohmann::json parsed_params = nlohmann::json::parse(r.params);
    CHECK(parsed_params.is_object());
  }

  // per-trial traces cover iterations 0..5 and decrease
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<double> trace;
    for (int it = 0; it <= 5; ++it) {
      const ResultRecord* r = find_record(records, trial, "objective", it);
      REQUIRE(r != nullptr);
      trace.push_back(r->value);
    }
    CHECK(strictly_decreasing(trace));
    const ResultRecord* last = find_record(records, trial, "objective", 5);
    const ResultRecord* final_row =
        find_record(records, trial, "objective_final");
    REQUIRE(final_row != nullptr);
    CHECK(final_row->value == last->value);
    CHECK(find_record(records, trial, "nmse", 3) != nullptr);
    CHECK(find_record(records, trial, "alpha") != nullptr);
    CHECK(find_record(records, trial, "iterations") != nullptr);
  }

  // aggregates exist and sit at the end with trial = -1
  CHECK(aggregate_values(records, "nmse_final_mean").size() == 1);
  CHECK(aggregate_values(records, "nmse_final_std").size() == 1);
  CHECK(aggregate_values(records, "objective_final_mean").size() == 1);
  bool seen_aggregate = false;
  for (const auto& r : records) {
    if (r.trial == -1) seen_aggregate = true;
    if (seen_aggregate) CHECK(r.trial == -1);
  }

  // the mean is the mean of the trials
  std::vector<double> finals;
  for (int trial = 0; trial < 3; ++trial) {
    finals.push_back(find_record(records, trial, "nmse_final")->value);
  }
  double mean = (finals[0] + finals[1] + finals[2]) / 3.0;
  CHECK(aggregate_values(records, "nmse_final_mean")[0] ==
        doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("experiment output is deterministic and worker-independent") {
  const std::string base =
      R"({"kind": "convergence", "trials": 5, "streams": 2,
          "tx_subarea_atoms": 3, "rx_subarea_atoms": 3,
          "max_iterations": 4)";
  std::string once = render_results(run_json(base + "}"), OutputFormat::csv);
  std::string again = render_results(run_json(base + "}"), OutputFormat::csv);
  CHECK(once == again);
  std::string threaded = render_results(
      run_json(base + R"(, "workers": 3})"), OutputFormat::csv);
  CHECK(once == threaded);

  std::string other_seed = render_results(
      run_json(base + R"(, "master_seed": 2})"), OutputFormat::csv);
  CHECK(once != other_seed);
}

TEST_CASE("csv and json lines round-trip every record") {
  auto records = run_json(
      R"({"kind": "convergence", "trials": 2, "streams": 2,
          "tx_subarea_atoms": 3, "rx_subarea_atoms": 3,
          "max_iterations": 3})");

  SUBCASE("csv") {
    std::string text = render_results(records, OutputFormat::csv);
    CHECK(text.rfind("experiment,trial,trial_seed,metric,iteration,value,"
                     "params\n",
                     0) == 0);
    auto parsed = parse_results(text, OutputFormat::csv);
    REQUIRE(parsed.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      CHECK(parsed[i].experiment == records[i].experiment);
      CHECK(parsed[i].trial == records[i].trial);
      CHECK(parsed[i].trial_seed == records[i].trial_seed);
      CHECK(parsed[i].metric == records[i].metric);
      CHECK(parsed[i].iteration == records[i].iteration);
      CHECK(parsed[i].value == records[i].value);  // exact double round trip
      CHECK(parsed[i].params == records[i].params);
    }
    CHECK(render_results(parsed, OutputFormat::csv) == text);
  }
  SUBCASE("json lines") {
    std::string text = render_results(records, OutputFormat::json_lines);
    auto parsed = parse_results(text, OutputFormat::json_lines);
    REQUIRE(parsed.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      CHECK(parsed[i].metric == records[i].metric);
      CHECK(parsed[i].value == records[i].value);
      CHECK(parsed[i].params == records[i].params);
    }
    CHECK(render_results(parsed, OutputFormat::json_lines) == text);
    // iteration is omitted for scalar metrics and present for traces
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      nlohmann::json row = nlohmann::json::parse(line);
      if (row.at("metric") == "objective") CHECK(row.contains("iteration"));
      if (row.at("metric") == "alpha") CHECK_FALSE(row.contains("iteration"));
      CHECK(row.at("params").is_object());
    }
  }
}

TEST_CASE("emit_results reports unwritable destinations") {
  std::vector<ResultRecord> records;
  CHECK_THROWS_WITH_AS(
      emit_results(records, "/no/such/dir/out.csv", OutputFormat::csv),
      "cannot open '/no/such/dir/out.csv' for writing", std::runtime_error);
}

TEST_CASE("emit_results writes exactly the rendered bytes") {
  auto records = run_json(
      R"({"kind": "convergence", "trials": 1, "streams": 2,
          "tx_subarea_atoms": 3, "rx_subarea_atoms": 3,
          "max_iterations": 2})");
  const std::string path = "harness_emit_check.csv";
  emit_results(records, path, OutputFormat::csv);
  std::ifstream input(path, std::ios::binary);
  REQUIRE(input.good());
  std::ostringstream buffer;
  buffer << input.rdbuf();
  input.close();
  std::remove(path.c_str());
  CHECK(buffer.str() == render_results(records, OutputFormat::csv));
}

TEST_CASE("more surface atoms fit better and carry more capacity") {
  auto records = run_json(R"({"kind": "sweep_atoms"})");
  std::vector<double> nmse_means = aggregate_values(records, "nmse_mean");
  std::vector<double> capacity_means =
      aggregate_values(records, "capacity_mean");
  REQUIRE(nmse_means.size() == 5);  // grid order: 5, 10, 15, 20, 25
  REQUIRE(capacity_means.size() == 5);
  CHECK(strictly_decreasing(nmse_means));
  CHECK(strictly_increasing(capacity_means));
  CHECK(nmse_means.front() > 1e-6);
  CHECK(nmse_means.back() < 1e-7);
}

TEST_CASE("longer links lose capacity") {
  auto records = run_json(R"({"kind": "sweep_distance"})");
  std::vector<double> capacity_means =
      aggregate_values(records, "capacity_mean");
  REQUIRE(capacity_means.size() == 5);  // 50 .. 250 m
  CHECK(strictly_decreasing(capacity_means));
}

TEST_CASE("per-stream fit quality degrades as streams are added") {
  auto records = run_json(
      R"({"kind": "sweep_streams", "tx_subarea_atoms": 4,
          "rx_subarea_atoms": 4,
          "streams_list": [1, 2, 3, 4, 6, 8, 12, 16]})");
  std::vector<double> nmse_means = aggregate_values(records, "nmse_mean");
  std::vector<double> capacity_means =
      aggregate_values(records, "capacity_mean");
  REQUIRE(nmse_means.size() == 8);
  CHECK(strictly_increasing(nmse_means));

  // capacity peaks at an interior stream count: multiplexing first wins,
  // then the residual interference takes over
  auto peak = std::max_element(capacity_means.begin(), capacity_means.end());
  CHECK(peak - capacity_means.begin() == 4);  // S = 6
  CHECK(*peak > capacity_means.front());
  CHECK(*peak > capacity_means.back());
}

TEST_CASE("svd transceivers hit the capacity bound at every distance") {
  auto records = run_json(
      R"({"kind": "sweep_distance", "transceiver": "svd_ideal",
          "trials": 3, "distances_m": [100, 150]})");
  int checked = 0;
  for (const auto& r : records) {
    if (r.trial < 0) continue;
    if (r.metric == "diag_error") {
      CHECK(r.value < 1e-9);
      ++checked;
    }
  }
  CHECK(checked == 6);
  for (int trial = 0; trial < 3; ++trial) {
    // records from both grid points share trial ids; compare pairwise in
    // grid order
    std::vector<double> capacity;
    std::vector<double> bound;
    for (const auto& r : records) {
      if (r.trial != trial) continue;
      if (r.metric == "capacity") capacity.push_back(r.value);
      if (r.metric == "capacity_bound") bound.push_back(r.value);
    }
    REQUIRE(capacity.size() == 2);
    REQUIRE(bound.size() == 2);
    for (std::size_t i = 0; i < capacity.size(); ++i) {
      CHECK(capacity[i] == doctest::Approx(bound[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("off-diagonal leakage collapses as the fit improves") {
  auto dense = run_json(R"({"kind": "heatmap"})");
  std::vector<double> ratio = aggregate_values(dense, "off_diag_ratio_mean");
  REQUIRE(ratio.size() == 1);
  CHECK(ratio[0] < 1e-6);

  auto starved = run_json(
      R"({"kind": "heatmap", "tx_subarea_atoms": 1, "rx_subarea_atoms": 1})");
  std::vector<double> starved_ratio =
      aggregate_values(starved, "off_diag_ratio_mean");
  REQUIRE(starved_ratio.size() == 1);
  CHECK(starved_ratio[0] > 0.1);

  // the per-entry magnitude grid is emitted for every trial
  int entries = 0;
  for (const auto& r : dense) {
    if (r.trial == 0 && r.metric.rfind("abs_h[", 0) == 0) ++entries;
  }
  CHECK(entries == 16);  // default S = 4
  CHECK(find_record(dense, 0, "abs_h[00][00]") != nullptr);
  CHECK(find_record(dense, 0, "abs_h[03][02]") != nullptr);
}

TEST_CASE("ber curve emits both architectures on the snr grid") {
  auto records = run_json(
      R"({"kind": "ber_curve", "trials": 2, "streams": 2,
          "tx_subarea_atoms": 9, "rx_subarea_atoms": 9,
          "tx_layers": 2, "rx_layers": 2,
          "tx_layer_atoms": 16, "rx_layer_atoms": 16,
          "snr_db_list": [80, 90], "n_symbols": 2000,
          "max_iterations": 5})");
  for (int point = 0; point < 2; ++point) {
    for (int trial = 0; trial < 2; ++trial) {
      const ResultRecord* two =
          find_record(records, trial, "ber_two_layer", point);
      const ResultRecord* multi =
          find_record(records, trial, "ber_multi_layer", point);
      REQUIRE(two != nullptr);
      REQUIRE(multi != nullptr);
      CHECK(two->value >= 0.0);
      CHECK(two->value <= 1.0);
      CHECK(multi->value >= 0.0);
      CHECK(multi->value <= 1.0);
    }
    REQUIRE(find_record(records, -1, "ber_two_layer_mean", point) != nullptr);
    REQUIRE(find_record(records, -1, "ber_multi_layer_mean", point) !=
            nullptr);
  }
  // the per-point params pin the grid point's transmit power
  const ResultRecord* first = find_record(records, 0, "ber_two_layer", 0);
  nlohmann::json params = nlohmann::json::parse(first->params);
  CHECK(params.at("pt_dbm") == doctest::Approx(-110.0 + 80.0));
}

TEST_CASE("capacity comparison covers both stacks and the mimo baseline") {
  auto records = run_json(
      R"({"kind": "capacity_compare", "trials": 3, "streams": 2,
          "tx_subarea_atoms": 4, "rx_subarea_atoms": 4,
          "tx_layers": 2, "rx_layers": 2,
          "tx_layer_atoms": 9, "rx_layer_atoms": 9,
          "max_iterations": 5})");
  for (int trial = 0; trial < 3; ++trial) {
    for (const char* metric :
         {"capacity_two_layer", "capacity_bound_two_layer", "nmse_two_layer",
          "alpha_two_layer", "capacity_multi_layer",
          "capacity_bound_multi_layer", "nmse_multi_layer",
          "alpha_multi_layer", "capacity_zf", "zf_gain"}) {
      REQUIRE_MESSAGE(find_record(records, trial, metric) != nullptr, metric);
    }
    CHECK(find_record(records, trial, "zf_gain")->value > 0.0);
  }
  for (const char* metric : {"capacity_two_layer_mean", "capacity_two_layer_std",
                             "capacity_multi_layer_mean", "capacity_zf_mean"}) {
    CHECK_MESSAGE(aggregate_values(records, metric).size() == 1, metric);
  }
}

TEST_CASE("scaling bench reports timings and the fitted exponent") {
  auto records = run_json(
      R"({"kind": "scaling_bench", "streams": 2, "m_list": [4, 8],
          "bench_repeats": 2})");
  int samples = 0;
  int minima = 0;
  for (const auto& r : records) {
    if (r.metric == "sweep_seconds") {
      CHECK(r.value > 0.0);
      ++samples;
    }
    if (r.metric == "sweep_seconds_min") {
      CHECK(r.trial == -1);
      ++minima;
    }
  }
  CHECK(samples == 4);  // 2 sizes x 2 repeats
  CHECK(minima == 2);
  CHECK(aggregate_values(records, "scaling_slope").size() == 1);
  std::vector<double> r2 = aggregate_values(records, "scaling_r_squared");
  REQUIRE(r2.size() == 1);
  CHECK(r2[0] <= 1.0 + 1e-12);
}

TEST_CASE("power-law fitting recovers exact exponents") {
  PowerLawFit fit = fit_power_law({2.0, 4.0, 8.0}, {12.0, 48.0, 192.0});
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));

  PowerLawFit cubic = fit_power_law({1.0, 2.0, 4.0, 8.0},
                                    {5.0, 40.0, 320.0, 2560.0});
  CHECK(cubic.slope == doctest::Approx(3.0).epsilon(1e-12));

  CHECK_THROWS_AS(fit_power_law({1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_power_law({1.0, 2.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_power_law({1.0, 2.0}, {0.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_power_law({-1.0, 2.0}, {1.0, 1.0}),
                  std::invalid_argument);
}
