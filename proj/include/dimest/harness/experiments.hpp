#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dimest/harness/json_io.hpp"
#include "dimest/manifolds.hpp"

namespace dimest::harness {

inline constexpr std::string_view kLibraryVersion = "1.0.0";
inline constexpr int kCsvSchemaVersion = 1;

enum class ExperimentKind { concentration, anticoncentration, bandwidth_compare };

std::string_view to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(std::string_view name);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::concentration;
  std::vector<ManifoldSpec> manifolds;
  std::vector<std::int64_t> n_list;
  int trials = 1;
  std::vector<double> eps_list;
  std::vector<double> sigma_list;
  double gamma = 0.4;
  double c = 0.5;
  std::optional<double> t;  // nullopt: choose 0.95 * t0 automatically
  bool allow_above_t0 = false;
  std::uint64_t seed = 42;
  std::vector<double> theory_n;    // anticoncentration: theory block sample sizes
  std::vector<double> eps_star_n;  // anticoncentration: eps* curve sample sizes
  double target_prob = 0.1;
  int grid_size = 64;
  double delta = 1e-3;
  double tie_tolerance = 1e-3;  // bandwidth_compare: |err_ours - err_slope| counted as a tie
  unsigned threads = 0;         // 0: DIMEST_THREADS or hardware concurrency
  std::string output_dir = ".";

  void validate() const;
  // Resolved configuration without output_dir/threads, which cannot change results.
  json to_json() const;
};

ExperimentConfig default_config(ExperimentKind kind);

// Defaults for `kind`, overlaid with the fields present in `j`.
ExperimentConfig config_from_json(ExperimentKind kind, const json& j);

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view col) const;
  const std::string& cell(std::size_t row, std::string_view col) const;
  double number(std::size_t row, std::string_view col) const;
  std::string to_csv() const;
};

struct ExperimentResult {
  ExperimentKind experiment;
  std::vector<Table> tables;
  json metadata;  // shared sidecar content
  std::vector<std::string> warnings;

  const Table& table(std::string_view name) const;
};

ExperimentResult run_concentration(const ExperimentConfig& cfg);
ExperimentResult run_anticoncentration(const ExperimentConfig& cfg);
ExperimentResult run_bandwidth_compare(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Writes <table>.csv and <table>.meta.json for every table; returns the written paths.
std::vector<std::string> write_result(const ExperimentResult& result, const std::string& dir);

}  // namespace dimest::harness
