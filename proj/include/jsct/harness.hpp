#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "jsct/algorithms.hpp"
#include "jsct/config.hpp"
#include "jsct/simulate.hpp"

namespace jsct {

inline constexpr const char* kLibraryVersion = "jsct 0.1.0";

/// Phantom, system matrix and simulated scan for a config.
struct ExperimentSetup {
  Phantom phantom;
  SparseSystemMatrix H;
  SimulatedScan scan;
  std::vector<std::string> warnings;
};

ExperimentSetup build_setup(const ExperimentConfig& cfg);
Problem make_problem(const ExperimentConfig& cfg, const ExperimentSetup& setup);

struct ReferenceOptimum {
  std::vector<double> x;
  double phi = 0.0;
  double passes = 0.0;
  double tail_relative_drop = 0.0;  // Phi decrease over the final pass / |Phi|
  std::optional<std::string> warning;
  std::string source = "full_js";  // run that attained phi
};

/// Runs Full-JS for `passes` effective passes and keeps the best objective
/// seen. Warns when Phi still drops by more than 1e-8 relative per pass.
ReferenceOptimum compute_reference_optimum(const Problem& problem, const AlgorithmConfig& base,
                                           double passes);

struct ConvergenceRecord {
  std::string algorithm;
  double pass = 0.0;
  double objective = 0.0;
  double normalized_error = 0.0;
  double wall_seconds = 0.0;
};

/// (phi - phi_star) / |phi_star|
double normalized_error(double phi, double phi_star);

/// Header `algorithm,pass,objective,normalized_error,wall_seconds`, numbers
/// printed with 17 significant digits.
void write_convergence_csv(const std::filesystem::path& path,
                           const std::vector<ConvergenceRecord>& records);
std::vector<ConvergenceRecord> read_convergence_csv(const std::filesystem::path& path);

/// Error of the last record with pass <= `pass` (records sorted by pass).
std::optional<double> error_at_pass(const std::vector<ConvergenceRecord>& records, double pass);

/// Problems found by the post-hoc CSV checks: pass strictly increasing,
/// errors >= -1e-9, and (when `monotone`) nonincreasing errors.
std::vector<std::string> check_records(const std::vector<ConvergenceRecord>& records,
                                       bool monotone);

struct AlgorithmRun {
  Scheme scheme = Scheme::full_js;
  std::size_t subsets = 1;
  std::vector<ConvergenceRecord> records;
  std::optional<std::string> error;  // set when the algorithm aborted
  double wall_seconds = 0.0;
  std::filesystem::path csv_path;
};

struct ExperimentSummary {
  ReferenceOptimum reference;
  std::vector<AlgorithmRun> runs;
  std::vector<std::string> check_failures;
  std::filesystem::path metadata_path;

  const AlgorithmRun* find(Scheme scheme, std::size_t subsets) const;
  bool ok() const;
};

/// Runs every algorithm for every subset count, writes
///   <out>/subsets_<B>/<algorithm>.csv and .pgm (+ raw dump),
///   <out>/phantom.pgm, <out>/reference.pgm, <out>/metadata.json.
/// An algorithm that throws is recorded and the remaining ones still run.
ExperimentSummary run_experiment(const ExperimentConfig& cfg);

}  // namespace jsct
