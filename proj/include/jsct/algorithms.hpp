#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jsct/model.hpp"
#include "jsct/projector.hpp"
#include "jsct/random.hpp"
#include "jsct/solver1d.hpp"

namespace jsct {

enum class Scheme { full_js, os_js, sa_js, osa_js, full_gd, os_gd, sa_gd };

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view name);
bool is_full_scheme(Scheme s);
bool is_average_scheme(Scheme s);  // keeps per-subset back-projection memory
bool is_jensen_scheme(Scheme s);

struct AlgorithmConfig {
  Scheme scheme = Scheme::full_js;
  std::size_t n_subsets = 1;  // ignored (treated as 1) by the full schemes
  RegularizerParams reg;
  Solver1DConfig solver;
  double max_passes = 10.0;
  std::uint64_t seed = 0;
  double initial_value = 0.001;  // uniform x^(0), mm^-1
  std::optional<double> lipschitz;  // gradient schemes; computed when empty
  bool check_memory = false;  // recompute the average memory sum after updates

  void validate() const;
  std::size_t effective_subsets() const { return is_full_scheme(scheme) ? 1 : n_subsets; }
};

/// Immutable reconstruction problem: geometry, system matrix, data,
/// neighborhood, plus the shared precomputations Z and b = H^T d.
class Problem {
 public:
  Problem(Geometry geom, SparseSystemMatrix H, PoissonData data, NeighborhoodSystem nbhd);

  const Geometry& geometry() const { return geom_; }
  const SparseSystemMatrix& matrix() const { return H_; }
  const PoissonData& data() const { return data_; }
  const NeighborhoodSystem& neighborhood() const { return nbhd_; }
  double z() const { return z_; }
  std::span<const double> counts_backprojection() const { return b_; }
  std::size_t voxels() const { return H_.cols(); }
  std::size_t rays() const { return H_.rows(); }

  double objective(std::span<const double> x, const RegularizerParams& reg) const;

 private:
  Geometry geom_;
  SparseSystemMatrix H_;
  PoissonData data_;
  NeighborhoodSystem nbhd_;
  double z_ = 0.0;
  std::vector<double> b_;
};

/// Stored per-subset back-projections and their running sum. Each update
/// touches the sum with one subtraction and one addition per voxel.
class AverageMemory {
 public:
  AverageMemory(std::size_t n_subsets, std::size_t n_voxels);

  void update(std::size_t k, std::span<const double> fresh);

  std::size_t n_subsets() const { return n_subsets_; }
  std::span<const double> running_sum() const { return sum_; }
  std::span<const double> stored(std::size_t k) const {
    return {stored_.data() + k * n_voxels_, n_voxels_};
  }
  std::vector<double> explicit_sum() const;
  /// max_j |sum_j - explicit_j| / max(|explicit_j|, tiny)
  double max_relative_drift() const;
  std::uint64_t last_update_ops() const { return last_ops_; }

 private:
  std::size_t n_subsets_;
  std::size_t n_voxels_;
  std::vector<double> stored_;
  std::vector<double> sum_;
  std::uint64_t last_ops_ = 0;
};

struct IterationState {
  std::vector<double> x;
  std::uint64_t iteration = 0;
  std::uint64_t init_passes = 0;  // memory initialization charge
  std::size_t subsets = 1;
  Rng rng;
  std::size_t last_subset = 0;
  double last_lambda_scale = 0.0;  // regularizer weight of the last update

  double passes() const {
    return static_cast<double>(init_passes) +
           static_cast<double>(iteration) / static_cast<double>(subsets);
  }
};

struct IterationDiagnostics {
  std::uint64_t solver_max_iters = 0;
  std::uint64_t solver_failures = 0;  // diverged or non-finite; x_hat kept
  std::uint64_t degenerate_zero_estimate = 0;
  std::uint64_t degenerate_zero_counts = 0;
  std::uint64_t degenerate_empty = 0;
  bool lipschitz_converged = true;
};

class AlgorithmError : public std::runtime_error {
 public:
  AlgorithmError(const std::string& what, std::uint64_t iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  std::uint64_t iteration() const { return iteration_; }

 private:
  std::uint64_t iteration_;
};

/// Stateful driver for one scheme. step() performs one (sub)iteration:
///   full_js   Jensen surrogate update using all rays
///   os_js     subset n mod B, regularizer weight lambda / B
///   sa_js     uniform random subset, averaged back-projection memory
///   osa_js    as sa_js with cyclic subsets
///   full_gd   projected gradient step 1/L
///   os_gd     subset gradient scaled by B, step 1/L
///   sa_gd     averaged subset gradients, step 1/L
class Reconstructor {
 public:
  Reconstructor(const Problem& problem, const AlgorithmConfig& cfg);

  /// Chooses the subset per the scheme's schedule and updates x.
  void step();
  /// Updates x with a caller-chosen subset (ignored by full schemes).
  void step_subset(std::size_t k);

  const IterationState& state() const { return state_; }
  const AverageMemory* memory() const { return memory_ ? &*memory_ : nullptr; }
  const SubsetPartition& partition() const { return partition_; }
  const IterationDiagnostics& diagnostics() const { return diag_; }
  double lipschitz() const { return lipschitz_; }
  std::size_t next_subset();

 private:
  std::vector<double> subset_estimate_backprojection(std::size_t k) const;
  std::vector<double> full_estimate_backprojection() const;
  void jensen_update(std::span<const double> linear, std::span<const double> exp_coeff,
                     double lambda_scale);
  void gradient_update(std::span<const double> data_gradient, double reg_scale,
                       double gradient_scale);
  void check_finite() const;

  const Problem& problem_;
  AlgorithmConfig cfg_;
  Solver1DConfig solver_;
  SubsetPartition partition_;
  std::optional<AverageMemory> memory_;
  IterationState state_;
  IterationDiagnostics diag_;
  double lipschitz_ = 0.0;
};

struct ProgressRecord {
  std::uint64_t iteration = 0;
  double passes = 0.0;
  std::optional<double> objective;  // evaluated once per effective pass
  double wall_seconds = 0.0;
};

using ProgressCallback = std::function<void(const ProgressRecord&, std::span<const double> x)>;

struct RunResult {
  std::vector<double> x;
  std::vector<ProgressRecord> history;  // records carrying an objective value
  IterationDiagnostics diagnostics;
  double lipschitz = 0.0;
};

/// Runs the configured scheme until max_passes effective data passes. The
/// objective is evaluated at pass 0 and after every whole pass; its cost is
/// not charged to the pass counter.
RunResult run(const Problem& problem, const AlgorithmConfig& cfg,
              const ProgressCallback& callback = {});

}  // namespace jsct
