#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "jsct/projector.hpp"

namespace jsct {

/// Measured (attenuated) counts d and incident counts I0, one per ray.
struct PoissonData {
  std::vector<double> counts;    // d_i >= 0
  std::vector<double> incident;  // I0_i > 0

  void validate(std::size_t ray_count) const;
};

/// Symmetric voxel adjacency with positive weights. Each unordered pair
/// {j, j'} stands for the two paired difference rows (j - j') and (j' - j)
/// of the regularizer's difference operator.
class NeighborhoodSystem {
 public:
  struct Neighbor {
    std::uint32_t index;
    double weight;
  };

  NeighborhoodSystem() = default;
  /// Validates symmetry (equal weights both ways), no self-neighbours and
  /// strictly positive weights.
  explicit NeighborhoodSystem(std::vector<std::vector<Neighbor>> lists);

  /// 4-connected in-plane (6-connected when slices > 1), unit weights.
  static NeighborhoodSystem four_connected(std::size_t rows, std::size_t cols,
                                           std::size_t slices = 1);
  /// 8-connected in-plane; diagonal neighbours weighted 1/sqrt(2). Adds
  /// unit-weight through-plane neighbours when slices > 1.
  static NeighborhoodSystem eight_connected(std::size_t rows, std::size_t cols,
                                            std::size_t slices = 1);

  std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::span<const Neighbor> neighbors(std::size_t j) const {
    return {neighbors_.data() + offsets_[j], offsets_[j + 1] - offsets_[j]};
  }
  double max_weight() const { return max_weight_; }
  std::size_t directed_pair_count() const { return neighbors_.size(); }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> neighbors_;
  double max_weight_ = 0.0;
};

struct RegularizerParams {
  double lambda = 0.0;  // >= 0
  double delta = 1e-3;  // > 0, mm^-1

  void validate() const;
};

/// d l + I0 exp(-l)
double datafit_term(double l, double d, double i0);

/// w delta^2 (|t/delta| - log(1 + |t/delta|)); even, convex, zero at 0.
double huber_log(double t, double weight, double delta);
/// w t / (1 + |t/delta|)
double huber_log_derivative(double t, double weight, double delta);
/// w / (1 + |t/delta|)^2, bounded by w.
double huber_log_curvature(double t, double weight, double delta);

/// Sum over directed neighbour pairs of huber_log(x_j - x_j'), i.e. every
/// unordered pair counted twice.
double regularizer_value(std::span<const double> x, const NeighborhoodSystem& nbhd,
                         double delta);
/// d beta / d x_j = sum_{j' in N_j} 2 huber_log_derivative(x_j - x_j').
std::vector<double> regularizer_gradient(std::span<const double> x,
                                         const NeighborhoodSystem& nbhd, double delta);

/// Data term sum_i datafit_term((Hx)_i, d_i, I0_i) given precomputed
/// line integrals.
double datafit_value(std::span<const double> line_integrals, const PoissonData& data);

/// Phi(x) = f(x) + lambda beta(x). Requires x >= 0.
double objective(std::span<const double> x, const SparseSystemMatrix& H,
                 const PoissonData& data, const NeighborhoodSystem& nbhd,
                 const RegularizerParams& reg);

/// H^T (d - q_hat) + lambda grad beta(x), q_hat_i = I0_i exp(-(Hx)_i).
std::vector<double> gradient(std::span<const double> x, const SparseSystemMatrix& H,
                             const PoissonData& data, const NeighborhoodSystem& nbhd,
                             const RegularizerParams& reg);

/// v -> C^T C v for the paired-row difference operator:
/// (C^T C v)_j = sum_{j' in N_j} 2 (v_j - v_j').
std::vector<double> apply_difference_normal(std::span<const double> v,
                                            const NeighborhoodSystem& nbhd);

struct PowerIterationOptions {
  double tol = 1e-6;  // relative change of successive Rayleigh quotients
  std::size_t max_iters = 1000;
};

struct LipschitzEstimate {
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Largest eigenvalue of max_i I0_i H^T H + lambda max(w) C^T C by power
/// iteration from the normalized all-ones vector. A run that hits max_iters
/// returns its last estimate with converged = false.
LipschitzEstimate lipschitz_constant(const SparseSystemMatrix& H, const PoissonData& data,
                                     const NeighborhoodSystem& nbhd,
                                     const RegularizerParams& reg,
                                     const PowerIterationOptions& options = {});

}  // namespace jsct
