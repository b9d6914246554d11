#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "jsct/model.hpp"
#include "jsct/projector.hpp"
#include "jsct/solver1d.hpp"

namespace jsct {

struct SurrogateValue {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Per-voxel coefficients of the separable data-fit surrogate obtained with
/// Jensen weights r_ij = h_ij / Z:
///   g_j(x) = b (x - x_hat) + (b_hat / Z) exp(-Z (x - x_hat)).
/// b is the back-projection of the counts, b_hat that of q_hat.
struct DataSurrogateCoeffs {
  double b = 0.0;
  double b_hat = 0.0;
  double z = 1.0;
};

SurrogateValue data_surrogate_eval(const DataSurrogateCoeffs& c, double x, double x_hat);

/// One voxel's share of the regularizer surrogate around the image x_hat:
///   lambda_scale * pair_rows * sum_{j'} (w/2) delta^2 rho((2x - x_hat_j - x_hat_j') / delta)
/// with rho(u) = |u| - log(1 + |u|). Each term is the half-weight Jensen
/// split of one difference row; pair_rows counts how many rows of C carry a
/// given neighbour relation onto voxel j (2 for a paired-row neighborhood).
struct RegSurrogate1D {
  double x_hat = 0.0;
  std::span<const NeighborhoodSystem::Neighbor> neighbors{};
  std::span<const double> expansion{};  // neighbour values are read from here
  double delta = 1e-3;
  double lambda_scale = 1.0;
  double pair_rows = 1.0;
};

SurrogateValue reg_surrogate_eval(const RegSurrogate1D& rs, double x);
/// d1 and d2 of reg_surrogate_eval without the value.
Derivatives reg_surrogate_derivatives(const RegSurrogate1D& rs, double x);

/// Voxel j's regularizer surrogate for the paired-row neighborhood, so that
/// summing over voxels majorizes lambda_scale * regularizer_value().
RegSurrogate1D make_reg_surrogate(const NeighborhoodSystem& nbhd,
                                  std::span<const double> x_hat, std::size_t j,
                                  double delta, double lambda_scale);

/// Per-voxel function minimized by the Jensen-surrogate iterations:
/// data surrogate plus regularizer surrogate, both expanded at x_hat.
struct VoxelSurrogate {
  DataSurrogateCoeffs data;
  double x_hat = 0.0;
  RegSurrogate1D reg;  // lambda_scale == 0 disables the term

  double value(double x) const;
  Derivatives derivatives(double x) const;
};

/// Floor substituted for b when a voxel has no measured counts.
inline constexpr double kCountFloor = 1e-12;

enum class UpdateDegeneracy {
  none,
  zero_estimate,  // b_hat == 0, b > 0: minimizer is 0
  zero_counts,    // b == 0, b_hat > 0: unbounded, capped via kCountFloor
  empty,          // b == b_hat == 0: surrogate constant, x_hat kept
};

struct ClosedFormResult {
  double value = 0.0;
  UpdateDegeneracy degeneracy = UpdateDegeneracy::none;
};

/// Exact nonnegative minimizer of the unregularized surrogate,
/// [x_hat - ln(b / b_hat) / Z]_+.
ClosedFormResult closed_form_update(const DataSurrogateCoeffs& c, double x_hat);

/// True when sum_j h_ij / Z <= 1 for every row, the condition under which
/// r_ij = h_ij / Z are valid Jensen weights.
bool jensen_weights_valid(const SparseSystemMatrix& H, double z);

/// Sum over voxels of data_surrogate_eval values.
double data_surrogate_total(std::span<const double> b, std::span<const double> b_hat,
                            double z, std::span<const double> x,
                            std::span<const double> x_hat);
/// Sum over voxels of reg_surrogate_eval values (lambda_scale = 1).
double reg_surrogate_total(const NeighborhoodSystem& nbhd, std::span<const double> x,
                           std::span<const double> x_hat, double delta);

struct MajorizationReport {
  double data_gap = 0.0;  // (g(x) - g(x_hat)) - (f(x) - f(x_hat))
  double data_tolerance = 0.0;
  double data_tangency_error = 0.0;  // max relative gradient mismatch at x_hat
  double reg_gap = 0.0;
  double reg_tolerance = 0.0;
  double reg_tangency_error = 0.0;

  bool data_majorizes() const { return data_gap >= -data_tolerance; }
  bool reg_majorizes() const { return reg_gap >= -reg_tolerance; }
  bool tangent(double tol = 1e-8) const {
    return data_tangency_error <= tol && reg_tangency_error <= tol;
  }
  bool ok() const { return data_majorizes() && reg_majorizes() && tangent(); }
};

/// Checks that both surrogates built at x_hat upper-bound the data term and
/// the regularizer at x (up to their common constant) and share their
/// gradients at x_hat. Tolerance 1e-9 (1 + |f(x)|) on the inequalities.
MajorizationReport surrogate_majorization_check(std::span<const double> x,
                                                std::span<const double> x_hat,
                                                const SparseSystemMatrix& H,
                                                const PoissonData& data,
                                                const NeighborhoodSystem& nbhd, double delta);

}  // namespace jsct
