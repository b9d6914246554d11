#include "jsct/algorithms.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "jsct/parallel.hpp"
#include "jsct/surrogates.hpp"

namespace jsct {

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::full_js:
      return "full_js";
    case Scheme::os_js:
      return "os_js";
    case Scheme::sa_js:
      return "sa_js";
    case Scheme::osa_js:
      return "osa_js";
    case Scheme::full_gd:
      return "full_gd";
    case Scheme::os_gd:
      return "os_gd";
    case Scheme::sa_gd:
      return "sa_gd";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  for (auto s : {Scheme::full_js, Scheme::os_js, Scheme::sa_js, Scheme::osa_js, Scheme::full_gd,
                 Scheme::os_gd, Scheme::sa_gd})
    if (name == to_string(s)) return s;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

bool is_full_scheme(Scheme s) { return s == Scheme::full_js || s == Scheme::full_gd; }

bool is_average_scheme(Scheme s) {
  return s == Scheme::sa_js || s == Scheme::osa_js || s == Scheme::sa_gd;
}

bool is_jensen_scheme(Scheme s) {
  return s == Scheme::full_js || s == Scheme::os_js || s == Scheme::sa_js || s == Scheme::osa_js;
}

void AlgorithmConfig::validate() const {
  if (n_subsets < 1) throw std::invalid_argument("algorithm: n_subsets must be >= 1");
  reg.validate();
  solver.validate();
  if (!(max_passes >= 0.0)) throw std::invalid_argument("algorithm: max_passes must be >= 0");
  if (!(initial_value >= 0.0)) throw std::invalid_argument("algorithm: initial value must be >= 0");
  if (lipschitz && !(*lipschitz > 0.0))
    throw std::invalid_argument("algorithm: Lipschitz constant must be > 0");
}

Problem::Problem(Geometry geom, SparseSystemMatrix H, PoissonData data, NeighborhoodSystem nbhd)
    : geom_(geom), H_(std::move(H)), data_(std::move(data)), nbhd_(std::move(nbhd)) {
  geom_.validate();
  if (H_.rows() != geom_.ray_count() || H_.cols() != geom_.voxel_count())
    throw std::invalid_argument("problem: system matrix shape does not match geometry");
  data_.validate(H_.rows());
  if (nbhd_.size() != H_.cols())
    throw std::invalid_argument("problem: neighborhood size does not match voxel count");
  z_ = compute_z(H_);
  b_ = back_project(H_, data_.counts);
}

double Problem::objective(std::span<const double> x, const RegularizerParams& reg) const {
  return jsct::objective(x, H_, data_, nbhd_, reg);
}

AverageMemory::AverageMemory(std::size_t n_subsets, std::size_t n_voxels)
    : n_subsets_(n_subsets), n_voxels_(n_voxels), stored_(n_subsets * n_voxels, 0.0),
      sum_(n_voxels, 0.0) {
  if (n_subsets == 0) throw std::invalid_argument("AverageMemory: need at least one subset");
}

void AverageMemory::update(std::size_t k, std::span<const double> fresh) {
  if (k >= n_subsets_) throw std::out_of_range("AverageMemory: subset index out of range");
  if (fresh.size() != n_voxels_)
    throw std::invalid_argument("AverageMemory: vector length does not match voxel count");
  double* old = stored_.data() + k * n_voxels_;
  std::uint64_t ops = 0;
  // (sum - old) + new: with a single subset this reproduces `fresh` exactly.
  for (std::size_t j = 0; j < n_voxels_; ++j) {
    sum_[j] = (sum_[j] - old[j]) + fresh[j];
    old[j] = fresh[j];
    ops += 2;
  }
  last_ops_ = ops;
}

std::vector<double> AverageMemory::explicit_sum() const {
  std::vector<double> s(n_voxels_, 0.0);
  for (std::size_t k = 0; k < n_subsets_; ++k) {
    const auto v = stored(k);
    for (std::size_t j = 0; j < n_voxels_; ++j) s[j] += v[j];
  }
  return s;
}

double AverageMemory::max_relative_drift() const {
  const auto ref = explicit_sum();
  double worst = 0.0;
  for (std::size_t j = 0; j < n_voxels_; ++j) {
    const double scale = std::max(std::abs(ref[j]), std::numeric_limits<double>::min());
    worst = std::max(worst, std::abs(sum_[j] - ref[j]) / scale);
  }
  return worst;
}

Reconstructor::Reconstructor(const Problem& problem, const AlgorithmConfig& cfg)
    : problem_(problem), cfg_(cfg) {
  cfg_.validate();
  const std::size_t n_subsets = cfg_.effective_subsets();
  solver_ = cfg_.solver.resolve_radii(problem_.z());
  partition_ = partition_rays(problem_.geometry(), problem_.matrix(), problem_.data().counts,
                              n_subsets);
  state_.x.assign(problem_.voxels(), cfg_.initial_value);
  state_.subsets = n_subsets;
  state_.rng.seed(cfg_.seed);

  if (!is_jensen_scheme(cfg_.scheme)) {
    if (cfg_.lipschitz) {
      lipschitz_ = *cfg_.lipschitz;
    } else {
      const auto est = lipschitz_constant(problem_.matrix(), problem_.data(),
                                          problem_.neighborhood(), cfg_.reg);
      lipschitz_ = est.value;
      diag_.lipschitz_converged = est.converged;
    }
  }

  if (is_average_scheme(cfg_.scheme)) {
    // Every stored back-projection starts from x^(0); costs one full pass.
    memory_.emplace(n_subsets, problem_.voxels());
    const auto q = [&] {
      auto l = forward_project(problem_.matrix(), state_.x);
      for (std::size_t i = 0; i < l.size(); ++i)
        l[i] = problem_.data().incident[i] * std::exp(-l[i]);
      return l;
    }();
    for (std::size_t k = 0; k < n_subsets; ++k)
      memory_->update(k, back_project(problem_.matrix(), q, partition_.subsets[k]));
    state_.init_passes = 1;
  }
}

std::size_t Reconstructor::next_subset() {
  const std::size_t b = state_.subsets;
  switch (cfg_.scheme) {
    case Scheme::sa_js:
    case Scheme::sa_gd:
      return static_cast<std::size_t>(uniform_index(state_.rng, b));
    default:
      return static_cast<std::size_t>(state_.iteration % b);
  }
}

void Reconstructor::step() { step_subset(next_subset()); }

std::vector<double> Reconstructor::full_estimate_backprojection() const {
  auto q = forward_project(problem_.matrix(), state_.x);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = problem_.data().incident[i] * std::exp(-q[i]);
  return back_project(problem_.matrix(), q);
}

std::vector<double> Reconstructor::subset_estimate_backprojection(std::size_t k) const {
  const auto& rays = partition_.subsets[k];
  auto q = forward_project(problem_.matrix(), state_.x, rays);
  for (std::size_t t = 0; t < q.size(); ++t)
    q[t] = problem_.data().incident[rays[t]] * std::exp(-q[t]);
  return back_project_compact(problem_.matrix(), q, rays);
}

void Reconstructor::step_subset(std::size_t k) {
  const std::size_t b_count = state_.subsets;
  if (k >= b_count) throw std::out_of_range("step_subset: subset index out of range");
  const double lambda = cfg_.reg.lambda;
  const double b_real = static_cast<double>(b_count);
  const auto b_full = problem_.counts_backprojection();

  switch (cfg_.scheme) {
    case Scheme::full_js: {
      const auto b_hat = full_estimate_backprojection();
      jensen_update(b_full, b_hat, lambda);
      break;
    }
    case Scheme::os_js: {
      const auto b_hat = subset_estimate_backprojection(k);
      jensen_update(partition_.subset_backprojection[k], b_hat, lambda / b_real);
      break;
    }
    case Scheme::sa_js:
    case Scheme::osa_js: {
      memory_->update(k, subset_estimate_backprojection(k));
      if (cfg_.check_memory && memory_->max_relative_drift() > 1e-9)
        throw AlgorithmError("average memory running sum drifted", state_.iteration);
      jensen_update(b_full, memory_->running_sum(), lambda);
      break;
    }
    case Scheme::full_gd: {
      const auto b_hat = full_estimate_backprojection();
      std::vector<double> g(b_hat.size());
      for (std::size_t j = 0; j < g.size(); ++j) g[j] = b_full[j] - b_hat[j];
      gradient_update(g, lambda, 1.0);
      break;
    }
    case Scheme::os_gd: {
      const auto b_hat = subset_estimate_backprojection(k);
      const auto& bk = partition_.subset_backprojection[k];
      std::vector<double> g(b_hat.size());
      for (std::size_t j = 0; j < g.size(); ++j) g[j] = bk[j] - b_hat[j];
      gradient_update(g, lambda / b_real, b_real);
      break;
    }
    case Scheme::sa_gd: {
      memory_->update(k, subset_estimate_backprojection(k));
      if (cfg_.check_memory && memory_->max_relative_drift() > 1e-9)
        throw AlgorithmError("average memory running sum drifted", state_.iteration);
      const auto s = memory_->running_sum();
      std::vector<double> g(s.size());
      for (std::size_t j = 0; j < g.size(); ++j) g[j] = b_full[j] - s[j];
      gradient_update(g, lambda, 1.0);
      break;
    }
  }
  state_.last_subset = k;
  ++state_.iteration;
}

void Reconstructor::jensen_update(std::span<const double> linear,
                                  std::span<const double> exp_coeff, double lambda_scale) {
  const std::size_t n = state_.x.size();
  const auto& x_hat = state_.x;
  const auto& nbhd = problem_.neighborhood();
  const double z = problem_.z();
  const double delta = cfg_.reg.delta;
  std::vector<double> x_new(n);
  // 0 ok, 1 max iters, 2 failure, 3..5 closed-form degeneracies
  std::vector<unsigned char> status(n, 0);

  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) {
      const DataSurrogateCoeffs coeffs{linear[j], exp_coeff[j], z};
      if (lambda_scale == 0.0) {
        const auto r = closed_form_update(coeffs, x_hat[j]);
        x_new[j] = r.value;
        status[j] = static_cast<unsigned char>(r.degeneracy == UpdateDegeneracy::none ? 0
                                               : 2 + static_cast<int>(r.degeneracy));
        continue;
      }
      const VoxelSurrogate psi{coeffs, x_hat[j],
                               make_reg_surrogate(nbhd, x_hat, j, delta, lambda_scale)};
      const auto r = minimize_1d(psi, x_hat[j], solver_);
      switch (r.status) {
        case Solver1DStatus::converged:
          x_new[j] = r.x;
          break;
        case Solver1DStatus::max_iters:
          x_new[j] = r.x;
          status[j] = 1;
          break;
        case Solver1DStatus::diverged:
        case Solver1DStatus::numerical_failure:
          x_new[j] = x_hat[j];
          status[j] = 2;
          break;
      }
    }
  });

  for (auto s : status) {
    switch (s) {
      case 1:
        ++diag_.solver_max_iters;
        break;
      case 2:
        ++diag_.solver_failures;
        break;
      case 3:
        ++diag_.degenerate_zero_estimate;
        break;
      case 4:
        ++diag_.degenerate_zero_counts;
        break;
      case 5:
        ++diag_.degenerate_empty;
        break;
      default:
        break;
    }
  }
  state_.x = std::move(x_new);
  state_.last_lambda_scale = lambda_scale;
  check_finite();
}

void Reconstructor::gradient_update(std::span<const double> data_gradient, double reg_scale,
                                    double gradient_scale) {
  const std::size_t n = state_.x.size();
  std::vector<double> reg_grad;
  if (reg_scale != 0.0)
    reg_grad = regularizer_gradient(state_.x, problem_.neighborhood(), cfg_.reg.delta);
  const double step = 1.0 / lipschitz_;
  auto& x = state_.x;
  for (std::size_t j = 0; j < n; ++j) {
    double g = data_gradient[j];
    if (reg_scale != 0.0) g += reg_scale * reg_grad[j];
    x[j] = std::max(0.0, x[j] - step * (gradient_scale * g));
  }
  state_.last_lambda_scale = reg_scale;
  check_finite();
}

void Reconstructor::check_finite() const {
  for (std::size_t j = 0; j < state_.x.size(); ++j)
    if (!std::isfinite(state_.x[j]))
      throw AlgorithmError(std::string(to_string(cfg_.scheme)) + ": non-finite value at voxel " +
                               std::to_string(j),
                           state_.iteration);
}

RunResult run(const Problem& problem, const AlgorithmConfig& cfg, const ProgressCallback& callback) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };

  Reconstructor rec(problem, cfg);
  RunResult result;
  auto emit = [&](double passes, bool with_objective) {
    ProgressRecord rec_out;
    rec_out.iteration = rec.state().iteration;
    rec_out.passes = passes;
    if (with_objective) rec_out.objective = problem.objective(rec.state().x, cfg.reg);
    rec_out.wall_seconds = elapsed();
    if (with_objective) result.history.push_back(rec_out);
    if (callback) callback(rec_out, rec.state().x);
  };

  emit(0.0, true);
  if (rec.state().init_passes > 0) emit(rec.state().passes(), true);
  const std::size_t b = rec.state().subsets;
  while (rec.state().passes() < cfg.max_passes - 1e-12) {
    rec.step();
    emit(rec.state().passes(), rec.state().iteration % b == 0);
  }
  result.x = rec.state().x;
  result.diagnostics = rec.diagnostics();
  result.lipschitz = rec.lipschitz();
  return result;
}

}  // namespace jsct
