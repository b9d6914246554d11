#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string_view>

namespace jsct {

enum class Solver1DMethod { newton, trust_region, fixed_trust_region };

std::string_view to_string(Solver1DMethod m);
Solver1DMethod parse_solver_method(std::string_view name);

/// Radii of 0 mean "use 1/Z", filled in by resolve_radii() once Z is known.
struct Solver1DConfig {
  Solver1DMethod method = Solver1DMethod::fixed_trust_region;
  double grad_tol = 1e-9;  // relative to 1 + |psi'(x0)|
  double step_tol = 1e-12;  // projected Newton step, relative to 1 + |x|
  std::size_t max_iters = 50;
  double tr_initial_radius = 0.0;
  double tr_fixed_radius = 0.0;
  double tr_eta = 0.1;
  double tr_expand = 2.0;
  double tr_shrink = 0.25;

  void validate() const;
  Solver1DConfig resolve_radii(double z) const;
};

enum class Solver1DStatus { converged, max_iters, diverged, numerical_failure };

std::string_view to_string(Solver1DStatus s);

struct Solver1DResult {
  double x = 0.0;
  std::size_t iterations = 0;
  Solver1DStatus status = Solver1DStatus::converged;
};

struct Derivatives {
  double d1 = 0.0;
  double d2 = 0.0;
};

/// A one-dimensional convex function on [0, inf): value() and derivatives()
/// (first and second together) are queried separately so callers can count
/// evaluations.
template <class F>
concept ScalarObjective = requires(const F& f, double x) {
  { f.value(x) } -> std::convertible_to<double>;
  { f.derivatives(x) } -> std::same_as<Derivatives>;
};

inline constexpr double kCurvatureFloor = 1e-14;

/// Newton step -d1/max(d2, floor) clamped to [-radius, radius].
double trust_region_step(double d1, double d2, double radius);

namespace detail {

inline double projected_gradient(double x, double d1) {
  return x <= 0.0 ? std::min(d1, 0.0) : d1;
}

inline bool negligible_step(double step, double x) {
  return std::abs(step) <= 1e-15 * (1.0 + std::abs(x));
}

// A small gradient alone can leave x far off when the curvature is small,
// so the projected Newton step must be small too.
inline bool stationary(double x, const Derivatives& d, double tol, double step_tol) {
  if (std::abs(projected_gradient(x, d.d1)) > tol) return false;
  const double x_newton = std::max(0.0, x - d.d1 / std::max(d.d2, kCurvatureFloor));
  return std::abs(x_newton - x) <= step_tol * (1.0 + std::abs(x));
}

template <ScalarObjective F>
Solver1DResult newton(const F& psi, double x0, const Solver1DConfig& cfg) {
  double x = x0;
  double fx = psi.value(x);
  auto d = psi.derivatives(x);
  const double tol = cfg.grad_tol * (1.0 + std::abs(d.d1));
  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    if (!std::isfinite(d.d1) || !std::isfinite(d.d2) || !std::isfinite(fx))
      return {x0, it, Solver1DStatus::numerical_failure};
    if (stationary(x, d, tol, cfg.step_tol)) return {x, it, Solver1DStatus::converged};
    const double x_new = std::max(0.0, x - d.d1 / std::max(d.d2, kCurvatureFloor));
    if (negligible_step(x_new - x, x)) return {x, it + 1, Solver1DStatus::converged};
    const double f_new = psi.value(x_new);
    if (!(f_new <= fx + 1e-13 * (1.0 + std::abs(fx))))
      return {x, it + 1, Solver1DStatus::diverged};
    x = x_new;
    fx = f_new;
    d = psi.derivatives(x);
  }
  return {x, cfg.max_iters, Solver1DStatus::max_iters};
}

template <ScalarObjective F>
Solver1DResult trust_region(const F& psi, double x0, const Solver1DConfig& cfg) {
  double x = x0;
  double fx = psi.value(x);
  double radius = cfg.tr_initial_radius;
  auto d = psi.derivatives(x);
  const double tol = cfg.grad_tol * (1.0 + std::abs(d.d1));
  bool fresh = true;
  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    if (fresh && (!std::isfinite(d.d1) || !std::isfinite(d.d2) || !std::isfinite(fx)))
      return {x0, it, Solver1DStatus::numerical_failure};
    if (stationary(x, d, tol, cfg.step_tol)) return {x, it, Solver1DStatus::converged};
    const double x_new = std::max(0.0, x + trust_region_step(d.d1, d.d2, radius));
    const double step = x_new - x;
    if (negligible_step(step, x)) return {x, it + 1, Solver1DStatus::converged};
    const double predicted = -(d.d1 * step + 0.5 * d.d2 * step * step);
    const double f_new = psi.value(x_new);
    const double actual = fx - f_new;
    double rho = predicted > 0.0 && std::isfinite(f_new) ? actual / predicted : -1.0;
    // Reductions below the rounding level of f make rho noise; trust the model.
    if (predicted > 0.0 && std::isfinite(f_new) &&
        predicted <= 1e-13 * (1.0 + std::abs(fx)))
      rho = 1.0;
    if (rho < 0.25)
      radius *= cfg.tr_shrink;
    else if (rho > 0.75 && std::abs(step) >= radius * (1.0 - 1e-12))
      radius *= cfg.tr_expand;
    fresh = rho > cfg.tr_eta;
    if (fresh) {
      x = x_new;
      fx = f_new;
      d = psi.derivatives(x);
    }
  }
  return {x, cfg.max_iters, Solver1DStatus::max_iters};
}

// Fixed radius plus a sign bracket: psi' > 0 puts the minimizer to the
// left of x, psi' < 0 to the right. Steps leaving the bracket fall back to
// bisection. One derivative evaluation per iteration, no function values.
template <ScalarObjective F>
Solver1DResult fixed_trust_region(const F& psi, double x0, const Solver1DConfig& cfg) {
  const double radius = cfg.tr_fixed_radius;
  double lo = 0.0;
  bool lo_seen = false;
  double hi = std::numeric_limits<double>::infinity();
  double x = x0;
  double tol = 0.0;
  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    const auto d = psi.derivatives(x);
    if (!std::isfinite(d.d1) || !std::isfinite(d.d2))
      return {x0, it + 1, Solver1DStatus::numerical_failure};
    if (it == 0) tol = cfg.grad_tol * (1.0 + std::abs(d.d1));
    if (stationary(x, d, tol, cfg.step_tol)) return {x, it + 1, Solver1DStatus::converged};
    if (d.d1 > 0.0) {
      hi = x;
    } else {
      lo = x;
      lo_seen = true;
    }
    double x_new = x + trust_region_step(d.d1, d.d2, radius);
    if (x_new >= hi || (lo_seen && x_new <= lo))
      x_new = 0.5 * (lo + hi);
    else if (x_new < 0.0)
      x_new = 0.0;
    if (negligible_step(x_new - x, x)) return {x, it + 1, Solver1DStatus::converged};
    x = x_new;
  }
  // Without convergence there is no descent guarantee; keep the better point.
  if (psi.value(x) > psi.value(x0)) x = x0;
  return {x, cfg.max_iters, Solver1DStatus::max_iters};
}

}  // namespace detail

/// Minimizes a convex psi over x >= 0 starting from x0 >= 0. Iterates are
/// projected onto [0, inf). Converged when the projected gradient
/// (min(psi', 0) at x = 0) is within grad_tol (1 + |psi'(x0)|) and the
/// projected Newton step within step_tol (1 + |x|), or when the step
/// underflows relative to x. On numerical failure x0 is returned.
/// Trust-region radii must be resolved (nonzero).
template <ScalarObjective F>
Solver1DResult minimize_1d(const F& psi, double x0, const Solver1DConfig& cfg) {
  x0 = std::max(0.0, x0);
  if ((cfg.method == Solver1DMethod::trust_region && !(cfg.tr_initial_radius > 0.0)) ||
      (cfg.method == Solver1DMethod::fixed_trust_region && !(cfg.tr_fixed_radius > 0.0)))
    throw std::invalid_argument("minimize_1d: trust-region radius unset; call resolve_radii()");
  switch (cfg.method) {
    case Solver1DMethod::newton:
      return detail::newton(psi, x0, cfg);
    case Solver1DMethod::trust_region:
      return detail::trust_region(psi, x0, cfg);
    case Solver1DMethod::fixed_trust_region:
      return detail::fixed_trust_region(psi, x0, cfg);
  }
  return {x0, 0, Solver1DStatus::numerical_failure};
}

}  // namespace jsct
