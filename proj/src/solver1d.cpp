#include "jsct/solver1d.hpp"

#include <stdexcept>
#include <string>

namespace jsct {

std::string_view to_string(Solver1DMethod m) {
  switch (m) {
    case Solver1DMethod::newton:
      return "newton";
    case Solver1DMethod::trust_region:
      return "trust_region";
    case Solver1DMethod::fixed_trust_region:
      return "fixed_trust_region";
  }
  return "unknown";
}

Solver1DMethod parse_solver_method(std::string_view name) {
  if (name == "newton") return Solver1DMethod::newton;
  if (name == "trust_region") return Solver1DMethod::trust_region;
  if (name == "fixed_trust_region") return Solver1DMethod::fixed_trust_region;
  throw std::invalid_argument("unknown solver method '" + std::string(name) + "'");
}

std::string_view to_string(Solver1DStatus s) {
  switch (s) {
    case Solver1DStatus::converged:
      return "converged";
    case Solver1DStatus::max_iters:
      return "max_iters";
    case Solver1DStatus::diverged:
      return "diverged";
    case Solver1DStatus::numerical_failure:
      return "numerical_failure";
  }
  return "unknown";
}

void Solver1DConfig::validate() const {
  if (!(grad_tol > 0.0)) throw std::invalid_argument("solver: grad_tol must be > 0");
  if (!(step_tol > 0.0)) throw std::invalid_argument("solver: step_tol must be > 0");
  if (max_iters == 0) throw std::invalid_argument("solver: max_iters must be >= 1");
  if (!(tr_initial_radius >= 0.0) || !(tr_fixed_radius >= 0.0))
    throw std::invalid_argument("solver: trust-region radii must be >= 0 (0 selects 1/Z)");
  if (!(tr_eta > 0.0 && tr_eta < 1.0))
    throw std::invalid_argument("solver: tr_eta must lie in (0, 1)");
  if (!(tr_shrink > 0.0 && tr_shrink < 1.0 && tr_expand > 1.0))
    throw std::invalid_argument("solver: need 0 < tr_shrink < 1 < tr_expand");
}

Solver1DConfig Solver1DConfig::resolve_radii(double z) const {
  Solver1DConfig out = *this;
  if (out.tr_initial_radius == 0.0) out.tr_initial_radius = 1.0 / z;
  if (out.tr_fixed_radius == 0.0) out.tr_fixed_radius = 1.0 / z;
  return out;
}

double trust_region_step(double d1, double d2, double radius) {
  const double step = -d1 / std::max(d2, kCurvatureFloor);
  return std::clamp(step, -radius, radius);
}

}  // namespace jsct
