#include "jsct/surrogates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jsct {

SurrogateValue data_surrogate_eval(const DataSurrogateCoeffs& c, double x, double x_hat) {
  const double dx = x - x_hat;
  const double e = std::exp(-c.z * dx);
  return {c.b * dx + (c.b_hat / c.z) * e, c.b - c.b_hat * e, c.z * c.b_hat * e};
}

SurrogateValue reg_surrogate_eval(const RegSurrogate1D& rs, double x) {
  SurrogateValue out;
  const double half_d2 = 0.5 * rs.delta * rs.delta;
  for (const auto& nb : rs.neighbors) {
    const double u = (2.0 * x - rs.x_hat - rs.expansion[nb.index]) / rs.delta;
    const double a = std::abs(u);
    const double g = 1.0 + a;
    out.value += nb.weight * half_d2 * (a - std::log1p(a));
    out.d1 += nb.weight * rs.delta * u / g;
    out.d2 += 2.0 * nb.weight / (g * g);
  }
  const double scale = rs.lambda_scale * rs.pair_rows;
  out.value *= scale;
  out.d1 *= scale;
  out.d2 *= scale;
  return out;
}

Derivatives reg_surrogate_derivatives(const RegSurrogate1D& rs, double x) {
  Derivatives out;
  for (const auto& nb : rs.neighbors) {
    const double u = (2.0 * x - rs.x_hat - rs.expansion[nb.index]) / rs.delta;
    const double g = 1.0 + std::abs(u);
    out.d1 += nb.weight * rs.delta * u / g;
    out.d2 += 2.0 * nb.weight / (g * g);
  }
  const double scale = rs.lambda_scale * rs.pair_rows;
  out.d1 *= scale;
  out.d2 *= scale;
  return out;
}

double VoxelSurrogate::value(double x) const {
  double v = data_surrogate_eval(data, x, x_hat).value;
  if (reg.lambda_scale != 0.0) v += reg_surrogate_eval(reg, x).value;
  return v;
}

Derivatives VoxelSurrogate::derivatives(double x) const {
  const double e = std::exp(-data.z * (x - x_hat));
  Derivatives d{data.b - data.b_hat * e, data.z * data.b_hat * e};
  if (reg.lambda_scale != 0.0) {
    const auto r = reg_surrogate_derivatives(reg, x);
    d.d1 += r.d1;
    d.d2 += r.d2;
  }
  return d;
}

RegSurrogate1D make_reg_surrogate(const NeighborhoodSystem& nbhd,
                                  std::span<const double> x_hat, std::size_t j,
                                  double delta, double lambda_scale) {
  return {x_hat[j], nbhd.neighbors(j), x_hat, delta, lambda_scale, 2.0};
}

ClosedFormResult closed_form_update(const DataSurrogateCoeffs& c, double x_hat) {
  if (c.b > 0.0 && c.b_hat > 0.0)
    return {std::max(0.0, x_hat - (std::log(c.b) - std::log(c.b_hat)) / c.z),
            UpdateDegeneracy::none};
  if (c.b_hat <= 0.0 && c.b > 0.0) return {0.0, UpdateDegeneracy::zero_estimate};
  if (c.b <= 0.0 && c.b_hat > 0.0)
    return {std::max(0.0, x_hat + (std::log(c.b_hat) - std::log(kCountFloor)) / c.z),
            UpdateDegeneracy::zero_counts};
  return {x_hat, UpdateDegeneracy::empty};
}

bool jensen_weights_valid(const SparseSystemMatrix& H, double z) {
  for (std::size_t i = 0; i < H.rows(); ++i) {
    double s = 0.0;
    for (const auto& e : H.row(i)) s += e.length / z;
    if (s > 1.0 + 1e-12) return false;
  }
  return true;
}

double data_surrogate_total(std::span<const double> b, std::span<const double> b_hat,
                            double z, std::span<const double> x,
                            std::span<const double> x_hat) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j)
    s += data_surrogate_eval({b[j], b_hat[j], z}, x[j], x_hat[j]).value;
  return s;
}

double reg_surrogate_total(const NeighborhoodSystem& nbhd, std::span<const double> x,
                           std::span<const double> x_hat, double delta) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j)
    s += reg_surrogate_eval(make_reg_surrogate(nbhd, x_hat, j, delta, 1.0), x[j]).value;
  return s;
}

MajorizationReport surrogate_majorization_check(std::span<const double> x,
                                                std::span<const double> x_hat,
                                                const SparseSystemMatrix& H,
                                                const PoissonData& data,
                                                const NeighborhoodSystem& nbhd, double delta) {
  if (x.size() != H.cols() || x_hat.size() != H.cols())
    throw std::invalid_argument("majorization check: image length mismatch");
  const double z = compute_z(H);
  const auto b = back_project(H, data.counts);
  const auto l_hat = forward_project(H, x_hat);
  std::vector<double> q_hat(l_hat.size()), resid(l_hat.size());
  for (std::size_t i = 0; i < l_hat.size(); ++i) {
    q_hat[i] = data.incident[i] * std::exp(-l_hat[i]);
    resid[i] = data.counts[i] - q_hat[i];
  }
  const auto b_hat = back_project(H, q_hat);
  const auto grad_f = back_project(H, resid);

  MajorizationReport rep;

  const double f_x = datafit_value(forward_project(H, x), data);
  const double f_hat = datafit_value(l_hat, data);
  double dg = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double dx = x[j] - x_hat[j];
    dg += b[j] * dx + (b_hat[j] / z) * std::expm1(-z * dx);
  }
  rep.data_gap = dg - (f_x - f_hat);
  rep.data_tolerance = 1e-9 * (1.0 + std::abs(f_x));
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double g_sur = data_surrogate_eval({b[j], b_hat[j], z}, x_hat[j], x_hat[j]).d1;
    const double scale = std::abs(b[j]) + std::abs(b_hat[j]);
    if (scale > 0.0)
      rep.data_tangency_error =
          std::max(rep.data_tangency_error, std::abs(g_sur - grad_f[j]) / scale);
  }

  const double beta_x = regularizer_value(x, nbhd, delta);
  const double beta_hat = regularizer_value(x_hat, nbhd, delta);
  const double dB = reg_surrogate_total(nbhd, x, x_hat, delta) -
                    reg_surrogate_total(nbhd, x_hat, x_hat, delta);
  rep.reg_gap = dB - (beta_x - beta_hat);
  rep.reg_tolerance = 1e-9 * (1.0 + std::abs(beta_x));
  const auto grad_beta = regularizer_gradient(x_hat, nbhd, delta);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double g_sur =
        reg_surrogate_eval(make_reg_surrogate(nbhd, x_hat, j, delta, 1.0), x_hat[j]).d1;
    double scale = 0.0;
    for (const auto& nb : nbhd.neighbors(j))
      scale += 2.0 * std::abs(huber_log_derivative(x_hat[j] - x_hat[nb.index], nb.weight, delta));
    if (scale > 0.0)
      rep.reg_tangency_error =
          std::max(rep.reg_tangency_error, std::abs(g_sur - grad_beta[j]) / scale);
  }
  return rep;
}

}  // namespace jsct
