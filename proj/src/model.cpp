#include "jsct/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace jsct {

void PoissonData::validate(std::size_t ray_count) const {
  if (counts.size() != ray_count || incident.size() != ray_count)
    throw std::invalid_argument("PoissonData: expected " + std::to_string(ray_count) +
                                " rays, got counts=" + std::to_string(counts.size()) +
                                " incident=" + std::to_string(incident.size()));
  for (std::size_t i = 0; i < ray_count; ++i) {
    if (!(counts[i] >= 0.0) || !std::isfinite(counts[i]))
      throw std::invalid_argument("PoissonData: negative count at ray " + std::to_string(i));
    if (!(incident[i] > 0.0) || !std::isfinite(incident[i]))
      throw std::invalid_argument("PoissonData: nonpositive I0 at ray " + std::to_string(i));
  }
}

NeighborhoodSystem::NeighborhoodSystem(std::vector<std::vector<Neighbor>> lists) {
  const std::size_t n = lists.size();
  offsets_.reserve(n + 1);
  offsets_.push_back(0);
  for (std::size_t j = 0; j < n; ++j) {
    for (const auto& nb : lists[j]) {
      if (nb.index >= n)
        throw std::invalid_argument("neighborhood: index out of range at voxel " +
                                    std::to_string(j));
      if (nb.index == j)
        throw std::invalid_argument("neighborhood: self-neighbour at voxel " + std::to_string(j));
      if (!(nb.weight > 0.0) || !std::isfinite(nb.weight))
        throw std::invalid_argument("neighborhood: weight must be > 0 at voxel " +
                                    std::to_string(j));
      const auto& back = lists[nb.index];
      const auto it = std::find_if(back.begin(), back.end(),
                                   [&](const Neighbor& o) { return o.index == j; });
      if (it == back.end() || it->weight != nb.weight)
        throw std::invalid_argument("neighborhood: pair (" + std::to_string(j) + ", " +
                                    std::to_string(nb.index) + ") is not symmetric");
      neighbors_.push_back(nb);
      max_weight_ = std::max(max_weight_, nb.weight);
    }
    offsets_.push_back(neighbors_.size());
  }
}

namespace {

NeighborhoodSystem grid_neighborhood(std::size_t rows, std::size_t cols, std::size_t slices,
                                     bool diagonals) {
  if (rows == 0 || cols == 0 || slices == 0)
    throw std::invalid_argument("neighborhood: grid dimensions must be >= 1");
  const double diag = 1.0 / std::sqrt(2.0);
  std::vector<std::vector<NeighborhoodSystem::Neighbor>> lists(rows * cols * slices);
  auto idx = [&](std::size_t s, std::size_t r, std::size_t c) {
    return static_cast<std::uint32_t>((s * rows + r) * cols + c);
  };
  for (std::size_t s = 0; s < slices; ++s)
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        auto& out = lists[idx(s, r, c)];
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            const bool is_diag = dr != 0 && dc != 0;
            if (is_diag && !diagonals) continue;
            const long long rr = static_cast<long long>(r) + dr;
            const long long cc = static_cast<long long>(c) + dc;
            if (rr < 0 || cc < 0 || rr >= static_cast<long long>(rows) ||
                cc >= static_cast<long long>(cols))
              continue;
            out.push_back({idx(s, static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)),
                           is_diag ? diag : 1.0});
          }
        if (s > 0) out.push_back({idx(s - 1, r, c), 1.0});
        if (s + 1 < slices) out.push_back({idx(s + 1, r, c), 1.0});
      }
  return NeighborhoodSystem(std::move(lists));
}

}  // namespace

NeighborhoodSystem NeighborhoodSystem::four_connected(std::size_t rows, std::size_t cols,
                                                      std::size_t slices) {
  return grid_neighborhood(rows, cols, slices, false);
}

NeighborhoodSystem NeighborhoodSystem::eight_connected(std::size_t rows, std::size_t cols,
                                                       std::size_t slices) {
  return grid_neighborhood(rows, cols, slices, true);
}

void RegularizerParams::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("regularizer: lambda must be >= 0");
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw std::invalid_argument("regularizer: delta must be > 0");
}

double datafit_term(double l, double d, double i0) { return d * l + i0 * std::exp(-l); }

double huber_log(double t, double weight, double delta) {
  const double u = std::abs(t / delta);
  return weight * delta * delta * (u - std::log1p(u));
}

double huber_log_derivative(double t, double weight, double delta) {
  return weight * t / (1.0 + std::abs(t / delta));
}

double huber_log_curvature(double t, double weight, double delta) {
  const double g = 1.0 + std::abs(t / delta);
  return weight / (g * g);
}

double regularizer_value(std::span<const double> x, const NeighborhoodSystem& nbhd,
                         double delta) {
  if (x.size() != nbhd.size())
    throw std::invalid_argument("regularizer: image length does not match neighborhood");
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j)
    for (const auto& nb : nbhd.neighbors(j)) s += huber_log(x[j] - x[nb.index], nb.weight, delta);
  return s;
}

std::vector<double> regularizer_gradient(std::span<const double> x,
                                         const NeighborhoodSystem& nbhd, double delta) {
  if (x.size() != nbhd.size())
    throw std::invalid_argument("regularizer: image length does not match neighborhood");
  std::vector<double> g(x.size(), 0.0);
  for (std::size_t j = 0; j < x.size(); ++j) {
    double s = 0.0;
    for (const auto& nb : nbhd.neighbors(j))
      s += 2.0 * huber_log_derivative(x[j] - x[nb.index], nb.weight, delta);
    g[j] = s;
  }
  return g;
}

double datafit_value(std::span<const double> line_integrals, const PoissonData& data) {
  double s = 0.0;
  for (std::size_t i = 0; i < line_integrals.size(); ++i)
    s += datafit_term(line_integrals[i], data.counts[i], data.incident[i]);
  return s;
}

namespace {

void check_problem(std::span<const double> x, const SparseSystemMatrix& H,
                   const PoissonData& data, const NeighborhoodSystem& nbhd) {
  if (x.size() != H.cols())
    throw std::invalid_argument("image length does not match system matrix columns");
  if (nbhd.size() != H.cols())
    throw std::invalid_argument("neighborhood size does not match system matrix columns");
  if (data.counts.size() != H.rows() || data.incident.size() != H.rows())
    throw std::invalid_argument("data length does not match system matrix rows");
}

}  // namespace

double objective(std::span<const double> x, const SparseSystemMatrix& H,
                 const PoissonData& data, const NeighborhoodSystem& nbhd,
                 const RegularizerParams& reg) {
  check_problem(x, H, data, nbhd);
  for (std::size_t j = 0; j < x.size(); ++j)
    if (x[j] < 0.0) throw std::invalid_argument("objective: negative voxel " + std::to_string(j));
  const auto l = forward_project(H, x);
  double phi = datafit_value(l, data);
  if (reg.lambda != 0.0) phi += reg.lambda * regularizer_value(x, nbhd, reg.delta);
  return phi;
}

std::vector<double> gradient(std::span<const double> x, const SparseSystemMatrix& H,
                             const PoissonData& data, const NeighborhoodSystem& nbhd,
                             const RegularizerParams& reg) {
  check_problem(x, H, data, nbhd);
  const auto l = forward_project(H, x);
  std::vector<double> resid(l.size());
  for (std::size_t i = 0; i < l.size(); ++i)
    resid[i] = data.counts[i] - data.incident[i] * std::exp(-l[i]);
  auto g = back_project(H, resid);
  if (reg.lambda != 0.0) {
    const auto gb = regularizer_gradient(x, nbhd, reg.delta);
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += reg.lambda * gb[j];
  }
  return g;
}

std::vector<double> apply_difference_normal(std::span<const double> v,
                                            const NeighborhoodSystem& nbhd) {
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t j = 0; j < v.size(); ++j) {
    double s = 0.0;
    for (const auto& nb : nbhd.neighbors(j)) s += 2.0 * (v[j] - v[nb.index]);
    out[j] = s;
  }
  return out;
}

LipschitzEstimate lipschitz_constant(const SparseSystemMatrix& H, const PoissonData& data,
                                     const NeighborhoodSystem& nbhd,
                                     const RegularizerParams& reg,
                                     const PowerIterationOptions& options) {
  if (H.nonzeros() == 0) throw std::invalid_argument("lipschitz_constant: empty system matrix");
  if (nbhd.size() != H.cols())
    throw std::invalid_argument("lipschitz_constant: neighborhood size mismatch");
  const double i0_max = *std::max_element(data.incident.begin(), data.incident.end());
  const double lambda_eff = reg.lambda * nbhd.max_weight();
  const std::size_t n = H.cols();

  auto apply = [&](const std::vector<double>& v) {
    const auto hv = forward_project(H, v);
    auto out = back_project(H, hv);
    for (auto& o : out) o *= i0_max;
    if (lambda_eff != 0.0) {
      const auto cv = apply_difference_normal(v, nbhd);
      for (std::size_t j = 0; j < n; ++j) out[j] += lambda_eff * cv[j];
    }
    return out;
  };
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  };

  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  auto av = apply(v);
  LipschitzEstimate est;
  est.value = dot(v, av);
  for (std::size_t it = 1; it <= options.max_iters; ++it) {
    const double norm = std::sqrt(dot(av, av));
    if (!(norm > 0.0)) {
      est.iterations = it;
      est.converged = true;
      return est;
    }
    for (std::size_t j = 0; j < n; ++j) v[j] = av[j] / norm;
    av = apply(v);
    const double rq = dot(v, av);
    const bool done = std::abs(rq - est.value) <= options.tol * std::abs(rq);
    est.value = rq;
    est.iterations = it;
    if (done) {
      est.converged = true;
      break;
    }
  }
  return est;
}

}  // namespace jsct
