#pragma once

// Small random instances and dense oracles shared by the test programs.

#include <Eigen/Dense>
#include <quadmath.h>
#include <cstdint>
#include <vector>

#include "jsct/model.hpp"
#include "jsct/projector.hpp"
#include "jsct/random.hpp"
#include "jsct/simulate.hpp"

namespace testing {

inline double uniform(jsct::Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * jsct::uniform01(rng);
}

inline std::vector<double> random_vector(jsct::Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform(rng, lo, hi);
  return v;
}

/// Random sparse matrix; every row gets at least one entry.
inline jsct::SparseSystemMatrix random_matrix(jsct::Rng& rng, std::size_t m, std::size_t n,
                                              double density) {
  std::vector<std::vector<jsct::SparseSystemMatrix::Entry>> rows(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      if (jsct::uniform01(rng) < density)
        rows[i].push_back({static_cast<std::uint32_t>(j), uniform(rng, 0.1, 2.0)});
    if (rows[i].empty())
      rows[i].push_back({static_cast<std::uint32_t>(jsct::uniform_index(rng, n)), 1.0});
  }
  return jsct::SparseSystemMatrix(n, std::move(rows));
}

inline Eigen::MatrixXd dense(const jsct::SparseSystemMatrix& H) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(H.rows()),
                                            static_cast<Eigen::Index>(H.cols()));
  for (std::size_t i = 0; i < H.rows(); ++i)
    for (const auto& e : H.row(i)) D(static_cast<Eigen::Index>(i), e.index) = e.length;
  return D;
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Small tomography instance with noisy counts from a random smooth image.
struct SmallProblem {
  jsct::Geometry geom;
  jsct::SparseSystemMatrix H;
  jsct::PoissonData data;
  jsct::NeighborhoodSystem nbhd;
  std::vector<double> x_true;
};

inline SmallProblem small_problem(std::size_t rows, std::size_t cols, std::size_t views,
                                  std::size_t dets, std::uint64_t seed, double i0 = 1e4) {
  SmallProblem p;
  p.geom = {rows, cols, 1.0, views, dets, 1.0};
  p.H = jsct::build_system_matrix(p.geom);
  jsct::Rng rng(seed);
  p.x_true = random_vector(rng, rows * cols, 0.01, 0.1);
  const double inc[] = {i0};
  p.data = jsct::simulate_counts(p.H, p.x_true, inc, seed + 1, false).data;
  p.nbhd = jsct::NeighborhoodSystem::four_connected(rows, cols);
  return p;
}


/// Central difference of the objective along e_j with step h = rel_step * x_j,
/// evaluated in quad precision so that cancellation in the large data term
/// does not swamp the difference.
inline double fd_gradient_component(const std::vector<double>& x, std::size_t j,
                                    const jsct::SparseSystemMatrix& H,
                                    const jsct::PoissonData& data,
                                    const jsct::NeighborhoodSystem& nbhd,
                                    const jsct::RegularizerParams& reg, double rel_step = 1e-6) {
  using Q = __float128;
  const Q h = static_cast<Q>(rel_step) * static_cast<Q>(x[j]);
  auto phi = [&](Q shift) {
    auto xv = [&](std::size_t k) { return static_cast<Q>(x[k]) + (k == j ? shift : Q(0)); };
    Q total = 0;
    for (std::size_t i = 0; i < H.rows(); ++i) {
      Q l = 0;
      for (const auto& e : H.row(i)) l += static_cast<Q>(e.length) * xv(e.index);
      total += static_cast<Q>(data.counts[i]) * l + static_cast<Q>(data.incident[i]) * expq(-l);
    }
    const Q d = static_cast<Q>(reg.delta);
    for (std::size_t k = 0; k < nbhd.size(); ++k)
      for (const auto& nb : nbhd.neighbors(k)) {
        const Q u = fabsq((xv(k) - xv(nb.index)) / d);
        total += static_cast<Q>(reg.lambda) * static_cast<Q>(nb.weight) * d * d * (u - log1pq(u));
      }
    return total;
  };
  return static_cast<double>((phi(h) - phi(-h)) / (2 * h));
}

}  // namespace testing
