#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "jsct/model.hpp"
#include "support.hpp"

using namespace jsct;

namespace {

// Definition-level objective on dense matrices, unordered pairs counted twice.
double dense_objective(const Eigen::MatrixXd& H, const std::vector<double>& x,
                       const PoissonData& data, const NeighborhoodSystem& nbhd, double lambda,
                       double delta) {
  const Eigen::VectorXd l = H * testing::to_eigen(x);
  double phi = 0.0;
  for (Eigen::Index i = 0; i < l.size(); ++i)
    phi += data.counts[i] * l(i) + data.incident[i] * std::exp(-l(i));
  double beta = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j)
    for (const auto& nb : nbhd.neighbors(j))
      if (nb.index > j) {
        const double u = std::abs(x[j] - x[nb.index]) / delta;
        beta += 2.0 * nb.weight * delta * delta * (u - std::log(1.0 + u));
      }
  return phi + lambda * beta;
}

Eigen::MatrixXd dense_difference_normal(const NeighborhoodSystem& nbhd) {
  const auto n = static_cast<Eigen::Index>(nbhd.size());
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (const auto& nb : nbhd.neighbors(static_cast<std::size_t>(j))) {
      C(j, j) += 2.0;
      C(j, nb.index) -= 2.0;
    }
  return C;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("scalar terms") {
    CHECK(datafit_term(0.0, 2.0, 3.0) == 3.0);
    CHECK(datafit_term(1.0, 1.0, 1.0) == doctest::Approx(1.3678794411714423).epsilon(1e-15));
    const double d = 4.0, i0 = 50.0, ls = std::log(i0 / d);
    CHECK(std::abs(d - i0 * std::exp(-ls)) < 1e-12);
    CHECK(huber_log(0.0, 1.0, 1.0) == 0.0);
    CHECK(huber_log(1.0, 1.0, 1.0) == doctest::Approx(0.30685281944005469).epsilon(1e-15));
    Rng rng(1);
    for (int k = 0; k < 1000; ++k) {
      const double t = testing::uniform(rng, -5.0, 5.0), w = testing::uniform(rng, 0.1, 3.0);
      const double delta = testing::uniform(rng, 0.01, 2.0);
      CHECK(huber_log(t, w, delta) == huber_log(-t, w, delta));
      CHECK(huber_log(t, w, delta) >= 0.0);
      CHECK(huber_log(t, w, delta) <= 0.5 * w * t * t * (1.0 + 1e-12));
      const double h = 1e-6;
      const double fd = (huber_log(t + h, w, delta) - huber_log(t - h, w, delta)) / (2 * h);
      CHECK(std::abs(fd - huber_log_derivative(t, w, delta)) <= 1e-6 * (1.0 + std::abs(fd)));
      const double fd2 =
          (huber_log_derivative(t + h, w, delta) - huber_log_derivative(t - h, w, delta)) / (2 * h);
      CHECK(std::abs(fd2 - huber_log_curvature(t, w, delta)) <= 1e-5 * (1.0 + std::abs(fd2)));
      CHECK(huber_log_curvature(t, w, delta) <= w);
    }
  }

  TEST_CASE("neighborhood validation and structure") {
    using N = NeighborhoodSystem::Neighbor;
    CHECK_THROWS_AS(NeighborhoodSystem({{N{1, 1.0}}, {}}), std::invalid_argument);
    CHECK_THROWS_AS(NeighborhoodSystem({{N{1, 1.0}}, {N{0, 2.0}}}), std::invalid_argument);
    CHECK_THROWS_AS(NeighborhoodSystem({{N{0, 1.0}}}), std::invalid_argument);
    CHECK_THROWS_AS(NeighborhoodSystem({{N{1, 0.0}}, {N{0, 0.0}}}), std::invalid_argument);
    const auto four = NeighborhoodSystem::four_connected(3, 4);
    CHECK(four.directed_pair_count() == 2 * (3 * 3 + 2 * 4));
    CHECK(four.max_weight() == 1.0);
    const auto eight = NeighborhoodSystem::eight_connected(3, 4);
    CHECK(eight.directed_pair_count() == 2 * (3 * 3 + 2 * 4 + 2 * 2 * 3));
    CHECK(eight.max_weight() == 1.0);
    const auto vol = NeighborhoodSystem::four_connected(2, 2, 3);
    CHECK(vol.directed_pair_count() == 2 * (3 * 4 + 2 * 4));
  }

  TEST_CASE("objective against dense definition") {
    const auto p = testing::small_problem(4, 3, 5, 6, 7);
    const Eigen::MatrixXd D = testing::dense(p.H);
    Rng rng(8);
    for (double lambda : {0.0, 3.0}) {
      const RegularizerParams reg{lambda, 0.01};
      const auto x = testing::random_vector(rng, 12, 0.0, 0.2);
      const double ref = dense_objective(D, x, p.data, p.nbhd, lambda, 0.01);
      CHECK(std::abs(objective(x, p.H, p.data, p.nbhd, reg) - ref) <= 1e-10 * std::abs(ref));
    }
    const std::vector<double> zero(12, 0.0);
    const double sum_i0 = std::accumulate(p.data.incident.begin(), p.data.incident.end(), 0.0);
    CHECK(objective(zero, p.H, p.data, p.nbhd, {}) == doctest::Approx(sum_i0).epsilon(1e-14));
    const std::vector<double> flat(12, 0.05);
    CHECK(objective(flat, p.H, p.data, p.nbhd, {7.0, 0.01}) ==
          objective(flat, p.H, p.data, p.nbhd, {0.0, 0.01}));
    auto neg = flat;
    neg[3] = -1e-3;
    CHECK_THROWS_AS(objective(neg, p.H, p.data, p.nbhd, {}), std::invalid_argument);
    const std::vector<double> short_x(11, 0.0);
    CHECK_THROWS_AS(objective(short_x, p.H, p.data, p.nbhd, {}), std::invalid_argument);
  }

  TEST_CASE("regularizer counts each pair in both directions") {
    const auto nbhd = NeighborhoodSystem::eight_connected(4, 5);
    Rng rng(4);
    const auto x = testing::random_vector(rng, 20, 0.0, 0.1);
    double unordered = 0.0;
    for (std::size_t j = 0; j < 20; ++j)
      for (const auto& nb : nbhd.neighbors(j))
        if (nb.index > j) unordered += huber_log(x[j] - x[nb.index], nb.weight, 0.01);
    CHECK(regularizer_value(x, nbhd, 0.01) == doctest::Approx(2.0 * unordered).epsilon(1e-13));
  }

  TEST_CASE("gradient stationarity cases") {
    // Diagonal H with M = N: optimum at l_i = ln(I0 / d).
    std::vector<std::vector<SparseSystemMatrix::Entry>> rows;
    PoissonData data;
    std::vector<double> x_opt;
    for (std::uint32_t j = 0; j < 5; ++j) {
      const double h = 0.5 + j;
      rows.push_back({{j, h}});
      data.counts.push_back(100.0 + 10.0 * j);
      data.incident.push_back(1000.0);
      x_opt.push_back(std::log(1000.0 / data.counts.back()) / h);
    }
    const SparseSystemMatrix H(5, std::move(rows));
    const auto nbhd = NeighborhoodSystem::four_connected(1, 5);
    for (double g : gradient(x_opt, H, data, nbhd, {})) CHECK(std::abs(g) < 1e-10);

    PoissonData consistent{{1000.0, 1000.0, 1000.0, 1000.0, 1000.0}, data.incident};
    const std::vector<double> zero(5, 0.0);
    for (double g : gradient(zero, H, consistent, nbhd, {})) CHECK(g == 0.0);
  }

  TEST_CASE("gradient matches central differences") {
    const auto p = testing::small_problem(8, 6, 10, 10, 31, 1e3);
    Rng rng(32);
    for (double lambda : {0.0, 50.0}) {
      const RegularizerParams reg{lambda, 1e-3};
      for (int trial = 0; trial < 5; ++trial) {
        const auto x = testing::random_vector(rng, 48, 0.01, 0.1);
        const auto g = gradient(x, p.H, p.data, p.nbhd, reg);
        for (std::size_t j = 0; j < x.size(); ++j) {
          const double fd = testing::fd_gradient_component(x, j, p.H, p.data, p.nbhd, reg);
          CHECK(std::abs(fd - g[j]) <= 1e-5 * std::abs(g[j]));
        }
      }
    }
  }

  TEST_CASE("difference normal operator") {
    const auto four = NeighborhoodSystem::four_connected(3, 3);
    Rng rng(2);
    const auto v = testing::random_vector(rng, 9, -1.0, 1.0);
    const Eigen::VectorXd ref = dense_difference_normal(four) * testing::to_eigen(v);
    const auto got = apply_difference_normal(v, four);
    for (Eigen::Index j = 0; j < 9; ++j) CHECK(got[j] == doctest::Approx(ref(j)).epsilon(1e-14));
  }

  TEST_CASE("Lipschitz constant") {
    std::vector<std::vector<SparseSystemMatrix::Entry>> id;
    for (std::uint32_t j = 0; j < 4; ++j) id.push_back({{j, 1.0}});
    const SparseSystemMatrix I(4, std::move(id));
    PoissonData unit{{1, 1, 1, 1}, {1, 1, 1, 1}};
    const auto nb4 = NeighborhoodSystem::four_connected(2, 2);
    auto est = lipschitz_constant(I, unit, nb4, {});
    CHECK(est.converged);
    CHECK(est.value == doctest::Approx(1.0).epsilon(1e-12));

    const SparseSystemMatrix r(4, {{{0, 1.0}, {2, 2.0}, {3, 0.5}}});
    PoissonData one{{1.0}, {7.0}};
    est = lipschitz_constant(r, one, nb4, {});
    CHECK(est.value == doctest::Approx(7.0 * (1.0 + 4.0 + 0.25)).epsilon(1e-6));

    CHECK_THROWS_AS(lipschitz_constant(SparseSystemMatrix(4, {{}}), one, nb4, {}),
                    std::invalid_argument);
  }

  TEST_CASE("Lipschitz constant against dense eigensolver") {
    Rng rng(40);
    const auto H = testing::random_matrix(rng, 10, 8, 0.5);
    PoissonData data{testing::random_vector(rng, 10, 0.0, 50.0),
                     testing::random_vector(rng, 10, 10.0, 100.0)};
    const auto nbhd = NeighborhoodSystem::four_connected(2, 4);
    for (double lambda : {0.0, 20.0}) {
      const RegularizerParams reg{lambda, 1e-3};
      const double i0 = *std::max_element(data.incident.begin(), data.incident.end());
      const Eigen::MatrixXd D = testing::dense(H);
      const Eigen::MatrixXd A = i0 * D.transpose() * D + lambda * dense_difference_normal(nbhd);
      const double ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues().maxCoeff();
      const auto est = lipschitz_constant(H, data, nbhd, reg);
      CHECK(est.converged);
      CHECK(std::abs(est.value - ref) <= 1e-6 * ref);
    }
  }
}
