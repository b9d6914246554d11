#include <cmath>
#include <numbers>

#include "doctest.h"
#include "jsct/surrogates.hpp"
#include "support.hpp"

using namespace jsct;

TEST_SUITE("surrogates") {
  TEST_CASE("data surrogate values and derivatives") {
    const DataSurrogateCoeffs c{3.0, 5.0, 2.0};
    const auto at = data_surrogate_eval(c, 0.4, 0.4);
    CHECK(at.value == doctest::Approx(2.5));
    CHECK(at.d1 == doctest::Approx(-2.0));
    const auto lin = data_surrogate_eval({3.0, 0.0, 2.0}, 1.4, 0.4);
    CHECK(lin.value == doctest::Approx(3.0));
    CHECK(lin.d2 == 0.0);
    Rng rng(1);
    for (int k = 0; k < 500; ++k) {
      const DataSurrogateCoeffs r{testing::uniform(rng, 0, 100), testing::uniform(rng, 0, 100),
                                  testing::uniform(rng, 0.5, 20)};
      const double xh = testing::uniform(rng, 0, 0.2), x = testing::uniform(rng, 0, 0.2);
      const double h = 1e-7;
      const auto v = data_surrogate_eval(r, x, xh);
      const double fd1 = (data_surrogate_eval(r, x + h, xh).value -
                          data_surrogate_eval(r, x - h, xh).value) / (2 * h);
      const double fd2 =
          (data_surrogate_eval(r, x + h, xh).d1 - data_surrogate_eval(r, x - h, xh).d1) / (2 * h);
      CHECK(std::abs(fd1 - v.d1) <= 1e-6 * (1.0 + std::abs(v.d1)));
      CHECK(std::abs(fd2 - v.d2) <= 1e-6 * (1.0 + std::abs(v.d2)));
    }
  }

  TEST_CASE("regularizer surrogate") {
    const double delta = 0.01;
    using N = NeighborhoodSystem::Neighbor;
    const std::vector<N> one{{1, 1.0}};
    const std::vector<double> zeros{0.0, 0.0};
    const RegSurrogate1D single{0.0, one, zeros, delta, 1.0};
    CHECK(reg_surrogate_eval(single, delta / 2).value ==
          doctest::Approx(0.5 * delta * delta * (1.0 - std::numbers::ln2)).epsilon(1e-14));

    const auto nbhd = NeighborhoodSystem::eight_connected(3, 3);
    const std::vector<double> flat(9, 0.3);
    const auto rs = make_reg_surrogate(nbhd, flat, 4, delta, 2.0);
    CHECK(reg_surrogate_eval(rs, 0.3).value == 0.0);
    CHECK(reg_surrogate_eval(rs, 0.3).d1 == 0.0);

    Rng rng(2);
    for (int k = 0; k < 300; ++k) {
      const auto xh = testing::random_vector(rng, 9, 0.0, 0.05);
      const auto s = make_reg_surrogate(nbhd, xh, uniform_index(rng, 9), delta,
                                        testing::uniform(rng, 0.1, 10.0));
      const double x = testing::uniform(rng, 0.0, 0.05), h = 1e-8;
      const auto v = reg_surrogate_eval(s, x);
      const double fd1 = (reg_surrogate_eval(s, x + h).value - reg_surrogate_eval(s, x - h).value) / (2 * h);
      const double fd2 = (reg_surrogate_eval(s, x + h).d1 - reg_surrogate_eval(s, x - h).d1) / (2 * h);
      CHECK(std::abs(fd1 - v.d1) <= 1e-6 * (1e-6 + std::abs(v.d1)));
      CHECK(std::abs(fd2 - v.d2) <= 1e-5 * (1.0 + std::abs(v.d2)));
      const auto d = reg_surrogate_derivatives(s, x);
      CHECK(d.d1 == v.d1);
      CHECK(d.d2 == v.d2);
      CHECK(v.d2 > 0.0);
    }
  }

  TEST_CASE("closed-form update") {
    CHECK(closed_form_update({4.0, 4.0, 3.0}, 0.7).value == 0.7);
    const auto two = closed_form_update({1.0, std::exp(2.0), 2.0}, 1.0);
    CHECK(two.value == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(two.degeneracy == UpdateDegeneracy::none);
    CHECK(closed_form_update({std::exp(1.0), 1.0, 1.0}, 0.1).value == 0.0);

    const auto zero_est = closed_form_update({2.0, 0.0, 1.0}, 0.5);
    CHECK(zero_est.value == 0.0);
    CHECK(zero_est.degeneracy == UpdateDegeneracy::zero_estimate);
    const auto zero_counts = closed_form_update({0.0, 3.0, 2.0}, 0.5);
    CHECK(zero_counts.degeneracy == UpdateDegeneracy::zero_counts);
    CHECK(zero_counts.value == doctest::Approx(0.5 + std::log(3.0 / kCountFloor) / 2.0));
    const auto empty = closed_form_update({0.0, 0.0, 2.0}, 0.5);
    CHECK(empty.degeneracy == UpdateDegeneracy::empty);
    CHECK(empty.value == 0.5);
  }

  TEST_CASE("closed form agrees with the 1D solver") {
    Rng rng(3);
    for (int k = 0; k < 1000; ++k) {
      const DataSurrogateCoeffs c{testing::uniform(rng, 1, 1e4), testing::uniform(rng, 1, 1e4),
                                  testing::uniform(rng, 1, 100)};
      const double xh = testing::uniform(rng, 0, 0.2);
      const VoxelSurrogate psi{c, xh, RegSurrogate1D{.lambda_scale = 0.0}};
      Solver1DConfig cfg;
      cfg = cfg.resolve_radii(c.z);
      const auto r = minimize_1d(psi, xh, cfg);
      CHECK(r.status == Solver1DStatus::converged);
      CHECK(std::abs(r.x - closed_form_update(c, xh).value) <= 1e-8);
    }
  }

  TEST_CASE("Jensen weights from Z are valid") {
    const auto H = build_system_matrix({6, 6, 1.0, 9, 10, 1.0});
    CHECK(jensen_weights_valid(H, compute_z(H)));
    CHECK_FALSE(jensen_weights_valid(H, 0.5 * compute_z(H)));
  }

  TEST_CASE("majorization and tangency") {
    const auto p = testing::small_problem(5, 5, 8, 8, 9);
    Rng rng(10);
    for (int trial = 0; trial < 100; ++trial) {
      const auto xh = testing::random_vector(rng, 25, 0.0, 0.1);
      auto x = xh;
      const double scale = trial < 50 ? 0.01 : 0.1;
      for (auto& v : x) v = std::max(0.0, v + testing::uniform(rng, -scale, scale));
      const auto rep = surrogate_majorization_check(x, xh, p.H, p.data, p.nbhd, 1e-3);
      CHECK(rep.data_majorizes());
      CHECK(rep.reg_majorizes());
      CHECK(rep.tangent());
    }
    const auto xh = testing::random_vector(rng, 25, 0.0, 0.1);
    const auto same = surrogate_majorization_check(xh, xh, p.H, p.data, p.nbhd, 1e-3);
    CHECK(std::abs(same.data_gap) <= same.data_tolerance);
    CHECK(std::abs(same.reg_gap) <= same.reg_tolerance);
  }

  TEST_CASE("per-voxel surrogates sum to the image surrogate") {
    const auto nbhd = NeighborhoodSystem::four_connected(4, 4);
    Rng rng(12);
    const auto xh = testing::random_vector(rng, 16, 0.0, 0.1);
    const auto x = testing::random_vector(rng, 16, 0.0, 0.1);
    const auto b = testing::random_vector(rng, 16, 1.0, 10.0);
    const auto bh = testing::random_vector(rng, 16, 1.0, 10.0);
    const double z = 7.0, lambda = 3.0, delta = 0.01;
    double sum = 0.0;
    for (std::size_t j = 0; j < 16; ++j) {
      const VoxelSurrogate psi{{b[j], bh[j], z}, xh[j],
                               make_reg_surrogate(nbhd, xh, j, delta, lambda)};
      sum += psi.value(x[j]);
    }
    const double total = data_surrogate_total(b, bh, z, x, xh) +
                         lambda * reg_surrogate_total(nbhd, x, xh, delta);
    CHECK(sum == doctest::Approx(total).epsilon(1e-13));
  }
}
