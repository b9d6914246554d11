#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "jsct/model.hpp"
#include "jsct/simulate.hpp"
#include "support.hpp"

using namespace jsct;

TEST_SUITE("simulate") {
  TEST_CASE("uniform disc") {
    const Geometry g{32, 32, 1.0, 4, 50, 1.0};
    const auto ph = make_phantom(PhantomKind::uniform_disc, g, 0.03);
    for (std::size_t r = 0; r < 32; ++r)
      for (std::size_t c = 0; c < 32; ++c) {
        const auto [x, y] = pixel_center_normalized(g, r, c);
        CHECK(ph.x_true.at(r, c) == (x * x + y * y <= 0.64 ? 0.03 : 0.0));
      }
    CHECK_THROWS_AS(make_phantom(PhantomKind::uniform_disc, g, 2.0), std::invalid_argument);
  }

  TEST_CASE("blocks are piecewise constant and physical") {
    const Geometry g{64, 64, 1.0, 4, 96, 1.0};
    const auto ph = make_phantom(PhantomKind::blocks, g);
    std::set<double> levels(ph.x_true.data.begin(), ph.x_true.data.end());
    CHECK(levels.size() <= 6);
    CHECK(levels.size() >= 4);
    for (double v : ph.x_true.data) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }

  TEST_CASE("Shepp-Logan matches the ellipse-sum oracle") {
    const Geometry g{48, 40, 1.0, 4, 70, 1.0};
    const auto ph = make_phantom(PhantomKind::shepp_logan_like, g);
    REQUIRE(ph.description.size() == 10);
    Rng rng(3);
    for (int k = 0; k < 20; ++k) {
      const std::size_t r = uniform_index(rng, 48), c = uniform_index(rng, 40);
      const auto [x, y] = pixel_center_normalized(g, r, c);
      double v = 0.0;
      for (const auto& e : ph.description) {
        const double dx = x - e.cx, dy = y - e.cy;
        const double u = std::cos(e.angle) * dx + std::sin(e.angle) * dy;
        const double w = -std::sin(e.angle) * dx + std::cos(e.angle) * dy;
        if (u * u / (e.a * e.a) + w * w / (e.b * e.b) <= 1.0) v += e.value;
      }
      CHECK(ph.x_true.at(r, c) == doctest::Approx(std::clamp(v, 0.0, 1.0)).epsilon(1e-15));
    }
    CHECK(parse_phantom_kind("blocks") == PhantomKind::blocks);
    CHECK_THROWS_AS(parse_phantom_kind("cube"), std::invalid_argument);
  }

  TEST_CASE("noiseless counts") {
    const Geometry g{6, 6, 1.0, 5, 9, 1.0};
    const auto H = build_system_matrix(g);
    const std::vector<double> zero(36, 0.0);
    const double i0[] = {500.0};
    const auto s = simulate_counts(H, zero, i0, 1, true);
    for (double d : s.data.counts) CHECK(d == 500.0);

    std::vector<double> per_ray(g.ray_count());
    for (std::size_t i = 0; i < per_ray.size(); ++i) per_ray[i] = 100.0 + static_cast<double>(i);
    const auto ph = make_phantom(PhantomKind::uniform_disc, g, 0.05);
    const auto t = simulate_counts(H, ph.x_true.data, per_ray, 1, true);
    const auto l = forward_project(H, ph.x_true.data);
    for (std::size_t i = 0; i < l.size(); ++i) {
      CHECK(t.data.incident[i] == per_ray[i]);
      CHECK(t.data.counts[i] == per_ray[i] * std::exp(-l[i]));
    }
    const double bad[] = {0.0};
    CHECK_THROWS_AS(simulate_counts(H, zero, bad, 1, true), std::invalid_argument);
  }

  TEST_CASE("huge line integrals are clamped") {
    const SparseSystemMatrix H(1, {{{0, 1000.0}}, {{0, 1.0}}});
    const std::vector<double> x{1.0};
    const double i0[] = {1e6};
    const auto s = simulate_counts(H, x, i0, 3, false);
    CHECK(s.clamped_rays == 1);
    CHECK(s.data.counts[0] == 0.0);
  }

  TEST_CASE("noiseless data make x_true stationary") {
    // Diagonal H: full rank, so x_true is the unregularized optimum.
    std::vector<std::vector<SparseSystemMatrix::Entry>> rows;
    for (std::uint32_t j = 0; j < 6; ++j) rows.push_back({{j, 1.0 + 0.25 * j}});
    const SparseSystemMatrix H(6, std::move(rows));
    const std::vector<double> x_true{0.1, 0.3, 0.05, 0.2, 0.0, 0.7};
    const double i0[] = {2000.0};
    const auto s = simulate_counts(H, x_true, i0, 0, true);
    const auto nbhd = NeighborhoodSystem::four_connected(2, 3);
    for (double g : gradient(x_true, H, s.data, nbhd, {})) CHECK(std::abs(g) < 1e-9);

    // Probes x_true +/- eps e_j never beat x_true on a tomographic instance.
    const Geometry geo{5, 5, 1.0, 10, 9, 1.0};
    const auto Ht = build_system_matrix(geo);
    const auto ph = make_phantom(PhantomKind::uniform_disc, geo, 0.04);
    const auto st = simulate_counts(Ht, ph.x_true.data, i0, 0, true);
    const auto nb = NeighborhoodSystem::four_connected(5, 5);
    const double phi = objective(ph.x_true.data, Ht, st.data, nb, {});
    for (std::size_t j = 0; j < 25; ++j)
      for (double eps : {1e-3, -1e-3}) {
        auto x = ph.x_true.data;
        x[j] += eps;
        if (x[j] < 0.0) continue;
        CHECK(objective(x, Ht, st.data, nb, {}) >= phi);
      }
  }

  TEST_CASE("seeded noise has the right mean and is reproducible") {
    const Geometry g{4, 4, 1.0, 3, 6, 1.0};
    const auto H = build_system_matrix(g);
    const auto ph = make_phantom(PhantomKind::uniform_disc, g, 0.2);
    const double i0[] = {40.0};
    const auto q = simulate_counts(H, ph.x_true.data, i0, 0, true).data.counts;
    std::vector<double> sum(q.size(), 0.0);
    const int reps = 10000;
    for (int r = 0; r < reps; ++r) {
      const auto s = simulate_counts(H, ph.x_true.data, i0, 1000 + r, false);
      for (std::size_t i = 0; i < q.size(); ++i) sum[i] += s.data.counts[i];
    }
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double sigma = std::sqrt(q[i] / reps);
      CHECK(std::abs(sum[i] / reps - q[i]) <= 3.0 * sigma + 1e-12);
    }
    const auto a = simulate_counts(H, ph.x_true.data, i0, 5, false);
    const auto b = simulate_counts(H, ph.x_true.data, i0, 5, false);
    CHECK(a.data.counts == b.data.counts);
  }
}
