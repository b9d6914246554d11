#include "jsct/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "jsct/parallel.hpp"
#include "jsct/random.hpp"

namespace jsct {

namespace {

constexpr double kMaxLineIntegral = 700.0;
constexpr double kDeg = std::numbers::pi / 180.0;
// Attenuation represented by unit Shepp-Logan intensity (water-like).
constexpr double kSheppScale = 0.02;

std::vector<PhantomPrimitive> shepp_logan_primitives() {
  using S = PhantomPrimitive::Shape;
  // Modified Shepp-Logan (Toft) ellipses.
  const double table[10][6] = {
      {0.0, 0.0, 0.69, 0.92, 0.0, 1.0},        {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.8},
      {0.22, 0.0, 0.11, 0.31, -18.0, -0.2},    {-0.22, 0.0, 0.16, 0.41, 18.0, -0.2},
      {0.0, 0.35, 0.21, 0.25, 0.0, 0.1},       {0.0, 0.1, 0.046, 0.046, 0.0, 0.1},
      {0.0, -0.1, 0.046, 0.046, 0.0, 0.1},     {-0.08, -0.605, 0.046, 0.023, 0.0, 0.1},
      {0.0, -0.606, 0.023, 0.023, 0.0, 0.1},   {0.06, -0.605, 0.023, 0.046, 0.0, 0.1},
  };
  std::vector<PhantomPrimitive> out;
  for (const auto& e : table)
    out.push_back({S::ellipse, e[0], e[1], e[2], e[3], e[4] * kDeg, e[5] * kSheppScale});
  return out;
}

// Suitcase-like layout: a case body with dense, light and void inserts.
std::vector<PhantomPrimitive> blocks_primitives() {
  using S = PhantomPrimitive::Shape;
  return {
      {S::rectangle, 0.0, 0.0, 0.85, 0.65, 0.0, 0.01},
      {S::rectangle, -0.45, 0.25, 0.25, 0.2, 0.0, 0.02},
      {S::rectangle, 0.4, -0.25, 0.3, 0.18, 0.0, 0.04},
      {S::rectangle, 0.35, 0.35, 0.12, 0.12, 0.0, -0.01},
      {S::rectangle, -0.3, -0.35, 0.15, 0.1, 0.0, 0.08},
  };
}

bool inside(const PhantomPrimitive& p, double x, double y) {
  const double dx = x - p.cx;
  const double dy = y - p.cy;
  const double c = std::cos(p.angle);
  const double s = std::sin(p.angle);
  const double u = c * dx + s * dy;
  const double v = -s * dx + c * dy;
  if (p.shape == PhantomPrimitive::Shape::rectangle)
    return std::abs(u) <= p.a && std::abs(v) <= p.b;
  return (u / p.a) * (u / p.a) + (v / p.b) * (v / p.b) <= 1.0;
}

}  // namespace

std::string_view to_string(PhantomKind kind) {
  switch (kind) {
    case PhantomKind::shepp_logan_like:
      return "shepp_logan_like";
    case PhantomKind::blocks:
      return "blocks";
    case PhantomKind::uniform_disc:
      return "uniform_disc";
  }
  return "unknown";
}

PhantomKind parse_phantom_kind(std::string_view name) {
  if (name == "shepp_logan_like") return PhantomKind::shepp_logan_like;
  if (name == "blocks") return PhantomKind::blocks;
  if (name == "uniform_disc") return PhantomKind::uniform_disc;
  throw std::invalid_argument("unknown phantom kind '" + std::string(name) + "'");
}

std::pair<double, double> pixel_center_normalized(const Geometry& geom, std::size_t r,
                                                  std::size_t c) {
  const double nx = (static_cast<double>(c) + 0.5) / static_cast<double>(geom.n_cols) * 2.0 - 1.0;
  const double ny = (static_cast<double>(r) + 0.5) / static_cast<double>(geom.n_rows) * 2.0 - 1.0;
  return {nx, ny};
}

Phantom make_phantom(PhantomKind kind, const Geometry& geom, double disc_value) {
  geom.validate();
  Phantom ph;
  switch (kind) {
    case PhantomKind::shepp_logan_like:
      ph.description = shepp_logan_primitives();
      break;
    case PhantomKind::blocks:
      ph.description = blocks_primitives();
      break;
    case PhantomKind::uniform_disc:
      if (!(disc_value >= 0.0 && disc_value <= 1.0))
        throw std::invalid_argument("uniform_disc: value must lie in [0, 1] mm^-1");
      ph.description = {{PhantomPrimitive::Shape::ellipse, 0.0, 0.0, 0.8, 0.8, 0.0, disc_value}};
      break;
  }
  ph.x_true = ImageVolume(geom.n_rows, geom.n_cols, 1, geom.pixel_size);
  for (std::size_t r = 0; r < geom.n_rows; ++r)
    for (std::size_t c = 0; c < geom.n_cols; ++c) {
      const auto [x, y] = pixel_center_normalized(geom, r, c);
      double v = 0.0;
      for (const auto& p : ph.description)
        if (inside(p, x, y)) v += p.value;
      ph.x_true.at(r, c) = std::clamp(v, 0.0, 1.0);
    }
  return ph;
}

SimulatedScan simulate_counts(const SparseSystemMatrix& H, std::span<const double> x_true,
                              std::span<const double> incident, std::uint64_t seed,
                              bool noiseless) {
  const std::size_t m = H.rows();
  if (incident.size() != 1 && incident.size() != m)
    throw std::invalid_argument("simulate_counts: I0 must be a scalar or one value per ray");
  for (double v : incident)
    if (!(v > 0.0)) throw std::invalid_argument("simulate_counts: I0 must be > 0");
  for (double v : x_true)
    if (v < 0.0) throw std::invalid_argument("simulate_counts: negative attenuation");

  const auto l = forward_project(H, x_true);
  SimulatedScan out;
  out.data.counts.resize(m);
  out.data.incident.resize(m);
  std::vector<unsigned char> clamped(m, 0);
  parallel_for(m, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double i0 = incident.size() == 1 ? incident[0] : incident[i];
      double q = 0.0;
      if (l[i] > kMaxLineIntegral)
        clamped[i] = 1;
      else
        q = i0 * std::exp(-l[i]);
      out.data.incident[i] = i0;
      if (noiseless) {
        out.data.counts[i] = q;
      } else {
        Rng rng(stream_seed(seed, i));
        out.data.counts[i] = static_cast<double>(poisson_sample(rng, q));
      }
    }
  });
  for (auto c : clamped) out.clamped_rays += c;
  return out;
}

}  // namespace jsct
