#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "jsct/image.hpp"
#include "jsct/model.hpp"
#include "jsct/projector.hpp"

namespace jsct {

enum class PhantomKind { shepp_logan_like, blocks, uniform_disc };

std::string_view to_string(PhantomKind kind);
PhantomKind parse_phantom_kind(std::string_view name);

/// Additive ellipse or rectangle in normalized image coordinates: the image
/// spans [-1, 1] along each axis. For rectangles a and b are half-widths.
struct PhantomPrimitive {
  enum class Shape { ellipse, rectangle };
  Shape shape = Shape::ellipse;
  double cx = 0.0, cy = 0.0;
  double a = 1.0, b = 1.0;
  double angle = 0.0;  // radians, counter-clockwise
  double value = 0.0;  // mm^-1, added inside the primitive
};

struct Phantom {
  ImageVolume x_true;
  std::vector<PhantomPrimitive> description;
};

/// Rasterizes the phantom at pixel centres (pixel layout as in trace_ray).
/// Overlapping primitives add; the result is clamped to [0, 1] mm^-1.
/// disc_value sets the attenuation of the uniform_disc kind.
Phantom make_phantom(PhantomKind kind, const Geometry& geom, double disc_value = 0.02);

/// Normalized coordinates of pixel (r, c) centre.
std::pair<double, double> pixel_center_normalized(const Geometry& geom, std::size_t r,
                                                  std::size_t c);

struct SimulatedScan {
  PoissonData data;
  std::size_t clamped_rays = 0;  // rays whose line integral exceeded 700
};

/// q_i = I0_i exp(-(H x_true)_i); d_i ~ Poisson(q_i) from a per-ray stream
/// derived from `seed`, or d = q when noiseless. `incident` holds either one
/// value shared by all rays or one per ray.
SimulatedScan simulate_counts(const SparseSystemMatrix& H, std::span<const double> x_true,
                              std::span<const double> incident, std::uint64_t seed,
                              bool noiseless);

}  // namespace jsct
