#pragma once

#include <filesystem>
#include <string>

#include "jsct/image.hpp"
#include "jsct/model.hpp"
#include "jsct/projector.hpp"

namespace jsct {

/// Display window for 8-bit output; requires lo < hi.
struct Window {
  double lo = 0.0;
  double hi = 0.04;
};

/// Gray level floor(255 (v - lo) / (hi - lo) + 0.5) clamped to [0, 255].
unsigned char window_level(double v, const Window& window);

/// Writes `path` as binary PGM (P5, one frame per slice stacked vertically),
/// plus `path`.raw (float32 LE, row-major) and `path`.raw.txt describing it.
void render_image(const ImageVolume& x, const std::filesystem::path& path, const Window& window);

void write_raw(const ImageVolume& x, const std::filesystem::path& raw_path);
/// Reads a raw dump using its .txt sidecar.
ImageVolume read_raw(const std::filesystem::path& raw_path);

/// Sinogram file: "JSCT-S1", views and dets (u64 LE), then M counts and M
/// incident values as f64 LE, ray-major (i = view * dets + det).
void write_sinogram(const std::filesystem::path& path, const Geometry& geom,
                    const PoissonData& data);
PoissonData read_sinogram(const std::filesystem::path& path, const Geometry& geom);

}  // namespace jsct
