#include "jsct/projector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "binary_io.hpp"
#include "jsct/parallel.hpp"

namespace jsct {

namespace {

constexpr char kMatrixMagic[] = "JSCT-H1";
constexpr std::size_t kMagicLength = 7;

void check_image_length(const SparseSystemMatrix& H, std::size_t n) {
  if (n != H.cols())
    throw std::invalid_argument("image length " + std::to_string(n) +
                                " does not match system matrix columns " +
                                std::to_string(H.cols()));
}

void check_ray_ids(const SparseSystemMatrix& H, std::span<const std::uint32_t> rays) {
  for (auto r : rays)
    if (r >= H.rows())
      throw std::out_of_range("ray index " + std::to_string(r) + " out of range");
}

}  // namespace

double Geometry::view_angle(std::size_t view) const {
  return std::numbers::pi * static_cast<double>(view) / static_cast<double>(n_views);
}

void Geometry::validate() const {
  if (n_rows == 0 || n_cols == 0 || n_views == 0 || n_dets == 0)
    throw std::invalid_argument("geometry: rows, cols, views and detectors must be >= 1");
  if (!(pixel_size > 0.0) || !(det_spacing > 0.0))
    throw std::invalid_argument("geometry: pixel_size and det_spacing must be > 0");
}

std::string coverage_diagnostic(const Geometry& geom) {
  const double half_w = 0.5 * static_cast<double>(geom.n_cols) * geom.pixel_size;
  const double half_h = 0.5 * static_cast<double>(geom.n_rows) * geom.pixel_size;
  const double radius = std::hypot(half_w, half_h);
  const double half_det = 0.5 * static_cast<double>(geom.n_dets) * geom.det_spacing;
  if (half_det + 1e-12 >= radius) return {};
  std::ostringstream msg;
  msg << "detector half-width " << half_det << " mm does not cover image half-diagonal "
      << radius << " mm; peripheral pixels are missed at some views";
  return msg.str();
}

SparseSystemMatrix::SparseSystemMatrix(std::size_t n_cols,
                                       std::vector<std::vector<Entry>> rows)
    : n_cols_(n_cols) {
  row_ptr_.reserve(rows.size() + 1);
  row_ptr_.push_back(0);
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  entries_.reserve(total);
  std::vector<std::size_t> seen(n_cols, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& e : rows[i]) {
      if (e.index >= n_cols)
        throw std::invalid_argument("system matrix: column index out of range in row " +
                                    std::to_string(i));
      if (!(e.length >= 0.0) || !std::isfinite(e.length))
        throw std::invalid_argument("system matrix: negative or non-finite length in row " +
                                    std::to_string(i));
      if (seen[e.index] == i)
        throw std::invalid_argument("system matrix: duplicate column in row " +
                                    std::to_string(i));
      seen[e.index] = i;
      entries_.push_back(e);
    }
    row_ptr_.push_back(entries_.size());
  }
}

double SparseSystemMatrix::row_sum(std::size_t i) const {
  double s = 0.0;
  for (const auto& e : row(i)) s += e.length;
  return s;
}

std::vector<SparseSystemMatrix::Entry> trace_ray(std::size_t rows, std::size_t cols,
                                                 double pixel_size, double origin_x,
                                                 double origin_y, double dir_x,
                                                 double dir_y) {
  const double norm = std::hypot(dir_x, dir_y);
  if (!(norm > 0.0)) throw std::invalid_argument("trace_ray: zero direction");
  dir_x /= norm;
  dir_y /= norm;

  const double x_min = -0.5 * static_cast<double>(cols) * pixel_size;
  const double y_min = -0.5 * static_cast<double>(rows) * pixel_size;
  const double x_max = -x_min;
  const double y_max = -y_min;

  // Parametric clip of the line against the image box.
  double t_lo = -std::numeric_limits<double>::infinity();
  double t_hi = std::numeric_limits<double>::infinity();
  auto clip = [&](double p, double d, double lo, double hi) {
    if (d == 0.0) return lo <= p && p <= hi;
    double a = (lo - p) / d;
    double b = (hi - p) / d;
    if (a > b) std::swap(a, b);
    t_lo = std::max(t_lo, a);
    t_hi = std::min(t_hi, b);
    return true;
  };
  if (!clip(origin_x, dir_x, x_min, x_max) || !clip(origin_y, dir_y, y_min, y_max))
    return {};
  if (!(t_hi > t_lo)) return {};

  // Crossing parameters with every interior grid line, plus the endpoints.
  std::vector<double> ts;
  ts.reserve(rows + cols + 4);
  ts.push_back(t_lo);
  ts.push_back(t_hi);
  if (dir_x != 0.0)
    for (std::size_t c = 0; c <= cols; ++c) {
      const double t = (x_min + static_cast<double>(c) * pixel_size - origin_x) / dir_x;
      if (t > t_lo && t < t_hi) ts.push_back(t);
    }
  if (dir_y != 0.0)
    for (std::size_t r = 0; r <= rows; ++r) {
      const double t = (y_min + static_cast<double>(r) * pixel_size - origin_y) / dir_y;
      if (t > t_lo && t < t_hi) ts.push_back(t);
    }
  std::sort(ts.begin(), ts.end());

  std::vector<SparseSystemMatrix::Entry> out;
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    const double len = ts[k + 1] - ts[k];
    if (!(len > 0.0)) continue;
    const double tm = 0.5 * (ts[k] + ts[k + 1]);
    const double px = origin_x + tm * dir_x;
    const double py = origin_y + tm * dir_y;
    auto c = static_cast<long long>(std::floor((px - x_min) / pixel_size));
    auto r = static_cast<long long>(std::floor((py - y_min) / pixel_size));
    c = std::clamp<long long>(c, 0, static_cast<long long>(cols) - 1);
    r = std::clamp<long long>(r, 0, static_cast<long long>(rows) - 1);
    const auto j = static_cast<std::uint32_t>(r * static_cast<long long>(cols) + c);
    if (!out.empty() && out.back().index == j)
      out.back().length += len;
    else
      out.push_back({j, len});
  }

  // Segments along a grid line can revisit a pixel; merge such repeats.
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  std::vector<SparseSystemMatrix::Entry> merged;
  merged.reserve(out.size());
  for (const auto& e : out) {
    if (!merged.empty() && merged.back().index == e.index)
      merged.back().length += e.length;
    else
      merged.push_back(e);
  }
  return merged;
}

Ray ray_for(const Geometry& geom, std::size_t view, std::size_t det) {
  const double theta = geom.view_angle(view);
  const double u = (static_cast<double>(det) + 0.5 - 0.5 * static_cast<double>(geom.n_dets)) *
                   geom.det_spacing;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {u * c, u * s, -s, c};
}

SparseSystemMatrix build_system_matrix(const Geometry& geom, std::vector<std::string>* warnings) {
  geom.validate();
  if (auto msg = coverage_diagnostic(geom); !msg.empty() && warnings) warnings->push_back(msg);

  std::vector<std::vector<SparseSystemMatrix::Entry>> rows(geom.ray_count());
  parallel_for(rows.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const Ray ray = ray_for(geom, i / geom.n_dets, i % geom.n_dets);
      rows[i] = trace_ray(geom.n_rows, geom.n_cols, geom.pixel_size, ray.origin_x,
                          ray.origin_y, ray.dir_x, ray.dir_y);
    }
  });
  return SparseSystemMatrix(geom.voxel_count(), std::move(rows));
}

std::vector<double> forward_project(const SparseSystemMatrix& H, std::span<const double> x) {
  check_image_length(H, x.size());
  std::vector<double> l(H.rows(), 0.0);
  parallel_for(H.rows(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      double s = 0.0;
      for (const auto& e : H.row(i)) s += e.length * x[e.index];
      l[i] = s;
    }
  });
  return l;
}

std::vector<double> forward_project(const SparseSystemMatrix& H, std::span<const double> x,
                                    std::span<const std::uint32_t> rays) {
  check_image_length(H, x.size());
  check_ray_ids(H, rays);
  std::vector<double> l(rays.size(), 0.0);
  parallel_for(rays.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t t = lo; t < hi; ++t) {
      double s = 0.0;
      for (const auto& e : H.row(rays[t])) s += e.length * x[e.index];
      l[t] = s;
    }
  });
  return l;
}

// Back projection scatters rays in ascending order, so every voxel sum is
// accumulated in a fixed order regardless of the thread count.
std::vector<double> back_project(const SparseSystemMatrix& H, std::span<const double> w) {
  if (w.size() != H.rows())
    throw std::invalid_argument("back_project: weight length does not match ray count");
  std::vector<double> out(H.cols(), 0.0);
  for (std::size_t i = 0; i < H.rows(); ++i) {
    const double wi = w[i];
    for (const auto& e : H.row(i)) out[e.index] += wi * e.length;
  }
  return out;
}

std::vector<double> back_project(const SparseSystemMatrix& H, std::span<const double> w,
                                 std::span<const std::uint32_t> rays) {
  if (w.size() != H.rows())
    throw std::invalid_argument("back_project: weight length does not match ray count");
  check_ray_ids(H, rays);
  std::vector<double> out(H.cols(), 0.0);
  for (auto i : rays) {
    const double wi = w[i];
    for (const auto& e : H.row(i)) out[e.index] += wi * e.length;
  }
  return out;
}

std::vector<double> back_project_compact(const SparseSystemMatrix& H,
                                         std::span<const double> w,
                                         std::span<const std::uint32_t> rays) {
  if (w.size() != rays.size())
    throw std::invalid_argument("back_project: weight length does not match subset size");
  check_ray_ids(H, rays);
  std::vector<double> out(H.cols(), 0.0);
  for (std::size_t t = 0; t < rays.size(); ++t) {
    const double wi = w[t];
    for (const auto& e : H.row(rays[t])) out[e.index] += wi * e.length;
  }
  return out;
}

double compute_z(const SparseSystemMatrix& H) {
  double z = 0.0;
  for (std::size_t i = 0; i < H.rows(); ++i) z = std::max(z, H.row_sum(i));
  if (!(z > 0.0)) throw std::invalid_argument("compute_z: system matrix has no nonzero row");
  return z;
}

SubsetPartition partition_rays(const Geometry& geom, const SparseSystemMatrix& H,
                               std::span<const double> counts, std::size_t n_subsets) {
  geom.validate();
  if (n_subsets < 1 || n_subsets > geom.n_views)
    throw std::invalid_argument("partition_rays: subset count " + std::to_string(n_subsets) +
                                " must lie in [1, " + std::to_string(geom.n_views) + "]");
  if (H.rows() != geom.ray_count())
    throw std::invalid_argument("partition_rays: matrix rows do not match geometry");
  if (counts.size() != H.rows())
    throw std::invalid_argument("partition_rays: counts length does not match ray count");

  SubsetPartition p;
  p.n_subsets = n_subsets;
  p.subsets.resize(n_subsets);
  for (std::size_t v = 0; v < geom.n_views; ++v) {
    auto& s = p.subsets[v % n_subsets];
    for (std::size_t d = 0; d < geom.n_dets; ++d)
      s.push_back(static_cast<std::uint32_t>(v * geom.n_dets + d));
  }
  p.subset_backprojection.reserve(n_subsets);
  for (const auto& s : p.subsets) p.subset_backprojection.push_back(back_project(H, counts, s));
  return p;
}

void write_system_matrix(const std::filesystem::path& path, const SparseSystemMatrix& H) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(kMatrixMagic, kMagicLength);
  detail::put_u64(os, H.rows());
  detail::put_u64(os, H.cols());
  for (std::size_t i = 0; i < H.rows(); ++i) {
    const auto row = H.row(i);
    detail::put_u64(os, row.size());
    for (const auto& e : row) {
      detail::put_u32(os, e.index);
      detail::put_f64(os, e.length);
    }
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

SparseSystemMatrix read_system_matrix(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  char magic[kMagicLength];
  if (!is.read(magic, kMagicLength) || std::string(magic, kMagicLength) != kMatrixMagic)
    throw std::runtime_error(path.string() + ": not a system matrix file");
  const auto m = detail::get_u64(is);
  const auto n = detail::get_u64(is);
  std::vector<std::vector<SparseSystemMatrix::Entry>> rows(m);
  for (auto& row : rows) {
    const auto count = detail::get_u64(is);
    if (count > n) throw std::runtime_error(path.string() + ": corrupt row length");
    row.resize(count);
    for (auto& e : row) {
      e.index = detail::get_u32(is);
      e.length = detail::get_f64(is);
    }
  }
  return SparseSystemMatrix(n, std::move(rows));
}

}  // namespace jsct
