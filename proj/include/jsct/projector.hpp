#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace jsct {

/// 2D parallel-beam scan geometry. The image grid is centred on the origin;
/// views are uniform over [0, pi) and detector bins are centred on the
/// rotation axis. Ray index i = view * n_dets + det.
struct Geometry {
  std::size_t n_rows = 64;
  std::size_t n_cols = 64;
  double pixel_size = 1.0;  // mm
  std::size_t n_views = 90;
  std::size_t n_dets = 96;
  double det_spacing = 1.0;  // mm

  std::size_t ray_count() const { return n_views * n_dets; }
  std::size_t voxel_count() const { return n_rows * n_cols; }
  double view_angle(std::size_t view) const;

  /// Throws std::invalid_argument on zero counts or nonpositive spacings.
  void validate() const;
};

/// Returns a message when the detector array cannot see the whole image
/// at every view angle; rays that miss the image produce empty rows.
std::string coverage_diagnostic(const Geometry& geom);

/// Row-compressed nonnegative matrix of ray/pixel intersection lengths (mm).
/// Immutable after construction.
class SparseSystemMatrix {
 public:
  struct Entry {
    std::uint32_t index;  // voxel j
    double length;        // h_ij
  };

  SparseSystemMatrix() = default;
  /// Takes one entry list per ray. Entries are validated (index < n,
  /// length >= 0, no duplicate index within a row).
  SparseSystemMatrix(std::size_t n_cols, std::vector<std::vector<Entry>> rows);

  std::size_t rows() const { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
  std::size_t cols() const { return n_cols_; }
  std::size_t nonzeros() const { return entries_.size(); }

  std::span<const Entry> row(std::size_t i) const {
    return {entries_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  double row_sum(std::size_t i) const;

 private:
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<Entry> entries_;
};

/// Exact intersection lengths of the line origin + t * direction with the
/// pixels of a rows x cols grid of square pixels centred on the origin.
/// Pixel (r, c) spans x in [-W/2 + c*s, -W/2 + (c+1)*s] and likewise y with
/// r. Returned entries are sorted by voxel index.
std::vector<SparseSystemMatrix::Entry> trace_ray(std::size_t rows, std::size_t cols,
                                                 double pixel_size, double origin_x,
                                                 double origin_y, double dir_x,
                                                 double dir_y);

/// Point on the ray and unit direction for ray (view, det).
struct Ray {
  double origin_x, origin_y, dir_x, dir_y;
};
Ray ray_for(const Geometry& geom, std::size_t view, std::size_t det);

/// Builds H by Siddon-style traversal of every ray. Coverage problems are
/// appended to `warnings` when given.
SparseSystemMatrix build_system_matrix(const Geometry& geom,
                                       std::vector<std::string>* warnings = nullptr);

/// l_i = sum_j h_ij x_j.
std::vector<double> forward_project(const SparseSystemMatrix& H, std::span<const double> x);
/// Line integrals for the listed rays only (result is compact, rays.size()).
std::vector<double> forward_project(const SparseSystemMatrix& H, std::span<const double> x,
                                    std::span<const std::uint32_t> rays);

/// sum_i w_i h_ij over all rays; w has one weight per ray.
std::vector<double> back_project(const SparseSystemMatrix& H, std::span<const double> w);
/// sum over i in rays of w_i h_ij, w indexed by ray id (length M).
std::vector<double> back_project(const SparseSystemMatrix& H, std::span<const double> w,
                                 std::span<const std::uint32_t> rays);
/// Same as above but w is compact: w[t] belongs to ray rays[t].
std::vector<double> back_project_compact(const SparseSystemMatrix& H,
                                         std::span<const double> w,
                                         std::span<const std::uint32_t> rays);

/// Z = max_i sum_j h_ij. Throws if every row is empty or zero.
double compute_z(const SparseSystemMatrix& H);

/// Disjoint cover of the rays by interleaved views (view v -> subset v mod B),
/// with the per-subset back-projections of the measured counts.
struct SubsetPartition {
  std::size_t n_subsets = 0;
  std::vector<std::vector<std::uint32_t>> subsets;      // ascending ray ids
  std::vector<std::vector<double>> subset_backprojection;  // b^k_j
};

SubsetPartition partition_rays(const Geometry& geom, const SparseSystemMatrix& H,
                               std::span<const double> counts, std::size_t n_subsets);

/// Binary cache: "JSCT-H1", m and n as u64 LE, then per row an entry count
/// (u64 LE) followed by (u32 LE index, f64 LE length) pairs.
void write_system_matrix(const std::filesystem::path& path, const SparseSystemMatrix& H);
SparseSystemMatrix read_system_matrix(const std::filesystem::path& path);

}  // namespace jsct
