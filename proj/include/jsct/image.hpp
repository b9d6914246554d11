#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace jsct {

/// Nonnegative attenuation image in mm^-1, stored row-major per slice
/// (index = (slice * rows + row) * cols + col).
struct ImageVolume {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t slices = 1;
  double pixel_size = 1.0;  // mm
  std::vector<double> data;

  ImageVolume() = default;
  ImageVolume(std::size_t rows_, std::size_t cols_, std::size_t slices_,
              double pixel_size_, double fill = 0.0)
      : rows(rows_), cols(cols_), slices(slices_), pixel_size(pixel_size_),
        data(rows_ * cols_ * slices_, fill) {
    if (rows == 0 || cols == 0 || slices == 0)
      throw std::invalid_argument("ImageVolume: dimensions must be >= 1");
    if (!(pixel_size > 0.0))
      throw std::invalid_argument("ImageVolume: pixel_size must be > 0");
  }

  std::size_t size() const { return data.size(); }
  std::size_t index(std::size_t r, std::size_t c, std::size_t s = 0) const {
    return (s * rows + r) * cols + c;
  }
  double& at(std::size_t r, std::size_t c, std::size_t s = 0) {
    return data[index(r, c, s)];
  }
  double at(std::size_t r, std::size_t c, std::size_t s = 0) const {
    return data[index(r, c, s)];
  }
  std::span<const double> view() const { return data; }
};

}  // namespace jsct
