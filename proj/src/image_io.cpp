#include "jsct/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "binary_io.hpp"

namespace jsct {

namespace {

constexpr char kSinogramMagic[] = "JSCT-S1";

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return is;
}

}  // namespace

unsigned char window_level(double v, const Window& window) {
  if (!(window.lo < window.hi)) throw std::invalid_argument("window: lo must be < hi");
  if (!(v > window.lo)) return 0;
  if (v >= window.hi) return 255;
  const double level = std::floor(255.0 * (v - window.lo) / (window.hi - window.lo) + 0.5);
  return static_cast<unsigned char>(std::clamp(level, 0.0, 255.0));
}

void render_image(const ImageVolume& x, const std::filesystem::path& path, const Window& window) {
  if (!(window.lo < window.hi)) throw std::invalid_argument("window: lo must be < hi");
  auto os = open_out(path);
  os << "P5\n" << x.cols << ' ' << x.rows * x.slices << "\n255\n";
  std::vector<char> buf(x.size());
  std::transform(x.data.begin(), x.data.end(), buf.begin(),
                 [&](double v) { return static_cast<char>(window_level(v, window)); });
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw std::runtime_error("write failed: " + path.string());
  write_raw(x, std::filesystem::path(path.string() + ".raw"));
}

void write_raw(const ImageVolume& x, const std::filesystem::path& raw_path) {
  {
    auto os = open_out(raw_path);
    for (double v : x.data) detail::put_f32(os, static_cast<float>(v));
    if (!os) throw std::runtime_error("write failed: " + raw_path.string());
  }
  auto txt = open_out(std::filesystem::path(raw_path.string() + ".txt"));
  txt.precision(17);
  txt << "format float32_le\n"
      << "order row_major\n"
      << "cols " << x.cols << "\n"
      << "rows " << x.rows << "\n"
      << "slices " << x.slices << "\n"
      << "pixel_size_mm " << x.pixel_size << "\n"
      << "units mm^-1\n";
  if (!txt) throw std::runtime_error("write failed: " + raw_path.string() + ".txt");
}

ImageVolume read_raw(const std::filesystem::path& raw_path) {
  auto txt = open_in(std::filesystem::path(raw_path.string() + ".txt"));
  std::size_t rows = 0, cols = 0, slices = 1;
  double pixel = 1.0;
  std::string line;
  while (std::getline(txt, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "float32_le") throw std::runtime_error("raw sidecar: unsupported format " + fmt);
    } else if (key == "cols") {
      ls >> cols;
    } else if (key == "rows") {
      ls >> rows;
    } else if (key == "slices") {
      ls >> slices;
    } else if (key == "pixel_size_mm") {
      ls >> pixel;
    }
  }
  ImageVolume x(rows, cols, slices, pixel);
  auto is = open_in(raw_path);
  for (auto& v : x.data) v = detail::get_f32(is);
  if (is.peek() != std::char_traits<char>::eof())
    throw std::runtime_error("raw dump longer than its sidecar says: " + raw_path.string());
  return x;
}

void write_sinogram(const std::filesystem::path& path, const Geometry& geom,
                    const PoissonData& data) {
  data.validate(geom.ray_count());
  auto os = open_out(path);
  os.write(kSinogramMagic, 7);
  detail::put_u64(os, geom.n_views);
  detail::put_u64(os, geom.n_dets);
  for (double v : data.counts) detail::put_f64(os, v);
  for (double v : data.incident) detail::put_f64(os, v);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

PoissonData read_sinogram(const std::filesystem::path& path, const Geometry& geom) {
  auto is = open_in(path);
  char magic[7];
  if (!is.read(magic, 7) || std::string_view(magic, 7) != std::string_view(kSinogramMagic, 7))
    throw std::runtime_error("not a sinogram file: " + path.string());
  const auto views = detail::get_u64(is);
  const auto dets = detail::get_u64(is);
  if (views != geom.n_views || dets != geom.n_dets)
    throw std::runtime_error("sinogram shape " + std::to_string(views) + "x" +
                             std::to_string(dets) + " does not match geometry");
  PoissonData data;
  data.counts.resize(views * dets);
  data.incident.resize(views * dets);
  for (auto& v : data.counts) v = detail::get_f64(is);
  for (auto& v : data.incident) v = detail::get_f64(is);
  data.validate(geom.ray_count());
  return data;
}

}  // namespace jsct
