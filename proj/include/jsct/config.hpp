#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "jsct/algorithms.hpp"
#include "jsct/image_io.hpp"
#include "jsct/projector.hpp"
#include "jsct/simulate.hpp"

namespace jsct {

/// Everything needed to rebuild an experiment bit for bit. Loaded from an
/// INI file; every key is optional and falls back to the defaults below.
///
///   [geometry]     rows cols pixel_size views dets det_spacing
///   [phantom]      kind (shepp_logan_like | blocks | uniform_disc) disc_value
///   [scan]         incident noiseless
///   [regularizer]  lambda delta neighborhood (4 | 8)
///   [solver]       method (newton | trust_region | fixed_trust_region)
///                  grad_tol max_iters initial_radius fixed_radius eta
///   [experiment]   algorithms (comma list) subsets (comma list) max_passes
///                  seed initial_value reference_passes output_dir threads
///                  reproducible window_lo window_hi
struct ExperimentConfig {
  Geometry geometry;
  PhantomKind phantom = PhantomKind::blocks;
  double disc_value = 0.02;
  double incident = 1e5;
  bool noiseless = false;
  RegularizerParams reg{50.0, 1e-3};
  int neighborhood = 4;
  Solver1DConfig solver;
  std::vector<Scheme> algorithms{Scheme::full_js, Scheme::os_js,   Scheme::sa_js, Scheme::osa_js,
                                 Scheme::full_gd, Scheme::os_gd, Scheme::sa_gd};
  std::vector<std::size_t> subsets{8, 64};
  double max_passes = 20.0;
  std::uint64_t seed = 1;
  double initial_value = 0.001;
  double reference_passes = 2000.0;
  std::filesystem::path output_dir = "out";
  std::size_t threads = 1;
  bool reproducible = true;
  Window window;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  NeighborhoodSystem make_neighborhood() const;
  AlgorithmConfig algorithm_config(Scheme scheme, std::size_t n_subsets) const;
};

ExperimentConfig parse_config(const std::string& ini_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// INI text that parse_config() maps back to an identical config.
std::string config_to_ini(const ExperimentConfig& cfg);

}  // namespace jsct
