#include "jsct/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace jsct {

namespace pt = boost::property_tree;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  boost::split(parts, s, boost::is_any_of(", "), boost::token_compress_on);
  std::erase_if(parts, [](const std::string& p) { return p.empty(); });
  return parts;
}

template <class T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
  // get<T>(key, default) swallows conversion errors; convert explicitly.
  if (!tree.get_optional<std::string>(key)) return fallback;
  try {
    return tree.get<T>(key);
  } catch (const pt::ptree_bad_data&) {
    throw std::invalid_argument("config: bad value for " + key);
  }
}

bool get_bool(const pt::ptree& tree, const std::string& key, bool fallback) {
  const auto v = tree.get_optional<std::string>(key);
  if (!v) return fallback;
  const auto s = boost::to_lower_copy(boost::trim_copy(*v));
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::invalid_argument("config: bad boolean for " + key);
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ",") + p;
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  geometry.validate();
  if (!(disc_value >= 0.0 && disc_value <= 1.0))
    throw std::invalid_argument("config: phantom.disc_value must lie in [0, 1]");
  if (!(incident > 0.0) || !std::isfinite(incident))
    throw std::invalid_argument("config: scan.incident must be > 0");
  reg.validate();
  if (neighborhood != 4 && neighborhood != 8)
    throw std::invalid_argument("config: regularizer.neighborhood must be 4 or 8");
  solver.validate();
  if (algorithms.empty()) throw std::invalid_argument("config: experiment.algorithms is empty");
  if (subsets.empty()) throw std::invalid_argument("config: experiment.subsets is empty");
  for (auto b : subsets)
    if (b < 1 || b > geometry.n_views)
      throw std::invalid_argument("config: subset count " + std::to_string(b) +
                                  " outside [1, views]");
  if (!(max_passes > 0.0)) throw std::invalid_argument("config: experiment.max_passes must be > 0");
  if (!(initial_value >= 0.0))
    throw std::invalid_argument("config: experiment.initial_value must be >= 0");
  if (!(reference_passes >= 1.0))
    throw std::invalid_argument("config: experiment.reference_passes must be >= 1");
  if (threads < 1) throw std::invalid_argument("config: experiment.threads must be >= 1");
  if (!(window.lo < window.hi))
    throw std::invalid_argument("config: window_lo must be < window_hi");
}

NeighborhoodSystem ExperimentConfig::make_neighborhood() const {
  return neighborhood == 4 ? NeighborhoodSystem::four_connected(geometry.n_rows, geometry.n_cols)
                           : NeighborhoodSystem::eight_connected(geometry.n_rows, geometry.n_cols);
}

AlgorithmConfig ExperimentConfig::algorithm_config(Scheme scheme, std::size_t n_subsets) const {
  AlgorithmConfig a;
  a.scheme = scheme;
  a.n_subsets = is_full_scheme(scheme) ? 1 : n_subsets;
  a.reg = reg;
  a.solver = solver;
  a.max_passes = max_passes;
  a.seed = seed;
  a.initial_value = initial_value;
  return a;
}

ExperimentConfig parse_config(const std::string& ini_text) {
  pt::ptree tree;
  std::istringstream is(ini_text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  auto& g = c.geometry;
  g.n_rows = get(tree, "geometry.rows", g.n_rows);
  g.n_cols = get(tree, "geometry.cols", g.n_cols);
  g.pixel_size = get(tree, "geometry.pixel_size", g.pixel_size);
  g.n_views = get(tree, "geometry.views", g.n_views);
  g.n_dets = get(tree, "geometry.dets", g.n_dets);
  g.det_spacing = get(tree, "geometry.det_spacing", g.det_spacing);

  c.phantom = parse_phantom_kind(get<std::string>(tree, "phantom.kind", std::string(to_string(c.phantom))));
  c.disc_value = get(tree, "phantom.disc_value", c.disc_value);

  c.incident = get(tree, "scan.incident", c.incident);
  c.noiseless = get_bool(tree, "scan.noiseless", c.noiseless);

  c.reg.lambda = get(tree, "regularizer.lambda", c.reg.lambda);
  c.reg.delta = get(tree, "regularizer.delta", c.reg.delta);
  c.neighborhood = get(tree, "regularizer.neighborhood", c.neighborhood);

  auto& s = c.solver;
  s.method = parse_solver_method(
      get<std::string>(tree, "solver.method", std::string(to_string(s.method))));
  s.grad_tol = get(tree, "solver.grad_tol", s.grad_tol);
  s.step_tol = get(tree, "solver.step_tol", s.step_tol);
  s.max_iters = get(tree, "solver.max_iters", s.max_iters);
  s.tr_initial_radius = get(tree, "solver.initial_radius", s.tr_initial_radius);
  s.tr_fixed_radius = get(tree, "solver.fixed_radius", s.tr_fixed_radius);
  s.tr_eta = get(tree, "solver.eta", s.tr_eta);

  if (auto algs = tree.get_optional<std::string>("experiment.algorithms")) {
    c.algorithms.clear();
    for (const auto& name : split_list(*algs)) c.algorithms.push_back(parse_scheme(name));
  }
  if (auto subs = tree.get_optional<std::string>("experiment.subsets")) {
    c.subsets.clear();
    for (const auto& v : split_list(*subs)) {
      try {
        c.subsets.push_back(std::stoul(v));
      } catch (const std::exception&) {
        throw std::invalid_argument("config: bad subset count '" + v + "'");
      }
    }
  }
  c.max_passes = get(tree, "experiment.max_passes", c.max_passes);
  c.seed = get(tree, "experiment.seed", c.seed);
  c.initial_value = get(tree, "experiment.initial_value", c.initial_value);
  c.reference_passes = get(tree, "experiment.reference_passes", c.reference_passes);
  c.output_dir = get<std::string>(tree, "experiment.output_dir", c.output_dir.string());
  c.threads = get(tree, "experiment.threads", c.threads);
  c.reproducible = get_bool(tree, "experiment.reproducible", c.reproducible);
  c.window.lo = get(tree, "experiment.window_lo", c.window.lo);
  c.window.hi = get(tree, "experiment.window_hi", c.window.hi);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_ini(const ExperimentConfig& c) {
  std::vector<std::string> algs, subs;
  for (auto a : c.algorithms) algs.emplace_back(to_string(a));
  for (auto b : c.subsets) subs.push_back(std::to_string(b));
  std::ostringstream os;
  os << std::setprecision(17) << std::boolalpha;
  const auto& g = c.geometry;
  os << "[geometry]\nrows = " << g.n_rows << "\ncols = " << g.n_cols
     << "\npixel_size = " << g.pixel_size << "\nviews = " << g.n_views << "\ndets = " << g.n_dets
     << "\ndet_spacing = " << g.det_spacing << "\n\n";
  os << "[phantom]\nkind = " << to_string(c.phantom) << "\ndisc_value = " << c.disc_value
     << "\n\n";
  os << "[scan]\nincident = " << c.incident << "\nnoiseless = " << c.noiseless << "\n\n";
  os << "[regularizer]\nlambda = " << c.reg.lambda << "\ndelta = " << c.reg.delta
     << "\nneighborhood = " << c.neighborhood << "\n\n";
  const auto& s = c.solver;
  os << "[solver]\nmethod = " << to_string(s.method) << "\ngrad_tol = " << s.grad_tol
     << "\nstep_tol = " << s.step_tol
     << "\nmax_iters = " << s.max_iters << "\ninitial_radius = " << s.tr_initial_radius
     << "\nfixed_radius = " << s.tr_fixed_radius << "\neta = " << s.tr_eta << "\n\n";
  os << "[experiment]\nalgorithms = " << join(algs) << "\nsubsets = " << join(subs)
     << "\nmax_passes = " << c.max_passes << "\nseed = " << c.seed
     << "\ninitial_value = " << c.initial_value << "\nreference_passes = " << c.reference_passes
     << "\noutput_dir = " << c.output_dir.string() << "\nthreads = " << c.threads
     << "\nreproducible = " << c.reproducible << "\nwindow_lo = " << c.window.lo
     << "\nwindow_hi = " << c.window.hi << "\n";
  return os.str();
}

}  // namespace jsct
