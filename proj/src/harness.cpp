#include "jsct/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "jsct/parallel.hpp"

namespace jsct {

namespace {

using clock = std::chrono::steady_clock;

double seconds_since(clock::time_point t0) {
  return std::chrono::duration<double>(clock::now() - t0).count();
}

std::string format17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ImageVolume as_image(const Geometry& g, std::span<const double> x) {
  ImageVolume img(g.n_rows, g.n_cols, 1, g.pixel_size);
  std::copy(x.begin(), x.end(), img.data.begin());
  return img;
}

struct RawRun {
  Scheme scheme;
  std::size_t subsets;
  std::vector<ProgressRecord> history;
  std::vector<double> x;
  std::optional<std::string> error;
  double wall_seconds = 0.0;
  IterationDiagnostics diagnostics;
  double lipschitz = 0.0;
};

nlohmann::json diagnostics_json(const IterationDiagnostics& d) {
  return {{"solver_max_iters", d.solver_max_iters},
          {"solver_failures", d.solver_failures},
          {"degenerate_zero_estimate", d.degenerate_zero_estimate},
          {"degenerate_zero_counts", d.degenerate_zero_counts},
          {"degenerate_empty", d.degenerate_empty},
          {"lipschitz_converged", d.lipschitz_converged}};
}

}  // namespace

ExperimentSetup build_setup(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentSetup s;
  s.phantom = make_phantom(cfg.phantom, cfg.geometry, cfg.disc_value);
  s.H = build_system_matrix(cfg.geometry, &s.warnings);
  const double i0[] = {cfg.incident};
  s.scan = simulate_counts(s.H, s.phantom.x_true.data, i0, cfg.seed, cfg.noiseless);
  if (s.scan.clamped_rays > 0)
    s.warnings.push_back(std::to_string(s.scan.clamped_rays) +
                         " rays had line integrals above 700; their mean counts were set to 0");
  return s;
}

Problem make_problem(const ExperimentConfig& cfg, const ExperimentSetup& setup) {
  return Problem(cfg.geometry, setup.H, setup.scan.data, cfg.make_neighborhood());
}

ReferenceOptimum compute_reference_optimum(const Problem& problem, const AlgorithmConfig& base,
                                           double passes) {
  AlgorithmConfig cfg = base;
  cfg.scheme = Scheme::full_js;
  cfg.n_subsets = 1;
  cfg.max_passes = passes;
  ReferenceOptimum ref;
  ref.phi = std::numeric_limits<double>::infinity();
  ref.passes = passes;
  const auto result = run(problem, cfg, [&](const ProgressRecord& r, std::span<const double> x) {
    if (r.objective && *r.objective < ref.phi) {
      ref.phi = *r.objective;
      ref.x.assign(x.begin(), x.end());
    }
  });
  const auto& h = result.history;
  if (h.size() >= 2) {
    const double prev = *h[h.size() - 2].objective;
    const double last = *h.back().objective;
    ref.tail_relative_drop = (prev - last) / std::abs(last);
    if (ref.tail_relative_drop > 1e-8) {
      std::ostringstream os;
      os.precision(3);
      os << "reference run still decreasing: relative drop " << ref.tail_relative_drop
         << " over its final pass";
      ref.warning = os.str();
    }
  }
  return ref;
}

double normalized_error(double phi, double phi_star) {
  return (phi - phi_star) / std::abs(phi_star);
}

void write_convergence_csv(const std::filesystem::path& path,
                           const std::vector<ConvergenceRecord>& records) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << "algorithm,pass,objective,normalized_error,wall_seconds\n";
  for (const auto& r : records)
    os << r.algorithm << ',' << format17(r.pass) << ',' << format17(r.objective) << ','
       << format17(r.normalized_error) << ',' << format17(r.wall_seconds) << '\n';
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::vector<ConvergenceRecord> read_convergence_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(is, line);
  if (line != "algorithm,pass,objective,normalized_error,wall_seconds")
    throw std::runtime_error("unexpected CSV header in " + path.string());
  std::vector<ConvergenceRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    ConvergenceRecord r;
    std::string field;
    std::getline(ls, r.algorithm, ',');
    double* targets[] = {&r.pass, &r.objective, &r.normalized_error, &r.wall_seconds};
    for (double* t : targets) {
      if (!std::getline(ls, field, ','))
        throw std::runtime_error("short CSV row in " + path.string());
      *t = std::stod(field);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::optional<double> error_at_pass(const std::vector<ConvergenceRecord>& records, double pass) {
  std::optional<double> e;
  for (const auto& r : records) {
    if (r.pass > pass + 1e-9) break;
    e = r.normalized_error;
  }
  return e;
}

std::vector<std::string> check_records(const std::vector<ConvergenceRecord>& records,
                                       bool monotone) {
  std::vector<std::string> issues;
  for (std::size_t t = 0; t < records.size(); ++t) {
    const auto& r = records[t];
    if (r.normalized_error < -1e-9)
      issues.push_back(r.algorithm + ": negative normalized error at pass " + format17(r.pass));
    if (t == 0) continue;
    const auto& p = records[t - 1];
    if (!(r.pass > p.pass))
      issues.push_back(r.algorithm + ": pass not increasing at row " + std::to_string(t + 1));
    if (monotone && r.normalized_error > p.normalized_error + 1e-9 * (1.0 + std::abs(p.normalized_error)))
      issues.push_back(r.algorithm + ": error increased at pass " + format17(r.pass));
  }
  return issues;
}

const AlgorithmRun* ExperimentSummary::find(Scheme scheme, std::size_t subsets) const {
  for (const auto& r : runs)
    if (r.scheme == scheme && (is_full_scheme(scheme) || r.subsets == subsets)) return &r;
  return nullptr;
}

bool ExperimentSummary::ok() const {
  if (!check_failures.empty()) return false;
  return std::none_of(runs.begin(), runs.end(), [](const AlgorithmRun& r) { return r.error; });
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  set_thread_count(cfg.threads);
  const auto t_start = clock::now();
  const auto setup = build_setup(cfg);
  const Problem problem = make_problem(cfg, setup);

  ExperimentSummary summary;
  const auto t_ref = clock::now();
  summary.reference = compute_reference_optimum(
      problem, cfg.algorithm_config(Scheme::full_js, 1), cfg.reference_passes);
  const double ref_seconds = seconds_since(t_ref);
  auto& ref = summary.reference;

  std::vector<RawRun> raw;
  std::map<Scheme, std::size_t> full_cache;
  for (auto b : cfg.subsets) {
    for (auto scheme : cfg.algorithms) {
      if (is_full_scheme(scheme)) {
        if (auto it = full_cache.find(scheme); it != full_cache.end()) {
          RawRun copy = raw[it->second];
          copy.subsets = b;
          raw.push_back(std::move(copy));
          continue;
        }
      }
      RawRun rr{scheme, b, {}, {}, std::nullopt, 0.0, {}, 0.0};
      const auto t0 = clock::now();
      const std::string label = std::string(to_string(scheme));
      try {
        auto result = run(problem, cfg.algorithm_config(scheme, b),
                          [&](const ProgressRecord& r, std::span<const double> x) {
                            if (r.objective && *r.objective < ref.phi) {
                              ref.phi = *r.objective;
                              ref.x.assign(x.begin(), x.end());
                              ref.source = label + "/B=" + std::to_string(b);
                            }
                          });
        rr.history = std::move(result.history);
        rr.x = std::move(result.x);
        rr.diagnostics = result.diagnostics;
        rr.lipschitz = result.lipschitz;
      } catch (const std::exception& e) {
        rr.error = e.what();
      }
      rr.wall_seconds = seconds_since(t0);
      if (is_full_scheme(scheme)) full_cache[scheme] = raw.size();
      raw.push_back(std::move(rr));
    }
  }

  const auto& out = cfg.output_dir;
  std::filesystem::create_directories(out);
  render_image(setup.phantom.x_true, out / "phantom.pgm", cfg.window);
  render_image(as_image(cfg.geometry, ref.x), out / "reference.pgm", cfg.window);

  nlohmann::json runs_json = nlohmann::json::array();
  for (const auto& rr : raw) {
    AlgorithmRun run_out;
    run_out.scheme = rr.scheme;
    run_out.subsets = rr.subsets;
    run_out.error = rr.error;
    run_out.wall_seconds = rr.wall_seconds;
    const std::string name(to_string(rr.scheme));
    const auto dir = out / ("subsets_" + std::to_string(rr.subsets));
    for (const auto& h : rr.history)
      run_out.records.push_back({name, h.passes, *h.objective,
                                 normalized_error(*h.objective, ref.phi),
                                 cfg.reproducible ? 0.0 : h.wall_seconds});
    run_out.csv_path = dir / (name + ".csv");
    write_convergence_csv(run_out.csv_path, run_out.records);
    if (!rr.x.empty()) render_image(as_image(cfg.geometry, rr.x), dir / (name + ".pgm"), cfg.window);

    // Post-hoc checks read back what was written.
    const auto reread = read_convergence_csv(run_out.csv_path);
    for (auto& issue : check_records(reread, rr.scheme == Scheme::full_js))
      summary.check_failures.push_back("subsets_" + std::to_string(rr.subsets) + "/" + issue);

    nlohmann::json j = {{"algorithm", name},
                        {"subsets", rr.subsets},
                        {"status", rr.error ? "failed" : "ok"},
                        {"wall_seconds", rr.wall_seconds},
                        {"csv", std::filesystem::relative(run_out.csv_path, out).string()},
                        {"diagnostics", diagnostics_json(rr.diagnostics)}};
    if (rr.error) j["error"] = *rr.error;
    if (!is_jensen_scheme(rr.scheme)) j["lipschitz"] = rr.lipschitz;
    if (!run_out.records.empty()) j["final_normalized_error"] = run_out.records.back().normalized_error;
    runs_json.push_back(std::move(j));
    summary.runs.push_back(std::move(run_out));
  }

  nlohmann::json meta = {
      {"library_version", kLibraryVersion},
      {"config", config_to_ini(cfg)},
      {"seed", cfg.seed},
      {"reproducible", cfg.reproducible},
      {"threads", cfg.threads},
      {"warnings", setup.warnings},
      {"reference_optimum",
       {{"phi_star", ref.phi},
        {"source", ref.source},
        {"reference_passes", ref.passes},
        {"tail_relative_drop", ref.tail_relative_drop},
        {"tail_warning", ref.warning ? nlohmann::json(*ref.warning) : nlohmann::json(nullptr)},
        {"wall_seconds", ref_seconds}}},
      {"runs", runs_json},
      {"check_failures", summary.check_failures},
      {"total_wall_seconds", seconds_since(t_start)},
  };
  summary.metadata_path = out / "metadata.json";
  std::ofstream ms(summary.metadata_path);
  if (!ms) throw std::runtime_error("cannot write " + summary.metadata_path.string());
  ms << meta.dump(2) << '\n';
  return summary;
}

}  // namespace jsct
