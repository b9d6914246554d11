// Command-line front end: run experiments, write phantoms and sinograms,
// reconstruct a stored sinogram.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "jsct/harness.hpp"
#include "jsct/image_io.hpp"
#include "jsct/parallel.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<std::size_t> threads;
  bool reproducible = false;
};

jsct::ExperimentConfig load(const std::string& path, const Overrides& o) {
  auto cfg = path.empty() ? jsct::ExperimentConfig{} : jsct::load_config(path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.threads) cfg.threads = *o.threads;
  if (o.reproducible) cfg.reproducible = true;
  cfg.validate();
  jsct::set_thread_count(cfg.threads);
  return cfg;
}

void print_line(const nlohmann::json& j) { std::cout << j.dump() << std::endl; }

int fail(const std::string& message) {
  std::cerr << nlohmann::json{{"error", message}}.dump() << std::endl;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jensen-surrogate transmission CT reconstruction"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  Overrides o;
  app.add_option("--seed", o.seed, "Override the experiment seed");
  app.add_option("--output-dir", o.output_dir, "Override the output directory");
  app.add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--reproducible", o.reproducible, "Bitwise-reproducible CSV output");

  std::string config_path, kind, out, sinogram;

  auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a config file");
  run_cmd->add_option("config", config_path)->required()->check(CLI::ExistingFile);

  auto* phantom_cmd = app.add_subcommand("phantom", "Write a phantom as PGM plus raw dump");
  phantom_cmd->add_option("kind", kind)->required();
  phantom_cmd->add_option("out", out)->required();
  phantom_cmd->add_option("--config", config_path, "Geometry source")->check(CLI::ExistingFile);

  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a sinogram for a config");
  sim_cmd->add_option("config", config_path)->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("out", out)->required();

  auto* rec_cmd = app.add_subcommand(
      "reconstruct", "Reconstruct a sinogram with the config's first algorithm and subset count");
  rec_cmd->add_option("config", config_path)->required()->check(CLI::ExistingFile);
  rec_cmd->add_option("sinogram", sinogram)->required()->check(CLI::ExistingFile);
  rec_cmd->add_option("out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(e.what());
  }

  try {
    if (*run_cmd) {
      const auto cfg = load(config_path, o);
      const auto summary = jsct::run_experiment(cfg);
      nlohmann::json runs = nlohmann::json::array();
      for (const auto& r : summary.runs) {
        nlohmann::json j = {{"algorithm", jsct::to_string(r.scheme)}, {"subsets", r.subsets}};
        if (r.error) j["error"] = *r.error;
        if (!r.records.empty()) j["final_normalized_error"] = r.records.back().normalized_error;
        runs.push_back(std::move(j));
      }
      print_line({{"status", summary.ok() ? "ok" : "failed"},
                  {"phi_star", summary.reference.phi},
                  {"metadata", summary.metadata_path.string()},
                  {"check_failures", summary.check_failures},
                  {"runs", runs}});
      return summary.ok() ? 0 : 1;
    }
    if (*phantom_cmd) {
      const auto cfg = load(config_path, o);
      const auto ph = jsct::make_phantom(jsct::parse_phantom_kind(kind), cfg.geometry, cfg.disc_value);
      jsct::render_image(ph.x_true, out, cfg.window);
      print_line({{"status", "ok"}, {"image", out}, {"raw", out + ".raw"}});
      return 0;
    }
    if (*sim_cmd) {
      const auto cfg = load(config_path, o);
      const auto setup = jsct::build_setup(cfg);
      jsct::write_sinogram(out, cfg.geometry, setup.scan.data);
      print_line({{"status", "ok"},
                  {"sinogram", out},
                  {"rays", cfg.geometry.ray_count()},
                  {"clamped_rays", setup.scan.clamped_rays},
                  {"warnings", setup.warnings}});
      return 0;
    }
    if (*rec_cmd) {
      const auto cfg = load(config_path, o);
      auto data = jsct::read_sinogram(sinogram, cfg.geometry);
      const jsct::Problem problem(cfg.geometry, jsct::build_system_matrix(cfg.geometry),
                                  std::move(data), cfg.make_neighborhood());
      const auto scheme = cfg.algorithms.front();
      const auto result = jsct::run(problem, cfg.algorithm_config(scheme, cfg.subsets.front()));
      jsct::ImageVolume img(cfg.geometry.n_rows, cfg.geometry.n_cols, 1, cfg.geometry.pixel_size);
      img.data = result.x;
      jsct::render_image(img, out, cfg.window);
      print_line({{"status", "ok"},
                  {"algorithm", jsct::to_string(scheme)},
                  {"passes", cfg.max_passes},
                  {"objective", result.history.back().objective.value_or(0.0)},
                  {"image", out}});
      return 0;
    }
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  return fail("no subcommand");
}
