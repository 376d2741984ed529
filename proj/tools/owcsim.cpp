// owcsim command-line driver: runs the simulator experiments and writes the
// CSV bundles. Exit codes: 0 success, 1 configuration error, 2 experiment
// failure.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>

#include "owcsim/experiments.hpp"
#include "owcsim/grid.hpp"

namespace {

owcsim::harness::RunOptions make_options(const std::string& config_path, std::uint64_t seed,
                                         const std::string& out_dir) {
  owcsim::harness::RunOptions opts;
  if (!config_path.empty())
    opts = owcsim::harness::RunOptions::from_config(owcsim::cfg::Config::load(config_path));
  opts.seed = seed;
  opts.out_dir = out_dir;
  return opts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"owcsim: indoor optical-wireless NOMA + ranging simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", experiment;
  std::uint64_t seed = 1;

  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("experiment", experiment, "one of: success_prob localization_pdf crlb_cdf grouping_map sum_rate_cdf fov_opt")
      ->required();
  run->add_option("--config", config_path, "scenario config file");
  run->add_option("--seed", seed, "master seed");
  run->add_option("--out", out_dir, "output directory");

  auto* run_all = app.add_subcommand("run-all", "Run every experiment and write a manifest");
  run_all->add_option("--config", config_path, "scenario config file");
  run_all->add_option("--seed", seed, "master seed");
  run_all->add_option("--out", out_dir, "output directory");

  auto* grid = app.add_subcommand("grid", "Print the candidate-location grid");
  grid->add_option("--spec", config_path, "scenario config file")->required(false);

  auto* validate = app.add_subcommand("validate-config", "Parse and validate a config file");
  std::string validate_path;
  validate->add_option("file", validate_path, "config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      try {
        owcsim::Scenario::load(validate_path);
      } catch (const std::exception& e) {
        std::fprintf(stderr, "invalid config: %s\n", e.what());
        return 1;
      }
      std::printf("ok\n");
      return 0;
    }

    if (grid->parsed()) {
      owcsim::Scenario scn = owcsim::Scenario::table1();
      if (!config_path.empty()) scn = owcsim::Scenario::load(config_path);
      const auto points =
          owcsim::harness::generate_grid(scn, owcsim::harness::GridSpec{scn.resolution_m});
      std::printf("x,y\n");
      for (const auto& p : points) std::printf("%.10g,%.10g\n", p.x, p.y);
      std::fprintf(stderr, "%zu locations\n", points.size());
      return 0;
    }

    owcsim::harness::RunOptions opts;
    try {
      opts = make_options(config_path, seed, out_dir);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "configuration error: %s\n", e.what());
      return 1;
    }

    if (run->parsed()) {
      const auto files = owcsim::harness::run_experiment(experiment, opts);
      for (const auto& f : files) std::printf("%s\n", f.c_str());
      return 0;
    }
    if (run_all->parsed()) {
      const auto bundle = owcsim::harness::run_all(opts);
      for (const auto& f : bundle.files) std::printf("%s\n", f.c_str());
      std::printf("%s\n", bundle.manifest_path.c_str());
      for (const auto& [id, reason] : bundle.failures)
        std::fprintf(stderr, "experiment %s failed: %s\n", id.c_str(), reason.c_str());
      return bundle.ok() ? 0 : 2;
    }
  } catch (const owcsim::cfg::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 1;
  } catch (const owcsim::ScenarioError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "experiment failed: %s\n", e.what());
    return 2;
  }
  return 0;
}
