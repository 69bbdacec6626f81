#include "orbispec/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"orbispec: Laplace spectra of 2-orbifolds and collapsed connected sums"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("config", config_path, "path to the JSON run config")->required();
  run->add_option("--out", out_dir, "output directory (overrides config)");
  run->add_option("--seed", seed, "solver seed (overrides config)")->each([&](const std::string&) {
    seed_set = true;
  });
  run->add_option("--threads", threads, "parallel sweep entries")->check(CLI::PositiveNumber);

  auto* desc = app.add_subcommand("describe", "print resolved parameters, no computation");
  desc->add_option("config", config_path, "path to the JSON run config")->required();

  CLI11_PARSE(app, argc, argv);

  orbi::RunConfig config;
  try {
    config = orbi::parse_config_file(config_path);
  } catch (const std::exception& e) {
    std::cout << "ERROR schema: " << e.what() << "\n";
    return 2;
  }

  if (desc->parsed()) {
    std::cout << orbi::describe(config);
    return 0;
  }

  orbi::RunOverrides ov;
  if (!out_dir.empty()) ov.out_dir = out_dir;
  if (seed_set) ov.seed = seed;
  ov.threads = threads;
  return orbi::run_experiment(config, ov);
}
