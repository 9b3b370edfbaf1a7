// Command-line driver: runs a scenario config to its end time and writes
// probes, field snapshots, and the run manifest.

#include <CLI11.hpp>

#include "perifsi/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"perifsi — immersed B-spline/peridynamics blast FSI simulator"};
  app.require_subcommand(1);

  perifsi::RunOptions opts;
  auto* run = app.add_subcommand("run", "run a scenario config");
  run->add_option("config", opts.config_path, "JSON scenario config")->required();
  run->add_option("--out", opts.out_dir, "output directory (default: out)");
  run->add_option("--level", opts.level,
                  "discretization level override (coarse|medium|fine|D1..D4)");
  run->add_option("--steps", opts.max_steps, "cap the number of time steps");
  run->add_flag("--seed-check", opts.seed_check,
                "run twice and verify bitwise-identical probe output");
  run->add_option("--set", opts.overrides,
                  "config override key=value (dotted keys, repeatable)");

  CLI11_PARSE(app, argc, argv);
  return perifsi::run(opts);
}
