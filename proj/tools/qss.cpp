#include <cstdint>

#include <CLI11.hpp>

#include "qss/commands.hpp"

// qss: analytic engine and sampling validator for (2,3) threshold sharing of
// coherent states. Every subcommand reads an optional scenario file and
// writes one output file; exit codes are documented in qss/commands.hpp.

int main(int argc, char** argv) {
  CLI::App app{"(2,3) threshold sharing of coherent states"};
  app.require_subcommand(1);

  qss::CommonOptions common;
  qss::GridOptions grid;
  qss::McOptions mc;

  auto add_common = [&](CLI::App* sub, bool raw_allowed) {
    sub->add_option("--config", common.config_path,
                    "scenario file (built-in experiment defaults if omitted)");
    sub->add_option("--out", common.out_path, "output file")->required();
    if (raw_allowed) {
      sub->add_flag("--raw-detection", common.raw_detection,
                    "report detected moments instead of correcting for homodyne loss");
    }
  };
  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--g-min", grid.g_min, "lowest electronic gain");
    sub->add_option("--g-max", grid.g_max, "highest electronic gain");
    sub->add_option("--steps", grid.steps, "number of grid points");
  };

  CLI::App* report = app.add_subcommand(
      "report", "full metric set for every access structure (JSON)");
  add_common(report, true);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "fidelity of {2,3} against electronic gain (CSV)");
  add_common(sweep, true);
  add_grid(sweep);

  CLI::App* tv = app.add_subcommand(
      "tv", "signal transfer and conditional variance against gain (CSV)");
  add_common(tv, true);
  add_grid(tv);

  CLI::App* validate = app.add_subcommand(
      "mc-validate", "compare shot-by-shot sampling against the analytic engine (JSON)");
  add_common(validate, false);
  std::uint64_t shots = 0, seed = 0;
  CLI::Option* shots_opt = validate->add_option("--shots", shots, "sampling shots");
  CLI::Option* seed_opt = validate->add_option("--seed", seed, "base RNG seed");
  validate
      ->add_option("--mc-perturb", mc.perturbation.out_plus_bias,
                   "bias added to sampled output amplitudes (self-test)")
      ->group("");

  CLI::App* bounds = app.add_subcommand(
      "bounds", "achieved figures against the classical benchmarks (JSON)");
  add_common(bounds, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (shots_opt->count() > 0) mc.shots = shots;
  if (seed_opt->count() > 0) mc.seed = seed;

  if (*report) return qss::cmd_report(common);
  if (*sweep) return qss::cmd_sweep(common, grid);
  if (*tv) return qss::cmd_tv(common, grid);
  if (*validate) return qss::cmd_mc_validate(common, mc);
  if (*bounds) return qss::cmd_bounds(common);
  return 2;
}
