// finite-key-lab: sweeps and verification runs over the finite-key rate formulas.
//
//   finite-key-lab <mode> --config <path> [--out <dir>] [--seed <u64>] [--svg] [overrides]

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fkl/app.hpp"

namespace {

// Command-line overrides that replace top-level config fields.
struct Overrides {
  std::optional<std::int64_t> d;
  std::optional<std::string> m;
  std::optional<double> epsilon;
  std::optional<double> beta;
  std::optional<double> delta;
  std::optional<std::int64_t> n;
  std::optional<std::int64_t> trials;
  std::optional<double> p_vac;
  std::optional<double> d0;
  std::optional<std::string> d0_model;
  std::vector<std::string> N_values;
  bool exact = false;

  void apply(nlohmann::json& config) const {
    if (d) config["d"] = *d;
    if (m) config["m"] = *m;
    if (epsilon) config["epsilon"] = *epsilon;
    if (beta) config["beta"] = *beta;
    if (delta) config["delta"] = *delta;
    if (n) config["n"] = *n;
    if (trials) config["trials"] = *trials;
    if (p_vac) config["p_vac"] = *p_vac;
    if (d0) config["d0"] = *d0;
    if (d0_model) config["d0_model"] = *d0_model;
    if (!N_values.empty()) {
      config["N_values"] = N_values;
      config.erase("N_grid");
    }
    if (exact) config["exact"] = true;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Finite-key rates, sampling bounds and |J_q| bounds"};
  cli.set_version_flag("--version", std::string(fkl::app::kVersion));

  std::string mode;
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool svg = false;
  Overrides overrides;

  cli.add_option("mode", mode, "Run mode")
      ->required()
      ->check(CLI::IsMember(fkl::app::modes()));
  cli.add_option("--config", config_path, "JSON run configuration");
  cli.add_option("--out", out_dir, "Output directory");
  cli.add_option("--seed", seed, "Seed for every random draw");
  cli.add_flag("--svg", svg, "Also write an SVG chart");
  cli.add_option("--d", overrides.d, "Alphabet size");
  cli.add_option("--m", overrides.m, "Test size (fraction of N below 1, else absolute)");
  cli.add_option("--epsilon", overrides.epsilon, "Security parameter epsilon");
  cli.add_option("--beta", overrides.beta, "Privacy-amplification exponent beta");
  cli.add_option("--delta", overrides.delta, "Sampling tolerance delta");
  cli.add_option("--n", overrides.n, "Unobserved length n");
  cli.add_option("--trials", overrides.trials, "Monte Carlo trials");
  cli.add_option("--p-vac", overrides.p_vac, "Vacuum fraction for the lossy curve");
  cli.add_option("--d0", overrides.d0, "Explicit mean symbol difference for ell_2");
  cli.add_option("--d0-model", overrides.d0_model, "shift or uniform-mismatch");
  cli.add_option("--N", overrides.N_values, "Total signal counts (replaces the config grid)");
  cli.add_flag("--exact", overrides.exact, "Add the exact |J_q| enumeration (jq-bound)");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : 1;
  }

  fkl::app::RunOptions options;
  options.mode = mode;
  options.out_dir = out_dir;
  options.seed = seed;
  options.svg = svg;
  try {
    if (!config_path.empty()) options.config = fkl::app::load_config(config_path);
    overrides.apply(options.config);
  } catch (const fkl::io::IoError& e) {
    std::cerr << "finite-key-lab: I/O error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "finite-key-lab: invalid configuration: " << e.what() << '\n';
    return 1;
  }

  const auto outcome = fkl::app::run(options);
  (outcome.exit_code == 0 ? std::cout : std::cerr) << "finite-key-lab: " << outcome.message << '\n';
  return outcome.exit_code;
}
