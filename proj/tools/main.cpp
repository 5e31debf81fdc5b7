// collapse-lab: reproduce the closed-form collapse geometry results and the
// non-collapse counterexamples from config-driven experiments.
//
//   collapse-lab run <config.json> [--plot] [--out DIR]
//   collapse-lab verify <suite>
//
// Exit codes: 0 success, 2 invalid config/arguments, 3 non-convergence.

#include <CLI11.hpp>
#include <exception>
#include <iostream>

#include "nclab/errors.hpp"
#include "nclab/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for softmax classifier collapse geometry"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  bool plot = false;
  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("config", config_path, "path to the experiment config")->required();
  run->add_flag("--plot", plot, "also write plot.svg");
  auto* out_opt = run->add_option("--out", out_dir, "output directory (default: out)");

  std::string suite;
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify
      ->add_option("suite", suite,
                   "one of: oracle, hessian, collapse, penultimate, ode, margin, all")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : nclab::kExitConfigError;
  }

  try {
    if (run->parsed()) {
      const auto config = nclab::parse_config_file(config_path);
      // The config may carry its own output directory; the flag wins.
      return nclab::run_experiment(config, out_opt->count() ? out_dir : config.out, plot);
    }
    return nclab::run_verify(suite, std::cout);
  } catch (const nclab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return nclab::kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return nclab::kExitConfigError;
  } catch (const nclab::NonConverged& e) {
    std::cerr << "non-converged: " << e.what() << '\n';
    return nclab::kExitNonConverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
