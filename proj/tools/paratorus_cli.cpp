#include "paratorus/config.hpp"
#include "paratorus/demos.hpp"
#include "paratorus/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace paratorus;

int main(int argc, char** argv) {
  CLI::App app{"Paradifferential KAM toolkit on the torus"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_dir;
  int symbolic_r = 2;
  bool list = false;
  app.add_option("--config", config_path, "JSON experiment config (schema_version 1)");
  CLI::Option* seed_opt = app.add_option("--seed", seed, "RNG seed, overrides the config");
  app.add_option("--threads", threads, "OpenMP threads (0: runtime default)");
  CLI::Option* out_opt = app.add_option("--out-dir", out_dir, "artifact directory, overrides the config");
  app.add_option("--symbolic-r", symbolic_r, "expansion order of the symbolic calculus (calculus-check)");
  app.add_flag("--list-families", list, "print the built-in problem families and exit");

  for (const std::string& c : experiment_commands()) app.add_subcommand(c)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  if (list) {
    for (const DemoFamily& f : demo_registry())
      std::cout << f.key << " (n = " << (f.n ? std::to_string(f.n) : "any") << ", N = " << f.N << "): " << f.description
                << "\n";
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  ExperimentConfig cfg;
  try {
    cfg = default_config(command);
    if (!config_path.empty()) cfg = load_config(config_path, cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  RunOptions opt;
  if (*seed_opt) opt.seed = seed;
  if (*out_opt) opt.out_dir = out_dir;
  opt.threads = threads;
  opt.symbolic_r = symbolic_r;
  return run_experiment(command, cfg, opt, std::cout);
}
