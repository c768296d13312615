// Batch experiment runner for parametrized Friedrichs' systems: structural
// validation, classification, DG solves, snapshot sweeps and N-width decay
// measurements (classic and sectional).
#include <CLI11.hpp>

#include "fsw/cli/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fswidth - Friedrichs' systems, upwind DG and Kolmogorov N-width decay"};
  app.require_subcommand(1);

  fsw::cli::RunOptions opts;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"validate", "check FS1/FS2, M1 and Gram positivity; exit 2 on failure"},
      {"classify", "exponential-approximability certificate for a system"},
      {"solve", "single DG solve at a fixed parameter"},
      {"sweep", "snapshot sweep over a parameter sample"},
      {"nwidth", "POD/greedy decay measurement with an exponential fit"},
      {"sectional", "sectional width estimate over section dictionaries"},
      {"report", "plot-ready long-format CSV + gnuplot script from prior runs"},
  };

  for (const auto& [name, desc] : commands) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", opts.config_path, "JSON experiment config")->required();
    sub->add_option("--out", opts.out_override, "output directory (overrides the config)");
    sub->add_option("--seed", opts.seed, "sampling seed override");
    sub->add_option("--threads", opts.threads_override, "worker threads (0 = auto)");
    sub->add_flag("--check", opts.check, "verify outputs against the recorded manifest");
    sub->add_flag("--debug-matrices", opts.debug_matrices, "dump Matrix Market system matrices");
    sub->callback([&opts, name = name]() { opts.command = name; });
  }

  CLI11_PARSE(app, argc, argv);
  return fsw::cli::run(opts);
}
