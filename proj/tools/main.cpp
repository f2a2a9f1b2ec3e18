#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cli.hpp"

int main(int argc, char** argv) {
  using singlab::cli::Experiment;
  CLI::App app{"singlab: collision experiments for singular Lagrangian systems"};
  app.require_subcommand(1);

  std::string config, out;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
  std::optional<Experiment> chosen;

  for (Experiment kind : {Experiment::Integrate, Experiment::Minimize, Experiment::Sundman, Experiment::Averaging,
                          Experiment::Assumptions, Experiment::Reduce}) {
    const std::string name(singlab::cli::subcommand_name(kind));
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (must not exist or be empty)")->required();
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_flag("--verbose", verbose, "progress on stderr");
    sub->callback([&chosen, kind] { chosen = kind; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return singlab::cli::run(*chosen, config, out, seed, verbose, std::cerr);
}
