#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "prosocial/cli/commands.hpp"
#include "prosocial/cli/config.hpp"
#include "prosocial/version.hpp"

namespace cli = prosocial::cli;

int main(int argc, char** argv) {
  CLI::App app{"Norm-extended prosocial signaling model: beliefs, equilibria, sweeps and a synthetic survey experiment"};
  app.set_version_flag("--version", std::string(prosocial::kVersion));
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Random seed (overrides the config)");
  app.add_option("--out", out, "Output directory (overrides " + std::string(cli::kOutDirEnv) + " and the config)");
  app.add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "json"}));

  const char* descriptions[] = {
      "Analytic observer beliefs next to a Monte Carlo oracle over a threshold grid",
      "Agent decisions on a lattice for each (S_vv, c) panel plus a threshold summary",
      "Equilibrium and simulated participation over a parameter cross product",
      "Reputation cost curves of an incentive over a cost grid",
      "Solve for the norm S_vv that produces target participation rates",
      "Synthetic multi-country survey and pooled logistic fit of norm x incentive",
  };
  for (std::size_t i = 0; i < cli::subcommands().size(); ++i) {
    app.add_subcommand(cli::subcommands()[i], descriptions[i])->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(cli::ExitCode::config_error);
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  cli::RunConfig cfg;
  try {
    cfg = config_path.empty() ? cli::default_config() : cli::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (format) cfg.format = cli::parse_format(*format);
  } catch (const prosocial::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return static_cast<int>(cli::ExitCode::config_error);
  }
  const auto out_dir = cli::resolve_out_dir(out, std::getenv(cli::kOutDirEnv.data()), cfg);
  return static_cast<int>(cli::execute(sub, cfg, out_dir, std::cerr));
}
