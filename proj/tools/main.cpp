// augclip command-line front end: describe -> embed -> score -> evaluate -> ablate,
// plus synth for generated datasets.

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "augclip/error.hpp"
#include "commands.hpp"
#include "run_config.hpp"

namespace {

struct Subcommand {
  const char* name;
  const char* help;
};

constexpr Subcommand kSubcommands[] = {
    {"describe", "generate attribute descriptions for cases that lack them"},
    {"embed", "encode payloads and descriptions into an embedding store"},
    {"score", "score every case with the configured metrics"},
    {"evaluate", "recompute protocol statistics from a stored report"},
    {"ablate", "score the fitter x weighting grid"},
    {"synth", "write a synthetic dataset"},
};

}  // namespace

int main(int argc, char** argv) {
  using namespace augclip::cli;

  CLI::App app{"AugCLIP image-editing evaluation"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  RunConfig cfg;
  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::map<std::string, CLI::Option*>> opts;

  for (const auto& sub : kSubcommands) {
    CLI::App* s = app.add_subcommand(sub.name, sub.help);
    s->add_option("--config", cfg.config_file, "JSON config file (flags override it)");
    s->add_flag("--dry-run", cfg.dry_run, "print the resolved configuration and exit");
    const auto groups = groups_for(sub.name);
    for (const auto& spec : option_specs()) {
      if (std::find(groups.begin(), groups.end(), spec.group) == groups.end()) continue;
      opts[sub.name][spec.key] =
          s->add_option(flag_name(spec.key), raw[sub.name][spec.key], spec.help);
    }
    s->callback([&cfg, name = std::string(sub.name)] { cfg.subcommand = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    std::map<std::string, std::string> flags;
    for (const auto& [key, opt] : opts[cfg.subcommand]) {
      if (opt->count() > 0) flags[key] = raw[cfg.subcommand][key];
    }
    resolve(cfg, flags);
    validate_paths(cfg);
    if (cfg.dry_run) {
      std::cout << to_json(cfg).dump(2) << '\n';
      return kExitOk;
    }
    return dispatch(cfg);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const augclip::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
