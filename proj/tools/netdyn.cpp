#include <iostream>

#include <CLI11.hpp>

#include "netdyn/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Event-driven simulator and analyzer for inhibitory pacemaker networks"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_prefix;

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"constants", "print the system constants (alpha, lambda, ...)"},
      {"simulate", "iterate one orbit of the return map"},
      {"cycles", "find limit cycles from random starts"},
      {"classify", "classify random starts and estimate the stable/chaotic measures"},
      {"atoms", "refine atoms generation by generation and extract chains"},
  };
  std::vector<CLI::App*> subs;
  std::vector<CLI::Option*> seed_opts;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
    seed_opts.push_back(sub->add_option("--seed", seed, "RNG seed (overrides the config)"));
    sub->add_option("--out", out_prefix, "output path prefix (overrides the config)");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : netdyn::kExitConfig;
  }

  netdyn::RunConfig cfg;
  try {
    cfg = netdyn::load_config(config_path);
  } catch (const netdyn::ConfigError& e) {
    std::cerr << "netdyn: config error: " << config_path << ": " << e.what() << '\n';
    return netdyn::kExitConfig;
  }
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    cfg.command = netdyn::parse_command(subs[i]->get_name());
    if (seed_opts[i]->count() > 0) cfg.seed = seed;
  }
  if (!out_prefix.empty()) cfg.out_prefix = out_prefix;
  return netdyn::run(cfg, std::cout, std::cerr);
}
