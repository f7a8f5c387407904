// Command-line driver for the ride-pooling pipeline.
#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "ridepool/error.hpp"
#include "ridepool/pipeline.hpp"
#include "ridepool/scenario.hpp"

namespace {

const char* stage_help(const std::string& stage) {
  if (stage == "gen") return "generate the road network and trip requests";
  if (stage == "graph") return "build the shareability graph";
  if (stage == "embed") return "compute user context features";
  if (stage == "train") return "train the co-rider selection policy";
  if (stage == "match") return "decode a matching with the trained policy";
  if (stage == "evaluate") return "compute the efficiency report for the matching";
  if (stage == "sweep") return "run the tolerance sensitivity sweep";
  return "run gen, graph, embed, train, match and evaluate in order";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ride-pooling engine: shareability graph, learned co-rider selection, evaluation."};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::optional<std::string> objective;
  app.add_option("--config", config_path, "INI config file; omitted keys take their defaults")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "master seed, overrides the config");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--objective", objective, "edge weighting, overrides the config")
      ->check(CLI::IsMember({"distance", "time", "vehicle"}));
  app.footer("Default configuration:\n" + ridepool::format_config(ridepool::ScenarioConfig{}));

  for (const std::string& stage : ridepool::stage_names()) app.add_subcommand(stage, stage_help(stage));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    ridepool::ScenarioConfig cfg =
        config_path.empty() ? ridepool::ScenarioConfig{} : ridepool::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (objective) cfg.objective = ridepool::parse_objective(*objective);
    cfg.validate();
    const std::string stage = app.get_subcommands().front()->get_name();
    for (const std::string& file : ridepool::run_stage(stage, cfg, out_dir))
      std::cout << "wrote " << (std::filesystem::path(out_dir) / file).string() << '\n';
    return 0;
  } catch (const ridepool::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
