#include "ridepool/pipeline.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ridepool/error.hpp"
#include "ridepool/io.hpp"

namespace ridepool {

namespace fs = std::filesystem;

MissingArtifactError::MissingArtifactError(const fs::path& file)
    : std::runtime_error("missing input file " + file.string() +
                         "; run the stage that produces it first") {}

namespace {

std::ifstream open_input(const fs::path& dir, std::string_view name) {
  const fs::path file = dir / name;
  if (!fs::is_regular_file(file)) throw MissingArtifactError(file);
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  return in;
}

void write_text(const fs::path& dir, std::string_view name, const std::string& text) {
  const fs::path file = dir / name;
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + file.string());
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

// Parse errors get the file name prefixed.
template <typename Fn>
auto parse_artifact(std::string_view name, Fn&& fn) {
  try {
    return fn();
  } catch (const StructuralError& e) {
    throw StructuralError(std::string(name) + ": " + e.what());
  }
}

// Inputs shared by the later stages, loaded lazily from the output directory.
struct Workspace {
  const ScenarioConfig& cfg;
  fs::path dir;
  RoadNetwork network;
  std::vector<TripRequest> trips;

  Workspace(const ScenarioConfig& c, fs::path d) : cfg(c), dir(std::move(d)) {
    auto net_in = open_input(dir, artifact::kNetwork);
    network = parse_artifact(artifact::kNetwork, [&] { return read_network(net_in); });
    auto trips_in = open_input(dir, artifact::kTrips);
    RouteCache cache(network);
    trips = parse_artifact(artifact::kTrips, [&] { return read_trips(trips_in, cache); });
  }

  ShareabilityGraph graph(RouteCache& cache) const {
    auto in = open_input(dir, artifact::kGraph);
    const GraphFile file = parse_artifact(artifact::kGraph, [&] { return read_graph_file(in); });
    if (file.objective != cfg.objective)
      throw StructuralError(std::string(artifact::kGraph) + " was built for objective '" +
                            std::string(objective_name(file.objective)) + "' but the run selects '" +
                            std::string(objective_name(cfg.objective)) + "'; rerun graph");
    return parse_artifact(artifact::kGraph, [&] { return restore_graph(file, trips, cache); });
  }

  FeatureMap features() const {
    auto in = open_input(dir, artifact::kFeatures);
    return parse_artifact(artifact::kFeatures, [&] { return read_features(in); });
  }

  RewardSpec reward_spec() const {
    return {cfg.objective, cfg.social_penalty_weight, cfg.tolerance};
  }
};

using Artifacts = std::vector<std::string>;

Artifacts stage_gen(const ScenarioConfig& cfg, const fs::path& dir) {
  const Scenario sc = generate_scenario(cfg);
  write_text(dir, artifact::kNetwork, render([&](std::ostream& o) { write_network(o, sc.network); }));
  write_text(dir, artifact::kTrips,
             render([&](std::ostream& o) { write_trips(o, sc.network, sc.trips); }));
  return {std::string(artifact::kNetwork), std::string(artifact::kTrips)};
}

Artifacts stage_graph(const ScenarioConfig& cfg, const fs::path& dir) {
  const Workspace ws(cfg, dir);
  const ShareabilityGraph graph =
      build_shareability_graph(ws.network, ws.trips, cfg.objective, cfg.constraints);
  write_text(dir, artifact::kGraph, render([&](std::ostream& o) { write_graph(o, graph); }));
  return {std::string(artifact::kGraph)};
}

Artifacts stage_embed(const ScenarioConfig& cfg, const fs::path& dir) {
  const Workspace ws(cfg, dir);
  const EmbeddingConfig ecfg = cfg.resolved_embedding();
  const GridIndex grid = GridIndex::covering(ws.network.positions(), ecfg.cell_size_deg);
  const InteractionMatrix interactions = build_interaction_matrix(ws.network, ws.trips, grid);
  const LayerEmbeddings emb = embed(interactions, ecfg);
  const SimilarityMatrices sim = compute_similarity(interactions.visits);
  write_text(dir, artifact::kFeatures,
             render([&](std::ostream& o) { write_features(o, user_features(emb)); }));
  write_text(dir, artifact::kSimilarity,
             render([&](std::ostream& o) { write_similarity(o, interactions, sim); }));
  return {std::string(artifact::kFeatures), std::string(artifact::kSimilarity)};
}

Artifacts stage_train(const ScenarioConfig& cfg, const fs::path& dir) {
  const Workspace ws(cfg, dir);
  RouteCache cache(ws.network);
  const ShareabilityGraph graph = ws.graph(cache);
  const FeatureMap features = ws.features();
  MatchEnvironment env(graph, features, ws.reward_spec(), cfg.capacity, &ws.network);
  TrainingLog log;
  const PolicyParams params = train_policy(env, cfg.resolved_ppo(), &log);
  write_text(dir, artifact::kPolicy, render([&](std::ostream& o) { write_checkpoint(o, params); }));
  write_text(dir, artifact::kTraining, render([&](std::ostream& o) { write_training_log(o, log); }));
  return {std::string(artifact::kPolicy), std::string(artifact::kTraining)};
}

Artifacts stage_match(const ScenarioConfig& cfg, const fs::path& dir) {
  const Workspace ws(cfg, dir);
  RouteCache cache(ws.network);
  const ShareabilityGraph graph = ws.graph(cache);
  const FeatureMap features = ws.features();
  auto policy_in = open_input(dir, artifact::kPolicy);
  const PolicyParams params =
      parse_artifact(artifact::kPolicy, [&] { return read_checkpoint(policy_in); });
  MatchEnvironment env(graph, features, ws.reward_spec(), cfg.capacity, &ws.network);
  if (params.input_dim() != policy_input_dim(env.feature_length()))
    throw StructuralError(std::string(artifact::kPolicy) +
                          ": input width does not match the feature length; rerun train");
  const MatchingSolution sol = match_all(env, params);
  write_text(dir, artifact::kMatching, render([&](std::ostream& o) { write_matching(o, sol); }));
  return {std::string(artifact::kMatching)};
}

Artifacts stage_evaluate(const ScenarioConfig& cfg, const fs::path& dir) {
  auto match_in = open_input(dir, artifact::kMatching);
  const auto records = parse_artifact(artifact::kMatching, [&] { return read_matching(match_in); });
  const Workspace ws(cfg, dir);
  RouteCache cache(ws.network);
  const ShareabilityGraph graph = ws.graph(cache);
  const MatchingSolution sol =
      parse_artifact(artifact::kMatching, [&] { return restore_matching(records, graph, cache); });
  if (!is_partition(sol, graph.trips(), cfg.capacity))
    throw StructuralError(std::string(artifact::kMatching) +
                          ": groups do not partition the trips within capacity");
  const auto outcomes = trip_outcomes(sol, graph, cfg.factors);
  const MetricsReport report = compute_report(sol, outcomes, cfg.factors);
  write_text(dir, artifact::kReportCsv, render([&](std::ostream& o) { write_report_csv(o, report); }));
  write_text(dir, artifact::kReportJson, report_json(report));
  return {std::string(artifact::kReportCsv), std::string(artifact::kReportJson)};
}

Artifacts stage_sweep(const ScenarioConfig& cfg, const fs::path& dir) {
  const Workspace ws(cfg, dir);
  const SweepTable table = sensitivity_sweep(ws.network, ws.trips, cfg.resolved_sweep());
  write_text(dir, artifact::kSweep, render([&](std::ostream& o) { write_sweep(o, table); }));
  return {std::string(artifact::kSweep)};
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names{"gen",   "graph",    "embed", "train",
                                              "match", "evaluate", "sweep", "all"};
  return names;
}

std::string manifest_json(std::string_view command, const ScenarioConfig& cfg,
                          const std::vector<std::string>& artifacts) {
  nlohmann::ordered_json doc;
  doc["version"] = kVersion;
  doc["command"] = command;
  doc["seed"] = cfg.seed;
  doc["artifacts"] = artifacts;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const auto& [key, value] : config_entries(cfg)) config[key] = value;
  doc["config"] = config;
  return doc.dump(2) + "\n";
}

std::vector<std::string> run_stage(std::string_view stage, const ScenarioConfig& cfg,
                                   const fs::path& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  Artifacts written;
  auto add = [&](Artifacts a) { written.insert(written.end(), a.begin(), a.end()); };
  if (stage == "gen") add(stage_gen(cfg, out_dir));
  else if (stage == "graph") add(stage_graph(cfg, out_dir));
  else if (stage == "embed") add(stage_embed(cfg, out_dir));
  else if (stage == "train") add(stage_train(cfg, out_dir));
  else if (stage == "match") add(stage_match(cfg, out_dir));
  else if (stage == "evaluate") add(stage_evaluate(cfg, out_dir));
  else if (stage == "sweep") add(stage_sweep(cfg, out_dir));
  else if (stage == "all") {
    add(stage_gen(cfg, out_dir));
    add(stage_graph(cfg, out_dir));
    add(stage_embed(cfg, out_dir));
    add(stage_train(cfg, out_dir));
    add(stage_match(cfg, out_dir));
    add(stage_evaluate(cfg, out_dir));
  } else {
    throw ConfigError("unknown stage '" + std::string(stage) + "'");
  }
  written.emplace_back(artifact::kManifest);
  write_text(out_dir, artifact::kManifest, manifest_json(stage, cfg, written));
  return written;
}

}  // namespace ridepool
