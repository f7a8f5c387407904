#include "ridepool/scenario.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "ridepool/error.hpp"
#include "ridepool/io.hpp"
#include "ridepool/random.hpp"

namespace ridepool {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (auto t = trim(item); !t.empty()) out.push_back(t);
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError(key + ": cannot parse '" + raw + "' as a number");
  return value;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + raw + "'");
}

struct Field {
  std::string key;
  std::function<void(ScenarioConfig&, const std::string& key, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

template <typename Access>
Field int_field(std::string key, Access access) {
  return {std::move(key),
          [access](ScenarioConfig& c, const std::string& k, const std::string& v) {
            access(c) = parse_number<std::remove_reference_t<decltype(access(c))>>(k, v);
          },
          [access](const ScenarioConfig& c) {
            return std::to_string(access(const_cast<ScenarioConfig&>(c)));
          }};
}

template <typename Access>
Field double_field(std::string key, Access access) {
  return {std::move(key),
          [access](ScenarioConfig& c, const std::string& k, const std::string& v) {
            access(c) = parse_number<double>(k, v);
          },
          [access](const ScenarioConfig& c) { return format_number(access(const_cast<ScenarioConfig&>(c))); }};
}

template <typename Access>
Field bool_field(std::string key, Access access) {
  return {std::move(key),
          [access](ScenarioConfig& c, const std::string& k, const std::string& v) {
            access(c) = parse_bool(k, v);
          },
          [access](const ScenarioConfig& c) {
            return std::string(access(const_cast<ScenarioConfig&>(c)) ? "true" : "false");
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(int_field("seed", [](ScenarioConfig& c) -> std::uint64_t& { return c.seed; }));

    f.push_back(int_field("network.rows", [](ScenarioConfig& c) -> int& { return c.network.rows; }));
    f.push_back(int_field("network.cols", [](ScenarioConfig& c) -> int& { return c.network.cols; }));
    f.push_back(double_field("network.spacing", [](ScenarioConfig& c) -> double& { return c.network.spacing_m; }));
    f.push_back(double_field("network.speed", [](ScenarioConfig& c) -> double& { return c.network.speed_mps; }));
    f.push_back(double_field("network.anchor_lat", [](ScenarioConfig& c) -> double& { return c.network.anchor.lat; }));
    f.push_back(double_field("network.anchor_lon", [](ScenarioConfig& c) -> double& { return c.network.anchor.lon; }));

    f.push_back(int_field("demand.n_trips", [](ScenarioConfig& c) -> int& { return c.demand.n_trips; }));
    f.push_back(int_field("demand.n_users", [](ScenarioConfig& c) -> int& { return c.demand.n_users; }));
    f.push_back(int_field("demand.hotspots", [](ScenarioConfig& c) -> int& { return c.demand.hotspots; }));
    f.push_back(double_field("demand.hotspot_spread", [](ScenarioConfig& c) -> double& { return c.demand.hotspot_spread_m; }));
    f.push_back(double_field("demand.departure_start", [](ScenarioConfig& c) -> double& { return c.demand.departure_start_s; }));
    f.push_back(double_field("demand.departure_window", [](ScenarioConfig& c) -> double& { return c.demand.departure_window_s; }));

    f.push_back(double_field("constraints.radius", [](ScenarioConfig& c) -> double& { return c.constraints.radius_m; }));
    f.push_back(double_field("constraints.max_departure_gap", [](ScenarioConfig& c) -> double& { return c.constraints.max_departure_gap_s; }));

    f.push_back({"matching.objective",
                 [](ScenarioConfig& c, const std::string&, const std::string& v) { c.objective = parse_objective(trim(v)); },
                 [](const ScenarioConfig& c) { return std::string(objective_name(c.objective)); }});
    f.push_back(int_field("matching.capacity", [](ScenarioConfig& c) -> std::size_t& { return c.capacity; }));
    f.push_back(double_field("matching.social_penalty_weight", [](ScenarioConfig& c) -> double& { return c.social_penalty_weight; }));

    f.push_back(int_field("embedding.dim", [](ScenarioConfig& c) -> int& { return c.embedding.dim; }));
    f.push_back(int_field("embedding.layers", [](ScenarioConfig& c) -> int& { return c.embedding.layers; }));
    f.push_back({"embedding.activation",
                 [](ScenarioConfig& c, const std::string&, const std::string& v) { c.embedding.activation = parse_activation(trim(v)); },
                 [](const ScenarioConfig& c) { return std::string(activation_name(c.embedding.activation)); }});
    f.push_back(double_field("embedding.init_scale", [](ScenarioConfig& c) -> double& { return c.embedding.init_scale; }));
    f.push_back(double_field("embedding.convergence_eps", [](ScenarioConfig& c) -> double& { return c.embedding.convergence_eps; }));
    f.push_back(double_field("embedding.cell_size", [](ScenarioConfig& c) -> double& { return c.embedding.cell_size_deg; }));

    f.push_back(int_field("ppo.updates", [](ScenarioConfig& c) -> int& { return c.ppo.updates; }));
    f.push_back(int_field("ppo.hidden", [](ScenarioConfig& c) -> int& { return c.ppo.hidden; }));
    f.push_back(double_field("ppo.clip_epsilon", [](ScenarioConfig& c) -> double& { return c.ppo.clip_epsilon; }));
    f.push_back(double_field("ppo.learning_rate", [](ScenarioConfig& c) -> double& { return c.ppo.learning_rate; }));
    f.push_back(double_field("ppo.gamma", [](ScenarioConfig& c) -> double& { return c.ppo.gamma; }));
    f.push_back(int_field("ppo.epochs", [](ScenarioConfig& c) -> int& { return c.ppo.epochs_per_update; }));
    f.push_back(int_field("ppo.rollouts", [](ScenarioConfig& c) -> int& { return c.ppo.rollouts_per_update; }));
    f.push_back(double_field("ppo.entropy_coeff", [](ScenarioConfig& c) -> double& { return c.ppo.entropy_coeff; }));
    f.push_back(double_field("ppo.value_coeff", [](ScenarioConfig& c) -> double& { return c.ppo.value_coeff; }));
    f.push_back(bool_field("ppo.normalize_advantages", [](ScenarioConfig& c) -> bool& { return c.ppo.normalize_advantages; }));

    f.push_back(double_field("tolerance.tau0", [](ScenarioConfig& c) -> double& { return c.tolerance.tau0_s; }));
    f.push_back(double_field("tolerance.kappa", [](ScenarioConfig& c) -> double& { return c.tolerance.kappa; }));
    f.push_back(double_field("tolerance.s", [](ScenarioConfig& c) -> double& { return c.tolerance.s; }));

    f.push_back(double_field("metrics.emission_g_per_km", [](ScenarioConfig& c) -> double& { return c.factors.emission_g_per_km; }));
    f.push_back(double_field("metrics.fuel_l_per_km", [](ScenarioConfig& c) -> double& { return c.factors.fuel_l_per_km; }));
    f.push_back(double_field("metrics.fare_per_km", [](ScenarioConfig& c) -> double& { return c.factors.fare_per_km; }));

    f.push_back({"sweep.s_values",
                 [](ScenarioConfig& c, const std::string& k, const std::string& v) {
                   c.sweep.s_values.clear();
                   for (const auto& item : split_list(v)) c.sweep.s_values.push_back(parse_number<double>(k, item));
                 },
                 [](const ScenarioConfig& c) {
                   std::string out;
                   for (double s : c.sweep.s_values) out += (out.empty() ? "" : ",") + format_number(s);
                   return out;
                 }});
    f.push_back({"sweep.objectives",
                 [](ScenarioConfig& c, const std::string&, const std::string& v) {
                   c.sweep.objectives.clear();
                   for (const auto& item : split_list(v)) c.sweep.objectives.push_back(parse_objective(item));
                 },
                 [](const ScenarioConfig& c) {
                   std::string out;
                   for (Objective o : c.sweep.objectives) out += (out.empty() ? "" : ",") + std::string(objective_name(o));
                   return out;
                 }});
    f.push_back(int_field("sweep.runs", [](ScenarioConfig& c) -> int& { return c.sweep.runs; }));
    f.push_back(int_field("sweep.updates", [](ScenarioConfig& c) -> int& { return c.sweep.updates; }));
    f.push_back(double_field("sweep.social_penalty_weight", [](ScenarioConfig& c) -> double& { return c.sweep.social_penalty_weight; }));
    f.push_back(bool_field("sweep.tolerance_off", [](ScenarioConfig& c) -> bool& { return c.sweep.tolerance_off; }));
    return f;
  }();
  return table;
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

}  // namespace

void ScenarioConfig::validate() const {
  require(network.rows >= 1, "network.rows", "must be >= 1");
  require(network.cols >= 1, "network.cols", "must be >= 1");
  require(network.spacing_m > 0.0, "network.spacing", "must be positive");
  require(network.speed_mps > 0.0, "network.speed", "must be positive");
  require(network.anchor.lat >= -90.0 && network.anchor.lat <= 90.0, "network.anchor_lat",
          "must lie in [-90, 90]");
  require(network.anchor.lon >= -180.0 && network.anchor.lon <= 180.0, "network.anchor_lon",
          "must lie in [-180, 180]");
  require(demand.n_trips >= 0, "demand.n_trips", "must be >= 0");
  require(demand.n_users >= 1, "demand.n_users", "must be >= 1");
  require(demand.hotspots >= 1, "demand.hotspots", "must be >= 1");
  require(demand.hotspot_spread_m >= 0.0, "demand.hotspot_spread", "must be >= 0");
  require(demand.departure_window_s >= 0.0, "demand.departure_window", "must be >= 0");
  require(demand.n_trips == 0 || network.rows * network.cols >= 2, "network",
          "needs at least two nodes to place trips");
  require(constraints.radius_m > 0.0, "constraints.radius", "must be positive");
  require(constraints.max_departure_gap_s >= 0.0, "constraints.max_departure_gap", "must be >= 0");
  require(capacity >= 2 && capacity <= kMaxGroupSize, "matching.capacity", "must lie in [2, 4]");
  require(social_penalty_weight >= 0.0, "matching.social_penalty_weight", "must be >= 0");
  require(embedding.dim >= 1, "embedding.dim", "must be >= 1");
  require(embedding.layers >= 1, "embedding.layers", "must be >= 1");
  require(embedding.init_scale > 0.0, "embedding.init_scale", "must be positive");
  require(embedding.convergence_eps >= 0.0, "embedding.convergence_eps", "must be >= 0");
  require(embedding.cell_size_deg > 0.0, "embedding.cell_size", "must be positive");
  require(ppo.clip_epsilon > 0.0 && ppo.clip_epsilon < 1.0, "ppo.clip_epsilon", "must lie in (0, 1)");
  require(ppo.gamma > 0.0 && ppo.gamma <= 1.0, "ppo.gamma", "must lie in (0, 1]");
  require(ppo.learning_rate > 0.0, "ppo.learning_rate", "must be positive");
  require(ppo.epochs_per_update >= 1, "ppo.epochs", "must be >= 1");
  require(ppo.rollouts_per_update >= 1, "ppo.rollouts", "must be >= 1");
  require(ppo.updates >= 0, "ppo.updates", "must be >= 0");
  require(ppo.hidden >= 1, "ppo.hidden", "must be >= 1");
  require(ppo.entropy_coeff >= 0.0, "ppo.entropy_coeff", "must be >= 0");
  require(ppo.value_coeff >= 0.0, "ppo.value_coeff", "must be >= 0");
  require(tolerance.tau0_s > 0.0, "tolerance.tau0", "must be positive");
  require(tolerance.kappa >= 0.0, "tolerance.kappa", "must be >= 0");
  require(tolerance.s >= 0.0 && tolerance.s <= 1.0, "tolerance.s", "must lie in [0, 1]");
  require(factors.emission_g_per_km >= 0.0, "metrics.emission_g_per_km", "must be >= 0");
  require(factors.fuel_l_per_km >= 0.0, "metrics.fuel_l_per_km", "must be >= 0");
  require(factors.fare_per_km > 0.0, "metrics.fare_per_km", "must be positive");
  require(!sweep.s_values.empty(), "sweep.s_values", "must not be empty");
  for (double s : sweep.s_values) require(s >= 0.0 && s <= 1.0, "sweep.s_values", "must lie in [0, 1]");
  require(!sweep.objectives.empty(), "sweep.objectives", "must not be empty");
  require(sweep.runs >= 1, "sweep.runs", "must be >= 1");
  require(sweep.updates >= 0, "sweep.updates", "must be >= 0");
  require(sweep.social_penalty_weight >= 0.0, "sweep.social_penalty_weight", "must be >= 0");
}

EmbeddingConfig ScenarioConfig::resolved_embedding() const {
  EmbeddingConfig e = embedding;
  e.seed = derive_seed(seed, {0xe3b});
  return e;
}

PPOConfig ScenarioConfig::resolved_ppo() const {
  PPOConfig p = ppo;
  p.seed = derive_seed(seed, {0x990});
  return p;
}

SweepConfig ScenarioConfig::resolved_sweep() const {
  SweepConfig s;
  s.s_values = sweep.s_values;
  s.objectives = sweep.objectives;
  s.runs_per_cell = sweep.runs;
  s.seed = derive_seed(seed, {0x5ee9});
  s.base = tolerance;
  s.tolerance_off = sweep.tolerance_off;
  s.social_penalty_weight = sweep.social_penalty_weight;
  s.capacity = capacity;
  s.constraints = constraints;
  s.embedding = resolved_embedding();
  s.ppo = resolved_ppo();
  s.ppo.updates = sweep.updates;
  s.factors = factors;
  return s;
}

std::uint64_t ScenarioConfig::demand_seed() const { return derive_seed(seed, {0xde3a}); }

ScenarioConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ScenarioConfig cfg;
  auto apply = [&](const std::string& key, const std::string& value) {
    for (const Field& f : fields()) {
      if (f.key == key) {
        f.set(cfg, key, value);
        return;
      }
    }
    throw ConfigError(key + ": unknown setting");
  };
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      apply(name, node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) apply(name + "." + key, leaf.data());
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::vector<std::pair<std::string, std::string>> config_entries(const ScenarioConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Field& f : fields()) out.emplace_back(f.key, f.get(cfg));
  return out;
}

std::string format_config(const ScenarioConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& [key, value] : config_entries(cfg)) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
      out += key + " = " + value + "\n";
      continue;
    }
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      out += "\n[" + sec + "]\n";
      section = sec;
    }
    out += key.substr(dot + 1) + " = " + value + "\n";
  }
  return out;
}

Scenario generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Scenario sc;
  sc.network = build_grid_network(cfg.network.rows, cfg.network.cols, cfg.network.spacing_m,
                                  cfg.network.speed_mps, cfg.network.anchor);
  if (cfg.demand.n_trips == 0) return sc;

  const RoadNetwork& net = sc.network;
  Rng rng(cfg.demand_seed());
  std::vector<NodeId> hotspots;
  for (int h = 0; h < cfg.demand.hotspots; ++h)
    hotspots.push_back(static_cast<NodeId>(rng.below(net.node_count())));

  const double m_per_deg = kEarthRadiusM * std::numbers::pi / 180.0;
  auto sample_near = [&](NodeId hub) {
    const GeoPoint c = net.position(hub);
    if (cfg.demand.hotspot_spread_m == 0.0) return hub;
    const double north = rng.normal() * cfg.demand.hotspot_spread_m;
    const double east = rng.normal() * cfg.demand.hotspot_spread_m;
    GeoPoint p{c.lat + north / m_per_deg,
               c.lon + east / (m_per_deg * std::cos(c.lat * std::numbers::pi / 180.0))};
    p.lat = std::clamp(p.lat, -90.0, 90.0);
    p.lon = std::clamp(p.lon, -180.0, 180.0);
    return snap_to_node(net, p);
  };

  RouteCache cache(net);
  for (int i = 0; i < cfg.demand.n_trips; ++i) {
    const NodeId origin = sample_near(hotspots[rng.below(hotspots.size())]);
    NodeId dest = origin;
    for (int attempt = 0; attempt < 16 && dest == origin; ++attempt)
      dest = sample_near(hotspots[rng.below(hotspots.size())]);
    if (dest == origin) dest = net.arcs_from(origin).front().head;
    const auto user = static_cast<UserId>(rng.below(static_cast<std::uint64_t>(cfg.demand.n_users)));
    const double departure =
        cfg.demand.departure_start_s + std::floor(rng.uniform() * cfg.demand.departure_window_s);
    sc.trips.push_back(make_trip(cache, static_cast<TripId>(i), user, origin, dest, departure));
  }
  return sc;
}

}  // namespace ridepool
