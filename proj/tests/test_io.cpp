#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "ridepool/error.hpp"
#include "ridepool/io.hpp"
#include "ridepool/oracle.hpp"
#include "ridepool/random.hpp"
#include "ridepool/scenario.hpp"

using namespace ridepool;

namespace {

Scenario scenario() {
  ScenarioConfig cfg;
  cfg.network.rows = 8;
  cfg.network.cols = 8;
  cfg.demand.n_trips = 20;
  cfg.demand.n_users = 12;
  cfg.demand.hotspots = 2;
  cfg.demand.departure_window_s = 900.0;
  cfg.seed = 11;
  return generate_scenario(cfg);
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const StructuralError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Numbers, ShortestRoundTrip) {
  Rng rng(1);
  for (int k = 0; k < 2000; ++k) {
    const double v = std::ldexp(rng.uniform(-1, 1), static_cast<int>(rng.below(80)) - 40);
    EXPECT_EQ(parse_double(format_number(v)), v);
  }
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(3000.0), "3000");
  EXPECT_EQ(parse_double("inf"), std::numeric_limits<double>::infinity());
  EXPECT_THROW(parse_double("1.5x"), StructuralError);
  EXPECT_THROW(parse_double(""), StructuralError);
}

TEST(Network, RoundTrip) {
  const RoadNetwork net = scenario().network;
  std::stringstream ss;
  write_network(ss, net);
  const RoadNetwork back = read_network(ss);
  ASSERT_EQ(back.node_count(), net.node_count());
  for (NodeId i = 0; i < net.node_count(); ++i) EXPECT_EQ(back.position(i), net.position(i));
  ASSERT_EQ(back.edges().size(), net.edges().size());
  for (std::size_t k = 0; k < net.edges().size(); ++k) {
    EXPECT_EQ(back.edges()[k].from, net.edges()[k].from);
    EXPECT_EQ(back.edges()[k].length_m, net.edges()[k].length_m);
    EXPECT_EQ(back.edges()[k].time_s, net.edges()[k].time_s);
  }
}

TEST(Network, MalformedLinesReportLineNumbers) {
  std::stringstream bad("# header\nN 0 1 2\nN 5 1 2\n");
  EXPECT_NE(error_of([&] { read_network(bad); }).find("line 3"), std::string::npos);
  std::stringstream junk("N 0 1\n");
  EXPECT_NE(error_of([&] { read_network(junk); }).find("line 1"), std::string::npos);
  std::stringstream tag("X 0 1 2\n");
  EXPECT_THROW(read_network(tag), StructuralError);
}

TEST(Trips, RoundTrip) {
  const Scenario sc = scenario();
  std::stringstream ss;
  write_trips(ss, sc.network, sc.trips);
  RouteCache cache(sc.network);
  const auto back = read_trips(ss, cache);
  ASSERT_EQ(back.size(), sc.trips.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].trip_id, sc.trips[i].trip_id);
    EXPECT_EQ(back[i].user_id, sc.trips[i].user_id);
    EXPECT_EQ(back[i].origin, sc.trips[i].origin);
    EXPECT_EQ(back[i].dest, sc.trips[i].dest);
    EXPECT_EQ(back[i].departure_s, sc.trips[i].departure_s);
    EXPECT_EQ(back[i].solo.distance_m, sc.trips[i].solo.distance_m);
  }
}

TEST(Trips, SameNodeEndpointsRejectedWithLine) {
  const Scenario sc = scenario();
  const GeoPoint p = sc.network.position(0);
  std::stringstream ss("T 0 0 " + format_number(p.lat) + " " + format_number(p.lon) + " " + format_number(p.lat) +
                       " " + format_number(p.lon) + " 0\n");
  RouteCache cache(sc.network);
  EXPECT_NE(error_of([&] { read_trips(ss, cache); }).find("line 1"), std::string::npos);
}

TEST(Graph, RoundTripAndTamperDetection) {
  const Scenario sc = scenario();
  for (auto obj : {Objective::MinTotalDistance, Objective::MinTotalTime, Objective::MaxSharedRides}) {
    const ShareabilityGraph g = build_shareability_graph(sc.network, sc.trips, obj);
    ASSERT_FALSE(g.edges().empty());
    std::stringstream ss;
    write_graph(ss, g);
    const GraphFile file = read_graph_file(ss);
    EXPECT_EQ(file.objective, obj);
    ASSERT_EQ(file.edges.size(), g.edges().size());
    RouteCache cache(sc.network);
    const ShareabilityGraph back = restore_graph(file, sc.trips, cache);
    for (std::size_t k = 0; k < g.edges().size(); ++k) {
      EXPECT_EQ(back.edges()[k].a, g.edges()[k].a);
      EXPECT_EQ(back.edges()[k].weight, g.edges()[k].weight);
      EXPECT_EQ(back.edges()[k].shared.stops, g.edges()[k].shared.stops);
    }
    GraphFile tampered = file;
    tampered.edges[0].weight += 17.0;
    EXPECT_THROW(restore_graph(tampered, sc.trips, cache), StructuralError);
  }
}

TEST(Features, RoundTripAtNineDigits) {
  FeatureMap f{{3, {0.123456789012, -1e-7, 5.0}}, {9, {1.0, 2.0, 3.0}}};
  std::stringstream ss;
  write_features(ss, f);
  const FeatureMap back = read_features(ss);
  ASSERT_EQ(back.size(), 2u);
  for (const auto& [user, v] : f)
    for (std::size_t k = 0; k < v.size(); ++k) EXPECT_NEAR(back.at(user)[k], v[k], 1e-9 * std::max(1.0, std::abs(v[k])));
  std::stringstream ragged("U 1 0.5 0.5\nU 2 0.5\n");
  EXPECT_THROW(read_features(ragged), StructuralError);
}

TEST(Similarity, ListsNonzeroEntries) {
  InteractionMatrix m;
  m.users = {4, 8};
  m.visits.resize(2, 3);
  m.visits << 1, 0, 1,
              0, 0, 1;
  std::stringstream ss;
  write_similarity(ss, m, compute_similarity(m.visits));
  const std::string text = ss.str();
  EXPECT_NE(text.find("EU 4 4 2\n"), std::string::npos);
  EXPECT_NE(text.find("EU 4 8 1\n"), std::string::npos);
  EXPECT_NE(text.find("EI 0 2 1\n"), std::string::npos);
  EXPECT_NE(text.find("EI 2 2 2\n"), std::string::npos);
  EXPECT_EQ(text.find("EI 1 "), std::string::npos);
}

TEST(Matching, RoundTripRestoresRoutesAndValue) {
  const Scenario sc = scenario();
  const ShareabilityGraph g = build_shareability_graph(sc.network, sc.trips, Objective::MinTotalDistance);
  MatchingSolution sol = greedy_matching(g);
  RouteCache cache(sc.network);
  route_groups(sol, g, cache);
  std::stringstream ss;
  write_matching(ss, sol);
  const auto records = read_matching(ss);
  ASSERT_EQ(records.size(), sol.groups.size());
  const MatchingSolution back = restore_matching(records, g, cache);
  EXPECT_EQ(back.groups, sol.groups);
  EXPECT_NEAR(back.objective_value, sol.objective_value, 1e-9);
  auto bad = records;
  bad[0].distance_m += 1.0;
  EXPECT_THROW(restore_matching(bad, g, cache), StructuralError);
}

TEST(Checkpoint, RoundTripIsExact) {
  Rng rng(3);
  PolicyParams p = PolicyParams::init(6, 5, 2);
  auto v = p.flatten();
  for (double& x : v) x = rng.uniform(-3, 3);
  p.unflatten(v);
  std::stringstream ss;
  write_checkpoint(ss, p);
  EXPECT_EQ(read_checkpoint(ss), p);
  std::stringstream truncated("w_hidden 2 2\n1 2 3\n");
  EXPECT_THROW(read_checkpoint(truncated), StructuralError);
}

TEST(Report, CsvAndJsonRoundTrip) {
  MetricsReport r;
  r.occupancy_rate = 1.25;
  r.carpooling_rate = 2.0 / 3.0;
  r.avg_delay_min = 0.1;
  r.emissions_g = 720.0;
  std::stringstream ss;
  write_report_csv(ss, r);
  EXPECT_EQ(ss.str().substr(0, 13), "metric,value\n");
  EXPECT_EQ(read_report_csv(ss).fields(), r.fields());
  EXPECT_EQ(parse_report_json(report_json(r)).fields(), r.fields());
  EXPECT_THROW(parse_report_json("{\"occupancy_rate\": 1}"), StructuralError);
}

TEST(Sweep, RoundTrip) {
  SweepTable t;
  SweepCell c;
  c.objective = Objective::MaxSharedRides;
  c.s = 0.25;
  c.mean.carpooling_rate = 0.5;
  c.stddev.carpooling_rate = 0.125;
  t.cells.push_back(c);
  std::stringstream ss;
  write_sweep(ss, t);
  const auto rows = read_sweep(ss);
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows[1].objective, Objective::MaxSharedRides);
  EXPECT_EQ(rows[1].s, 0.25);
  EXPECT_EQ(rows[1].metric, "carpooling_rate");
  EXPECT_EQ(rows[1].mean, 0.5);
  EXPECT_EQ(rows[1].stddev, 0.125);
}

TEST(TrainingLog, OneRowPerUpdate) {
  TrainingLog log;
  log.mean_reward = {1.5, 2.0};
  std::stringstream ss;
  write_training_log(ss, log);
  EXPECT_EQ(ss.str(), "update,mean_reward\n0,1.5\n1,2\n");
}
