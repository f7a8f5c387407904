#include "ridepool/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "ridepool/error.hpp"

namespace ridepool {

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw StructuralError("cannot format number");
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  // to_chars spells infinities "inf"; accept them back.
  if (std::string_view(first, last - first) == "inf") return INFINITY;
  if (std::string_view(first, last - first) == "-inf") return -INFINITY;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last)
    throw StructuralError("not a number: '" + std::string(text) + "'");
  return v;
}

namespace {

// Tokenized non-comment line with its 1-based number.
struct Line {
  std::size_t number = 0;
  std::vector<std::string> tokens;
};

std::vector<Line> read_lines(std::istream& in, std::vector<std::string>* comments = nullptr) {
  std::vector<Line> out;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    const auto first = text.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (text[first] == '#') {
      if (comments) comments->push_back(text.substr(first + 1));
      continue;
    }
    Line line{number, {}};
    std::istringstream words(text);
    std::string w;
    while (words >> w) line.tokens.push_back(w);
    out.push_back(std::move(line));
  }
  return out;
}

[[noreturn]] void fail(const Line& line, const std::string& what) {
  throw StructuralError("line " + std::to_string(line.number) + ": " + what);
}

void expect(const Line& line, std::string_view tag, std::size_t count) {
  if (line.tokens.front() != tag) fail(line, "expected record '" + std::string(tag) + "'");
  if (line.tokens.size() != count)
    fail(line, "record '" + std::string(tag) + "' needs " + std::to_string(count - 1) + " fields");
}

double number_at(const Line& line, std::size_t i) {
  try {
    return parse_double(line.tokens[i]);
  } catch (const StructuralError& e) {
    fail(line, e.what());
  }
}

template <typename Int>
Int integer(const Line& line, const std::string& s) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    fail(line, "not an integer: '" + s + "'");
  return v;
}

template <typename Int>
Int integer_at(const Line& line, std::size_t i) {
  return integer<Int>(line, line.tokens[i]);
}

std::string format_sig9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(b)); }

std::vector<double MetricsReport::*> report_members() {
  return {&MetricsReport::occupancy_rate, &MetricsReport::carpooling_rate,
          &MetricsReport::avg_delay_min,  &MetricsReport::avg_detour_m,
          &MetricsReport::detour_ratio,   &MetricsReport::discount_ratio,
          &MetricsReport::emissions_g,    &MetricsReport::fuel_l};
}

void set_metric(MetricsReport& r, const std::string& name, double value) {
  const auto names = MetricsReport{}.fields();
  const auto members = report_members();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].first == name) {
      r.*members[i] = value;
      return;
    }
  }
  throw StructuralError("unknown metric '" + name + "'");
}

}  // namespace

void write_network(std::ostream& out, const RoadNetwork& net) {
  const auto pos = net.positions();
  for (std::size_t i = 0; i < pos.size(); ++i)
    out << "N " << i << ' ' << format_number(pos[i].lat) << ' ' << format_number(pos[i].lon) << '\n';
  for (const RoadEdge& e : net.edges())
    out << "E " << e.from << ' ' << e.to << ' ' << format_number(e.length_m) << ' '
        << format_number(e.time_s) << '\n';
}

RoadNetwork read_network(std::istream& in) {
  std::vector<GeoPoint> nodes;
  std::vector<RoadEdge> edges;
  for (const Line& line : read_lines(in)) {
    if (line.tokens.front() == "N") {
      expect(line, "N", 4);
      if (integer_at<std::size_t>(line, 1) != nodes.size())
        fail(line, "node ids must be dense and ascending");
      nodes.push_back({number_at(line, 2), number_at(line, 3)});
    } else {
      expect(line, "E", 5);
      edges.push_back({integer_at<NodeId>(line, 1), integer_at<NodeId>(line, 2), number_at(line, 3),
                       number_at(line, 4)});
    }
  }
  return RoadNetwork(std::move(nodes), std::move(edges));
}

void write_trips(std::ostream& out, const RoadNetwork& net, std::span<const TripRequest> trips) {
  for (const TripRequest& t : trips) {
    const GeoPoint o = net.position(t.origin);
    const GeoPoint d = net.position(t.dest);
    out << "T " << t.trip_id << ' ' << t.user_id << ' ' << format_number(o.lat) << ' '
        << format_number(o.lon) << ' ' << format_number(d.lat) << ' ' << format_number(d.lon) << ' '
        << format_number(t.departure_s) << '\n';
  }
}

std::vector<TripRequest> read_trips(std::istream& in, RouteCache& cache) {
  const RoadNetwork& net = cache.network();
  std::vector<TripRequest> trips;
  for (const Line& line : read_lines(in)) {
    expect(line, "T", 8);
    const GeoPoint o{number_at(line, 3), number_at(line, 4)};
    const GeoPoint d{number_at(line, 5), number_at(line, 6)};
    if (!o.valid() || !d.valid()) fail(line, "coordinates out of range");
    const NodeId on = snap_to_node(net, o);
    const NodeId dn = snap_to_node(net, d);
    try {
      trips.push_back(make_trip(cache, integer_at<TripId>(line, 1), integer_at<UserId>(line, 2), on,
                                dn, number_at(line, 7)));
    } catch (const ContractError& e) {
      fail(line, e.what());
    } catch (const NoRouteError& e) {
      fail(line, e.what());
    }
  }
  return trips;
}

void write_graph(std::ostream& out, const ShareabilityGraph& graph) {
  out << "# objective=" << objective_name(graph.objective()) << '\n';
  for (const ShareabilityEdge& e : graph.edges())
    out << "G " << e.a << ' ' << e.b << ' ' << format_number(e.weight) << ' '
        << format_number(e.shared.total_distance_m) << ' ' << format_number(e.shared.total_time_s)
        << '\n';
}

GraphFile read_graph_file(std::istream& in) {
  std::vector<std::string> comments;
  const auto lines = read_lines(in, &comments);
  GraphFile file;
  bool have_objective = false;
  for (const std::string& c : comments) {
    const auto pos = c.find("objective=");
    if (pos == std::string::npos) continue;
    std::string name = c.substr(pos + 10);
    while (!name.empty() && (name.back() == ' ' || name.back() == '\t')) name.pop_back();
    try {
      file.objective = parse_objective(name);
    } catch (const std::exception& e) {
      throw StructuralError(std::string("graph objective: ") + e.what());
    }
    have_objective = true;
  }
  if (!have_objective) throw StructuralError("graph file lacks an '# objective=' line");
  for (const Line& line : lines) {
    expect(line, "G", 6);
    file.edges.push_back({integer_at<TripId>(line, 1), integer_at<TripId>(line, 2),
                          number_at(line, 3), number_at(line, 4), number_at(line, 5)});
  }
  return file;
}

ShareabilityGraph restore_graph(const GraphFile& file, std::vector<TripRequest> trips,
                                RouteCache& cache) {
  std::unordered_map<TripId, const TripRequest*> by_id;
  for (const TripRequest& t : trips) by_id[t.trip_id] = &t;
  std::vector<ShareabilityEdge> edges;
  for (const GraphRecord& r : file.edges) {
    const auto ia = by_id.find(r.a);
    const auto ib = by_id.find(r.b);
    if (ia == by_id.end() || ib == by_id.end())
      throw StructuralError("graph edge " + std::to_string(r.a) + "-" + std::to_string(r.b) +
                            " names an unknown trip");
    ShareabilityEdge e;
    e.a = std::min(r.a, r.b);
    e.b = std::max(r.a, r.b);
    const TripRequest& ta = *by_id.at(e.a);
    const TripRequest& tb = *by_id.at(e.b);
    e.shared = best_shared_route(cache, ta, tb);
    e.weight = edge_weight(e.shared, ta, tb, file.objective);
    if (!close(e.weight, r.weight) || !close(e.shared.total_distance_m, r.distance_m) ||
        !close(e.shared.total_time_s, r.time_s))
      throw StructuralError("graph edge " + std::to_string(r.a) + "-" + std::to_string(r.b) +
                            " does not match its recomputed route");
    edges.push_back(std::move(e));
  }
  return ShareabilityGraph(std::move(trips), std::move(edges), file.objective);
}

void write_features(std::ostream& out, const FeatureMap& features) {
  for (const auto& [user, values] : features) {
    out << "U " << user;
    for (double v : values) out << ' ' << format_sig9(v);
    out << '\n';
  }
}

FeatureMap read_features(std::istream& in) {
  FeatureMap features;
  std::size_t length = 0;
  for (const Line& line : read_lines(in)) {
    if (line.tokens.front() != "U" || line.tokens.size() < 3) fail(line, "expected 'U <user> <values>'");
    const auto user = integer_at<UserId>(line, 1);
    std::vector<double> values;
    for (std::size_t i = 2; i < line.tokens.size(); ++i) values.push_back(number_at(line, i));
    if (length == 0) length = values.size();
    if (values.size() != length) fail(line, "feature length differs from earlier users");
    if (!features.emplace(user, std::move(values)).second) fail(line, "duplicate user");
  }
  return features;
}

void write_similarity(std::ostream& out, const InteractionMatrix& interactions,
                      const SimilarityMatrices& sim) {
  for (Eigen::Index i = 0; i < sim.user_user.rows(); ++i)
    for (Eigen::Index j = 0; j < sim.user_user.cols(); ++j)
      if (sim.user_user(i, j) != 0)
        out << "EU " << interactions.users[i] << ' ' << interactions.users[j] << ' '
            << sim.user_user(i, j) << '\n';
  for (Eigen::Index i = 0; i < sim.loc_loc.rows(); ++i)
    for (Eigen::Index j = 0; j < sim.loc_loc.cols(); ++j)
      if (sim.loc_loc(i, j) != 0) out << "EI " << i << ' ' << j << ' ' << sim.loc_loc(i, j) << '\n';
}

void write_matching(std::ostream& out, const MatchingSolution& solution) {
  if (solution.routes.size() != solution.groups.size())
    throw StructuralError("matching export needs routed groups");
  for (std::size_t g = 0; g < solution.groups.size(); ++g) {
    out << "M " << g << ' ';
    for (std::size_t i = 0; i < solution.groups[g].size(); ++i)
      out << (i ? "," : "") << solution.groups[g][i];
    out << ' ' << format_number(solution.routes[g].total_distance_m) << ' '
        << format_number(solution.routes[g].total_time_s) << '\n';
  }
}

std::vector<MatchingRecord> read_matching(std::istream& in) {
  std::vector<MatchingRecord> records;
  for (const Line& line : read_lines(in)) {
    expect(line, "M", 5);
    if (integer_at<std::size_t>(line, 1) != records.size()) fail(line, "group ids must be dense");
    MatchingRecord r;
    std::stringstream ids(line.tokens[2]);
    std::string id;
    while (std::getline(ids, id, ',')) r.group.push_back(integer<TripId>(line, id));
    if (r.group.empty()) fail(line, "empty group");
    r.distance_m = number_at(line, 3);
    r.time_s = number_at(line, 4);
    records.push_back(std::move(r));
  }
  return records;
}

MatchingSolution restore_matching(std::span<const MatchingRecord> records,
                                  const ShareabilityGraph& graph, RouteCache& cache) {
  MatchingSolution sol;
  for (const MatchingRecord& r : records) {
    for (TripId id : r.group)
      if (!graph.has_trip(id)) throw StructuralError("matching names unknown trip " + std::to_string(id));
    sol.groups.push_back(r.group);
  }
  canonicalize(sol);
  route_groups(sol, graph, cache);
  for (std::size_t g = 0; g < sol.groups.size(); ++g) {
    const auto& group = sol.groups[g];
    const auto& rec = *std::find_if(records.begin(), records.end(), [&](const MatchingRecord& r) {
      auto sorted = r.group;
      std::sort(sorted.begin(), sorted.end());
      return sorted == group;
    });
    if (!close(sol.routes[g].total_distance_m, rec.distance_m))
      throw StructuralError("matching group " + std::to_string(g) +
                            " does not match its recomputed route");
    if (group.size() == 2) {
      if (const auto* e = graph.edge_between(group[0], group[1])) {
        sol.objective_value += e->weight;
        continue;
      }
    }
    if (group.size() > 1) {
      std::vector<const TripRequest*> riders;
      for (TripId id : group) riders.push_back(&graph.trip(id));
      sol.objective_value += group_value(sol.routes[g], riders, graph.objective());
    }
  }
  return sol;
}

namespace {

void write_array(std::ostream& out, const std::string& name, const double* data, Eigen::Index rows,
                 Eigen::Index cols) {
  out << name << ' ' << rows << ' ' << cols << '\n';
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) out << (c ? " " : "") << format_number(data[r * cols + c]);
    out << '\n';
  }
}

}  // namespace

void write_checkpoint(std::ostream& out, const PolicyParams& p) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor wh = p.w_hidden;
  write_array(out, "w_hidden", wh.data(), wh.rows(), wh.cols());
  write_array(out, "b_hidden", p.b_hidden.data(), 1, p.b_hidden.size());
  write_array(out, "w_select", p.w_select.data(), 1, p.w_select.size());
  write_array(out, "b_select", &p.b_select, 1, 1);
  write_array(out, "w_stop", p.w_stop.data(), 1, p.w_stop.size());
  write_array(out, "b_stop", &p.b_stop, 1, 1);
  write_array(out, "w_value", p.w_value.data(), 1, p.w_value.size());
  write_array(out, "b_value", &p.b_value, 1, 1);
}

PolicyParams read_checkpoint(std::istream& in) {
  const auto lines = read_lines(in);
  std::size_t pos = 0;
  auto next_array = [&](const std::string& name) {
    if (pos >= lines.size()) throw StructuralError("checkpoint ends before '" + name + "'");
    const Line& head = lines[pos++];
    expect(head, name, 3);
    const auto rows = integer_at<Eigen::Index>(head, 1);
    const auto cols = integer_at<Eigen::Index>(head, 2);
    std::vector<double> values;
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (pos >= lines.size()) throw StructuralError("checkpoint array '" + name + "' is truncated");
      const Line& row = lines[pos++];
      if (static_cast<Eigen::Index>(row.tokens.size()) != cols) fail(row, "wrong column count");
      for (std::size_t c = 0; c < row.tokens.size(); ++c) values.push_back(number_at(row, c));
    }
    return std::tuple{rows, cols, values};
  };
  PolicyParams p;
  {
    auto [rows, cols, v] = next_array("w_hidden");
    p.w_hidden = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        v.data(), rows, cols);
  }
  auto vector = [&](const std::string& name, Eigen::VectorXd& dst) {
    auto [rows, cols, v] = next_array(name);
    if (rows != 1 || cols != p.w_hidden.rows())
      throw StructuralError("checkpoint array '" + name + "' has the wrong shape");
    dst = Eigen::Map<Eigen::VectorXd>(v.data(), cols);
  };
  auto scalar = [&](const std::string& name, double& dst) {
    auto [rows, cols, v] = next_array(name);
    if (rows != 1 || cols != 1) throw StructuralError("checkpoint array '" + name + "' must be 1x1");
    dst = v[0];
  };
  vector("b_hidden", p.b_hidden);
  vector("w_select", p.w_select);
  scalar("b_select", p.b_select);
  vector("w_stop", p.w_stop);
  scalar("b_stop", p.b_stop);
  vector("w_value", p.w_value);
  scalar("b_value", p.b_value);
  if (pos != lines.size()) fail(lines[pos], "unexpected data after checkpoint");
  if (!p.all_finite()) throw StructuralError("checkpoint holds non-finite weights");
  return p;
}

void write_report_csv(std::ostream& out, const MetricsReport& report) {
  out << "metric,value\n";
  for (const auto& [name, value] : report.fields()) out << name << ',' << format_number(value) << '\n';
}

MetricsReport read_report_csv(std::istream& in) {
  MetricsReport r;
  std::string text;
  std::size_t number = 0;
  std::size_t seen = 0;
  while (std::getline(in, text)) {
    ++number;
    if (number == 1) {
      if (text != "metric,value") throw StructuralError("line 1: expected header 'metric,value'");
      continue;
    }
    if (text.empty()) continue;
    const auto comma = text.find(',');
    if (comma == std::string::npos)
      throw StructuralError("line " + std::to_string(number) + ": expected 'metric,value'");
    try {
      set_metric(r, text.substr(0, comma), parse_double(std::string_view(text).substr(comma + 1)));
    } catch (const StructuralError& e) {
      throw StructuralError("line " + std::to_string(number) + ": " + e.what());
    }
    ++seen;
  }
  if (seen != r.fields().size()) throw StructuralError("report is missing metrics");
  return r;
}

std::string report_json(const MetricsReport& report) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& [name, value] : report.fields()) doc[name] = value;
  return doc.dump(2) + "\n";
}

MetricsReport parse_report_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("report json: ") + e.what());
  }
  MetricsReport r;
  for (const auto& [name, value] : r.fields()) {
    if (!doc.contains(name) || !doc[name].is_number())
      throw StructuralError("report json: missing metric '" + name + "'");
    set_metric(r, name, doc[name].get<double>());
  }
  return r;
}

void write_sweep(std::ostream& out, const SweepTable& table) {
  for (const SweepCell& cell : table.cells) {
    const auto mean = cell.mean.fields();
    const auto sd = cell.stddev.fields();
    for (std::size_t i = 0; i < mean.size(); ++i)
      out << "S " << objective_name(cell.objective) << ' ' << format_number(cell.s) << ' '
          << mean[i].first << ' ' << format_number(mean[i].second) << ' '
          << format_number(sd[i].second) << '\n';
  }
}

std::vector<SweepRow> read_sweep(std::istream& in) {
  std::vector<SweepRow> rows;
  for (const Line& line : read_lines(in)) {
    expect(line, "S", 6);
    SweepRow r;
    try {
      r.objective = parse_objective(line.tokens[1]);
    } catch (const std::exception& e) {
      fail(line, e.what());
    }
    r.s = number_at(line, 2);
    r.metric = line.tokens[3];
    r.mean = number_at(line, 4);
    r.stddev = number_at(line, 5);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_training_log(std::ostream& out, const TrainingLog& log) {
  out << "update,mean_reward\n";
  for (std::size_t i = 0; i < log.mean_reward.size(); ++i)
    out << i << ',' << format_number(log.mean_reward[i]) << '\n';
}

}  // namespace ridepool
