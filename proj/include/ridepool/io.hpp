#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ridepool/embedding.hpp"
#include "ridepool/geo_network.hpp"
#include "ridepool/matching.hpp"
#include "ridepool/metrics.hpp"
#include "ridepool/policy.hpp"
#include "ridepool/sensitivity.hpp"
#include "ridepool/shareability.hpp"

// Line-oriented text formats. Blank lines and lines starting with '#' are
// ignored by every reader unless noted. Readers throw StructuralError with
// the offending line number.
namespace ridepool {

// Shortest decimal text that parses back to the same double.
std::string format_number(double v);
double parse_double(std::string_view text);

// `N <id> <lat> <lon>` then `E <from> <to> <length_m> <time_s>`.
void write_network(std::ostream& out, const RoadNetwork& net);
RoadNetwork read_network(std::istream& in);

// `T <trip_id> <user_id> <o_lat> <o_lon> <d_lat> <d_lon> <departure_s>`.
// Reading snaps both endpoints and routes the solo path.
void write_trips(std::ostream& out, const RoadNetwork& net, std::span<const TripRequest> trips);
std::vector<TripRequest> read_trips(std::istream& in, RouteCache& cache);

// `# objective=<name>` then `G <trip_a> <trip_b> <weight> <shared_distance_m> <shared_time_s>`.
void write_graph(std::ostream& out, const ShareabilityGraph& graph);

struct GraphRecord {
  TripId a = 0;
  TripId b = 0;
  double weight = 0.0;
  double distance_m = 0.0;
  double time_s = 0.0;
};

struct GraphFile {
  Objective objective = Objective::MinTotalDistance;
  std::vector<GraphRecord> edges;
};

GraphFile read_graph_file(std::istream& in);

// Rebuilds the graph over `trips`, re-routing every listed pair; a pair whose
// recomputed weight or route differs from the record is a StructuralError.
ShareabilityGraph restore_graph(const GraphFile& file, std::vector<TripRequest> trips,
                                RouteCache& cache);

// `U <user_id> <v_0> ... <v_k>` with 9 significant digits.
void write_features(std::ostream& out, const FeatureMap& features);
FeatureMap read_features(std::istream& in);

// Nonzero entries as `EU <user_a> <user_b> <count>` and `EI <cell_a> <cell_b> <count>`.
void write_similarity(std::ostream& out, const InteractionMatrix& interactions,
                      const SimilarityMatrices& sim);

// `M <group_id> <trip_id,...> <total_distance_m> <total_time_s>`.
void write_matching(std::ostream& out, const MatchingSolution& solution);

struct MatchingRecord {
  std::vector<TripId> group;
  double distance_m = 0.0;
  double time_s = 0.0;
};

std::vector<MatchingRecord> read_matching(std::istream& in);

// Groups from the records, re-routed; a route whose distance disagrees with
// its record is a StructuralError.
MatchingSolution restore_matching(std::span<const MatchingRecord> records,
                                  const ShareabilityGraph& graph, RouteCache& cache);

// Named arrays: `<name> <rows> <cols>` followed by rows*cols values, row-major.
void write_checkpoint(std::ostream& out, const PolicyParams& params);
PolicyParams read_checkpoint(std::istream& in);

// `metric,value` with a header row.
void write_report_csv(std::ostream& out, const MetricsReport& report);
MetricsReport read_report_csv(std::istream& in);
std::string report_json(const MetricsReport& report);
MetricsReport parse_report_json(const std::string& text);

// `S <objective> <s> <metric> <mean> <stddev>`.
void write_sweep(std::ostream& out, const SweepTable& table);

struct SweepRow {
  Objective objective = Objective::MinTotalDistance;
  double s = 0.0;
  std::string metric;
  double mean = 0.0;
  double stddev = 0.0;
};

std::vector<SweepRow> read_sweep(std::istream& in);

// `update,mean_reward`.
void write_training_log(std::ostream& out, const TrainingLog& log);

}  // namespace ridepool
