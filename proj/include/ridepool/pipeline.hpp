#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ridepool/scenario.hpp"

namespace ridepool {

inline constexpr std::string_view kVersion = "0.1.0";

// Artifact file names inside the output directory.
namespace artifact {
inline constexpr std::string_view kNetwork = "network.txt";
inline constexpr std::string_view kTrips = "trips.txt";
inline constexpr std::string_view kGraph = "graph.txt";
inline constexpr std::string_view kFeatures = "features.txt";
inline constexpr std::string_view kSimilarity = "similarity.txt";
inline constexpr std::string_view kPolicy = "policy.txt";
inline constexpr std::string_view kTraining = "training.csv";
inline constexpr std::string_view kMatching = "matching.txt";
inline constexpr std::string_view kReportCsv = "report.csv";
inline constexpr std::string_view kReportJson = "report.json";
inline constexpr std::string_view kSweep = "sweep.txt";
inline constexpr std::string_view kManifest = "manifest.json";
}  // namespace artifact

// A stage needs an artifact that an earlier stage has not produced.
class MissingArtifactError : public std::runtime_error {
 public:
  explicit MissingArtifactError(const std::filesystem::path& file);
};

// gen, graph, embed, train, match, evaluate, sweep, all.
const std::vector<std::string>& stage_names();

// Runs one stage against `out_dir`, reading earlier artifacts from it and
// writing this stage's artifacts plus manifest.json. `all` chains gen through
// evaluate. Returns the artifact names written.
std::vector<std::string> run_stage(std::string_view stage, const ScenarioConfig& cfg,
                                   const std::filesystem::path& out_dir);

// The manifest document: version, seed, command, artifacts and config echo.
std::string manifest_json(std::string_view command, const ScenarioConfig& cfg,
                          const std::vector<std::string>& artifacts);

}  // namespace ridepool
