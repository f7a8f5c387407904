#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "ridepool/geo_network.hpp"
#include "ridepool/shareability.hpp"

namespace ridepool {

// Row-major lat/lon grid anchored at its south-west corner.
struct GridIndex {
  GeoPoint anchor;
  double cell_size_deg = 0.01;
  int rows = 1;
  int cols = 1;

  std::size_t cell_count() const { return static_cast<std::size_t>(rows) * cols; }

  // Smallest grid with the given cell size whose extent covers every point.
  static GridIndex covering(std::span<const GeoPoint> points, double cell_size_deg);
};

// Half-open cells [k, k+1) per axis; points beyond the extent clamp to the
// nearest boundary cell, so the far edge belongs to the last cell.
std::size_t encode_location(const GridIndex& grid, GeoPoint p);

// Binary user x cell visit matrix. Row i belongs to users[i] (ascending ids);
// columns cover every grid cell.
struct InteractionMatrix {
  std::vector<UserId> users;
  Eigen::MatrixXi visits;
};

InteractionMatrix build_interaction_matrix(const RoadNetwork& net, std::span<const TripRequest> trips,
                                           const GridIndex& grid);

struct SimilarityMatrices {
  Eigen::MatrixXi user_user;  // A * A^T
  Eigen::MatrixXi loc_loc;    // A^T * A
};

SimilarityMatrices compute_similarity(const Eigen::MatrixXi& visits);

// Symmetric normalized bipartite adjacency D^-1/2 [[0, A], [A^T, 0]] D^-1/2.
// Users occupy the first rows, cells the rest. Isolated nodes give zero rows.
Eigen::MatrixXd build_laplacian(const Eigen::MatrixXi& visits);

enum class Activation { ReLU, Sigmoid, Linear };

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

// One propagation layer:
//   E' = act((L + I) E W1 + (L E) .* (E W2))
Eigen::MatrixXd propagate(const Eigen::MatrixXd& prev, const Eigen::MatrixXd& laplacian,
                          const Eigen::MatrixXd& w1, const Eigen::MatrixXd& w2,
                          Activation activation);

struct EmbeddingConfig {
  int dim = 16;
  int layers = 3;
  Activation activation = Activation::ReLU;
  std::uint64_t seed = 0;
  double init_scale = 0.1;
  double convergence_eps = 0.0;  // stop once max |E(l) - E(l-1)| < eps; 0 never stops early
  double cell_size_deg = 0.01;

  void validate() const;
};

struct LayerEmbeddings {
  InteractionMatrix interactions;
  Eigen::MatrixXd laplacian;
  std::vector<Eigen::MatrixXd> layers;  // E(0) .. E(retained)
  std::vector<Eigen::MatrixXd> w1;      // w1[l-1] produced layers[l]
  std::vector<Eigen::MatrixXd> w2;
};

// Seeded initialization followed by up to cfg.layers propagation steps.
LayerEmbeddings embed(const InteractionMatrix& interactions, const EmbeddingConfig& cfg);

// user id -> concatenation of that user's rows across every retained layer.
using FeatureMap = std::map<UserId, std::vector<double>>;

FeatureMap user_features(const LayerEmbeddings& emb);

FeatureMap compute_user_features(const RoadNetwork& net, std::span<const TripRequest> trips,
                                 const GridIndex& grid, const EmbeddingConfig& cfg);

}  // namespace ridepool
