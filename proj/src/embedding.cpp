#include "ridepool/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ridepool/error.hpp"
#include "ridepool/random.hpp"

namespace ridepool {

GridIndex GridIndex::covering(std::span<const GeoPoint> points, double cell_size_deg) {
  if (!(cell_size_deg > 0.0)) throw ConfigError("grid cell size must be positive");
  if (points.empty()) throw StructuralError("cannot build a grid over no points");
  double min_lat = points[0].lat, max_lat = points[0].lat;
  double min_lon = points[0].lon, max_lon = points[0].lon;
  for (const GeoPoint& p : points) {
    min_lat = std::min(min_lat, p.lat);
    max_lat = std::max(max_lat, p.lat);
    min_lon = std::min(min_lon, p.lon);
    max_lon = std::max(max_lon, p.lon);
  }
  GridIndex g;
  g.anchor = {min_lat, min_lon};
  g.cell_size_deg = cell_size_deg;
  g.rows = std::max(1, static_cast<int>(std::ceil((max_lat - min_lat) / cell_size_deg)));
  g.cols = std::max(1, static_cast<int>(std::ceil((max_lon - min_lon) / cell_size_deg)));
  return g;
}

std::size_t encode_location(const GridIndex& grid, GeoPoint p) {
  auto axis = [&](double offset, int count) {
    const double f = std::floor(offset / grid.cell_size_deg);
    if (!(f >= 0.0)) return 0;  // also catches NaN
    return static_cast<int>(std::min(f, static_cast<double>(count - 1)));
  };
  const int row = axis(p.lat - grid.anchor.lat, grid.rows);
  const int col = axis(p.lon - grid.anchor.lon, grid.cols);
  return static_cast<std::size_t>(row) * grid.cols + col;
}

InteractionMatrix build_interaction_matrix(const RoadNetwork& net, std::span<const TripRequest> trips,
                                           const GridIndex& grid) {
  InteractionMatrix m;
  for (const TripRequest& t : trips) m.users.push_back(t.user_id);
  std::sort(m.users.begin(), m.users.end());
  m.users.erase(std::unique(m.users.begin(), m.users.end()), m.users.end());

  m.visits = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(m.users.size()),
                                   static_cast<Eigen::Index>(grid.cell_count()));
  for (const TripRequest& t : trips) {
    const auto row = std::lower_bound(m.users.begin(), m.users.end(), t.user_id) - m.users.begin();
    m.visits(row, static_cast<Eigen::Index>(encode_location(grid, net.position(t.origin)))) = 1;
    m.visits(row, static_cast<Eigen::Index>(encode_location(grid, net.position(t.dest)))) = 1;
  }
  return m;
}

SimilarityMatrices compute_similarity(const Eigen::MatrixXi& visits) {
  if (visits.size() == 0) throw StructuralError("interaction matrix is empty");
  return {visits * visits.transpose(), visits.transpose() * visits};
}

Eigen::MatrixXd build_laplacian(const Eigen::MatrixXi& visits) {
  if (visits.size() == 0) throw StructuralError("interaction matrix is empty");
  const Eigen::Index nu = visits.rows();
  const Eigen::Index ni = visits.cols();
  const Eigen::MatrixXd a = visits.cast<double>();

  Eigen::VectorXd inv_sqrt_deg(nu + ni);
  inv_sqrt_deg.head(nu) = a.rowwise().sum();
  inv_sqrt_deg.tail(ni) = a.colwise().sum().transpose();
  for (Eigen::Index i = 0; i < inv_sqrt_deg.size(); ++i)
    inv_sqrt_deg(i) = inv_sqrt_deg(i) > 0.0 ? 1.0 / std::sqrt(inv_sqrt_deg(i)) : 0.0;

  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(nu + ni, nu + ni);
  for (Eigen::Index u = 0; u < nu; ++u) {
    for (Eigen::Index c = 0; c < ni; ++c) {
      if (a(u, c) == 0.0) continue;
      const double v = a(u, c) * inv_sqrt_deg(u) * inv_sqrt_deg(nu + c);
      lap(u, nu + c) = v;
      lap(nu + c, u) = v;
    }
  }
  return lap;
}

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Linear: return "linear";
  }
  return "relu";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "linear") return Activation::Linear;
  throw ConfigError("unknown activation '" + std::string(name) + "' (expected relu, sigmoid or linear)");
}

Eigen::MatrixXd propagate(const Eigen::MatrixXd& prev, const Eigen::MatrixXd& laplacian,
                          const Eigen::MatrixXd& w1, const Eigen::MatrixXd& w2,
                          Activation activation) {
  const Eigen::Index d = prev.cols();
  if (laplacian.rows() != laplacian.cols() || laplacian.rows() != prev.rows())
    throw StructuralError("laplacian shape does not match embedding rows");
  if (w1.rows() != d || w1.cols() != d || w2.rows() != d || w2.cols() != d)
    throw StructuralError("weight matrices must be dim x dim");

  const Eigen::MatrixXd side = laplacian * prev;
  Eigen::MatrixXd pre = (side + prev) * w1;
  pre.array() += side.array() * (prev * w2).array();

  switch (activation) {
    case Activation::ReLU: return pre.cwiseMax(0.0);
    case Activation::Sigmoid: return pre.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    case Activation::Linear: return pre;
  }
  return pre;
}

void EmbeddingConfig::validate() const {
  if (dim < 1) throw ConfigError("embedding.dim must be >= 1");
  if (layers < 1) throw ConfigError("embedding.layers must be >= 1");
  if (!(init_scale > 0.0) || !std::isfinite(init_scale))
    throw ConfigError("embedding.init_scale must be positive and finite");
  if (std::isnan(convergence_eps) || convergence_eps < 0.0)
    throw ConfigError("embedding.convergence_eps must be >= 0");
  if (!(cell_size_deg > 0.0)) throw ConfigError("embedding.cell_size must be positive");
}

LayerEmbeddings embed(const InteractionMatrix& interactions, const EmbeddingConfig& cfg) {
  cfg.validate();
  LayerEmbeddings out;
  out.interactions = interactions;
  out.laplacian = build_laplacian(interactions.visits);

  const Eigen::Index n = out.laplacian.rows();
  const Eigen::Index d = cfg.dim;
  Rng rng(cfg.seed);
  auto draw = [&](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-cfg.init_scale, cfg.init_scale);
    return m;
  };

  out.layers.push_back(draw(n, d));
  for (int l = 0; l < cfg.layers; ++l) {
    out.w1.push_back(draw(d, d));
    out.w2.push_back(draw(d, d));
  }
  for (int l = 0; l < cfg.layers; ++l) {
    out.layers.push_back(propagate(out.layers.back(), out.laplacian, out.w1[l], out.w2[l],
                                   cfg.activation));
    const auto& cur = out.layers.back();
    const auto& prev = out.layers[out.layers.size() - 2];
    const double change = n == 0 ? 0.0 : (cur - prev).cwiseAbs().maxCoeff();
    if (change < cfg.convergence_eps) break;
  }
  out.w1.resize(out.layers.size() - 1);
  out.w2.resize(out.layers.size() - 1);
  return out;
}

FeatureMap user_features(const LayerEmbeddings& emb) {
  FeatureMap features;
  const auto& users = emb.interactions.users;
  for (std::size_t u = 0; u < users.size(); ++u) {
    std::vector<double> v;
    for (const auto& layer : emb.layers)
      for (Eigen::Index c = 0; c < layer.cols(); ++c) v.push_back(layer(static_cast<Eigen::Index>(u), c));
    features.emplace(users[u], std::move(v));
  }
  return features;
}

FeatureMap compute_user_features(const RoadNetwork& net, std::span<const TripRequest> trips,
                                 const GridIndex& grid, const EmbeddingConfig& cfg) {
  return user_features(embed(build_interaction_matrix(net, trips, grid), cfg));
}

}  // namespace ridepool
