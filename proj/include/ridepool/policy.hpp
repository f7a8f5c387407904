#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "ridepool/embedding.hpp"
#include "ridepool/matching.hpp"
#include "ridepool/shareability.hpp"
#include "ridepool/tolerance.hpp"

namespace ridepool {

// (u, G, V_t): focal context, shareability graph, and co-riders chosen so far.
struct MatchState {
  TripId focal = 0;
  const std::vector<double>* context = nullptr;
  const ShareabilityGraph* graph = nullptr;
  std::vector<TripId> selected;
};

struct PolicyAction {
  bool stop = true;
  TripId trip = 0;  // meaningful when !stop

  static PolicyAction Stop() { return {true, 0}; }
  static PolicyAction Select(TripId id) { return {false, id}; }
  friend bool operator==(const PolicyAction&, const PolicyAction&) = default;
};

struct RewardSpec {
  Objective objective = Objective::MinTotalDistance;
  // Weight on the expected gain lost to riders rejecting their delay.
  double social_penalty_weight = 0.0;
  ToleranceProfile profile;
};

struct StepResult {
  MatchState next;
  double reward = 0.0;
  bool done = false;
};

inline constexpr std::size_t kDefaultCapacity = 2;

// The sequential co-rider selection environment over one shareability graph.
// Tracks which trips were assigned earlier in the current global pass.
class MatchEnvironment {
 public:
  // `net` is needed only when capacity > 2 (groups are re-routed).
  MatchEnvironment(const ShareabilityGraph& graph, const FeatureMap& features, RewardSpec spec,
                   std::size_t capacity = kDefaultCapacity, const RoadNetwork* net = nullptr);

  const ShareabilityGraph& graph() const { return *graph_; }
  const RewardSpec& reward_spec() const { return spec_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t feature_length() const { return feature_length_; }
  const std::vector<double>& context(TripId trip) const { return contexts_[graph_->index_of(trip)]; }

  // Largest |edge weight|; rewards and the edge-weight input are divided by it.
  double reward_scale() const { return reward_scale_; }

  MatchState initial_state(TripId focal) const;

  // Select(v) for each unassigned, unselected neighbour of the focal trip whose
  // extended group is routable and fits the capacity (ascending trip id), then Stop.
  std::vector<PolicyAction> candidate_actions(const MatchState& state);

  // Throws ContractError when the action is not a current candidate.
  StepResult step(const MatchState& state, const PolicyAction& action);

  // Objective value of a group (focal first is not required).
  double group_value_of(std::span<const TripId> group);
  std::optional<SharedRoute> group_route(std::span<const TripId> group);
  // Probability that every rider of the group tolerates its delay.
  double acceptance_probability(std::span<const TripId> group);

  void reset();
  void assign(TripId trip);
  bool assigned(TripId trip) const { return assigned_[graph_->index_of(trip)] != 0; }

 private:
  std::vector<TripId> sorted_group(const MatchState& state, std::optional<TripId> extra) const;

  const ShareabilityGraph* graph_;
  RewardSpec spec_;
  std::size_t capacity_;
  std::vector<std::vector<double>> contexts_;
  std::size_t feature_length_ = 0;
  double reward_scale_ = 1.0;
  std::optional<RouteCache> cache_;
  std::map<std::vector<TripId>, std::optional<SharedRoute>> group_routes_;
  std::vector<char> assigned_;
};

// Two-layer perceptron scoring each candidate from
//   [focal context, candidate context, edge weight / scale, |selected| / (capacity - 1)]
// through a shared tanh hidden layer. The Stop logit and the value come from
// separate heads on the hidden code of the Stop row, whose candidate part is zero.
struct PolicyParams {
  Eigen::MatrixXd w_hidden;  // hidden x input
  Eigen::VectorXd b_hidden;
  Eigen::VectorXd w_select;
  double b_select = 0.0;
  Eigen::VectorXd w_stop;
  double b_stop = 0.0;
  Eigen::VectorXd w_value;
  double b_value = 0.0;

  // Hidden layer uniform(+-1/sqrt(input)), all output heads zero.
  static PolicyParams init(std::size_t input_dim, std::size_t hidden, std::uint64_t seed);
  static PolicyParams zeros_like(const PolicyParams& p);

  std::size_t input_dim() const { return static_cast<std::size_t>(w_hidden.cols()); }
  std::size_t hidden() const { return static_cast<std::size_t>(w_hidden.rows()); }
  std::size_t size() const;
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> values);
  void add_scaled(double alpha, const PolicyParams& other);
  bool all_finite() const;

  friend bool operator==(const PolicyParams& a, const PolicyParams& b) { return a.flatten() == b.flatten(); }
};

inline std::size_t policy_input_dim(std::size_t feature_length) { return 2 * feature_length + 2; }

// One input row per candidate, aligned with `candidates` (Stop last).
Eigen::MatrixXd state_inputs(const MatchEnvironment& env, const MatchState& state,
                             std::span<const PolicyAction> candidates);

struct PolicyOutput {
  Eigen::VectorXd logits;
  Eigen::VectorXd log_probs;
  Eigen::VectorXd probs;
  double value = 0.0;
};

// Softmax over candidate rows only; the last row is the Stop row.
PolicyOutput evaluate_policy(const PolicyParams& params, const Eigen::MatrixXd& inputs);

// Probability per candidate (Stop last); non-candidates are absent, i.e. 0.
std::vector<double> action_distribution(const PolicyParams& params, const MatchEnvironment& env,
                                        const MatchState& state,
                                        std::span<const PolicyAction> candidates);

struct StepRecord {
  TripId focal = 0;
  PolicyAction action;
  Eigen::MatrixXd inputs;
  std::size_t action_index = 0;
  double log_prob = 0.0;
  double reward = 0.0;  // divided by the environment's reward scale
  double value = 0.0;
  double ret = 0.0;
  double advantage = 0.0;
};

struct Episode {
  TripId focal = 0;
  std::vector<TripId> group;  // focal plus selected co-riders, sorted
  std::vector<StepRecord> steps;
};

// One global pass: an episode per unassigned focal trip in ascending id order.
struct Rollout {
  std::vector<Episode> episodes;
  double total_reward = 0.0;  // unscaled
};

// Samples actions from the policy; greedy = argmax with ties to the lowest
// trip id and Stop last.
Rollout rollout(MatchEnvironment& env, const PolicyParams& params, std::uint64_t seed,
                bool greedy = false);

// Discounted return-to-go over the whole pass; advantage = return - value.
void compute_returns(Rollout& rollout, double gamma);

struct PPOConfig {
  double clip_epsilon = 0.2;
  double learning_rate = 3e-3;
  double gamma = 1.0;
  int epochs_per_update = 4;
  int rollouts_per_update = 4;
  double entropy_coeff = 0.01;
  double value_coeff = 0.5;
  bool normalize_advantages = true;
  int updates = 200;
  int hidden = 64;
  std::uint64_t seed = 0;

  void validate() const;
};

// Mean over steps of clipped surrogate + entropy bonus - value loss, using
// each record's stored advantage, return and old log-probability.
double ppo_objective(const PolicyParams& params, std::span<const StepRecord* const> steps,
                     const PPOConfig& cfg);

// Exact gradient of ppo_objective by backpropagation; returns the objective.
double ppo_gradient(const PolicyParams& params, std::span<const StepRecord* const> steps,
                    const PPOConfig& cfg, PolicyParams& grad);

// Computes returns/advantages, optionally standardizes advantages, then runs
// epochs_per_update full-batch gradient-ascent steps over the steps that had
// a real choice. Throws ContractError for an empty rollout set.
PolicyParams ppo_update(const PolicyParams& params, std::span<Rollout> rollouts,
                        const PPOConfig& cfg);

struct TrainingLog {
  std::vector<double> mean_reward;  // per update, unscaled
};

PolicyParams train_policy(MatchEnvironment& env, const PPOConfig& cfg, TrainingLog* log = nullptr);

// Greedy decoding of every focal trip; groups carry their routes.
MatchingSolution match_all(MatchEnvironment& env, const PolicyParams& params);

}  // namespace ridepool
