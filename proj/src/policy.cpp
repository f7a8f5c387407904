#include "ridepool/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ridepool/error.hpp"
#include "ridepool/random.hpp"

namespace ridepool {

// ---------------------------------------------------------------------------
// environment

MatchEnvironment::MatchEnvironment(const ShareabilityGraph& graph, const FeatureMap& features,
                                   RewardSpec spec, std::size_t capacity, const RoadNetwork* net)
    : graph_(&graph), spec_(spec), capacity_(capacity) {
  if (capacity < 2 || capacity > kMaxGroupSize)
    throw ConfigError("capacity must lie in [2, " + std::to_string(kMaxGroupSize) + "]");
  if (spec.objective != graph.objective())
    throw ConfigError("reward objective does not match the graph objective");
  if (!(spec.social_penalty_weight >= 0.0))
    throw ConfigError("social penalty weight must be >= 0");
  spec.profile.validate();
  if (capacity > 2 && net == nullptr)
    throw ConfigError("capacity above 2 needs a road network for group re-routing");
  if (net != nullptr) cache_.emplace(*net);

  for (const TripRequest& t : graph.trips()) {
    const auto it = features.find(t.user_id);
    if (it == features.end())
      throw CoverageError("no user features for user " + std::to_string(t.user_id) + " (trip " +
                          std::to_string(t.trip_id) + ")");
    if (contexts_.empty()) feature_length_ = it->second.size();
    if (it->second.size() != feature_length_)
      throw StructuralError("user feature vectors differ in length");
    contexts_.push_back(it->second);
  }
  // Raw embeddings are small and shrink with depth; z-score each dimension
  // over the graph's trips so every layer reaches the hidden units at unit scale.
  for (std::size_t k = 0; k < feature_length_; ++k) {
    double mean = 0.0, var = 0.0;
    for (const auto& c : contexts_) mean += c[k];
    mean /= static_cast<double>(contexts_.size());
    for (const auto& c : contexts_) var += (c[k] - mean) * (c[k] - mean);
    const double sd = std::sqrt(var / static_cast<double>(contexts_.size()));
    for (auto& c : contexts_) c[k] = sd > 1e-12 ? (c[k] - mean) / sd : 0.0;
  }
  reward_scale_ = 0.0;
  for (const auto& e : graph.edges()) reward_scale_ = std::max(reward_scale_, std::abs(e.weight));
  if (!(reward_scale_ > 0.0)) reward_scale_ = 1.0;
  assigned_.assign(graph.trips().size(), 0);
}

MatchState MatchEnvironment::initial_state(TripId focal) const {
  return MatchState{focal, &contexts_[graph_->index_of(focal)], graph_, {}};
}

std::vector<TripId> MatchEnvironment::sorted_group(const MatchState& state,
                                                   std::optional<TripId> extra) const {
  std::vector<TripId> group{state.focal};
  group.insert(group.end(), state.selected.begin(), state.selected.end());
  if (extra) group.push_back(*extra);
  std::sort(group.begin(), group.end());
  return group;
}

std::optional<SharedRoute> MatchEnvironment::group_route(std::span<const TripId> group) {
  if (group.size() == 1) return solo_shared_route(graph_->trip(group[0]));
  if (group.size() == 2) {
    if (const ShareabilityEdge* e = graph_->edge_between(group[0], group[1]);
        e != nullptr && !e->shared.riders.empty())
      return e->shared;
    if (!cache_) {
      // graph built without routes: riders only
      SharedRoute r;
      r.riders.assign(group.begin(), group.end());
      r.delay_s.assign(2, 0.0);
      r.detour_m.assign(2, 0.0);
      r.in_vehicle_distance_m.assign(2, 0.0);
      r.dropoff_time_s.assign(2, 0.0);
      return r;
    }
  }
  if (!cache_) throw ContractError("group routing needs a road network");
  std::vector<TripId> key(group.begin(), group.end());
  std::sort(key.begin(), key.end());
  auto it = group_routes_.find(key);
  if (it == group_routes_.end()) {
    std::vector<const TripRequest*> riders;
    for (TripId id : key) riders.push_back(&graph_->trip(id));
    std::optional<SharedRoute> route;
    try {
      route = best_group_route(*cache_, riders);
    } catch (const NoRouteError&) {
    }
    it = group_routes_.emplace(std::move(key), std::move(route)).first;
  }
  return it->second;
}

double MatchEnvironment::group_value_of(std::span<const TripId> group) {
  if (group.size() <= 1) return 0.0;
  if (group.size() == 2) {
    if (const ShareabilityEdge* e = graph_->edge_between(group[0], group[1])) return e->weight;
  }
  const auto route = group_route(group);
  if (!route) throw NoRouteError("group is not routable");
  std::vector<const TripRequest*> riders;
  for (TripId id : route->riders) riders.push_back(&graph_->trip(id));
  return group_value(*route, riders, spec_.objective);
}

double MatchEnvironment::acceptance_probability(std::span<const TripId> group) {
  if (group.size() <= 1 || spec_.profile.is_off()) return 1.0;
  const auto route = group_route(group);
  if (!route) return 0.0;
  double p = 1.0;
  for (double delay : route->delay_s) p *= tolerance(std::max(0.0, delay), spec_.profile);
  return p;
}

std::vector<PolicyAction> MatchEnvironment::candidate_actions(const MatchState& state) {
  std::vector<PolicyAction> out;
  if (state.selected.size() + 1 < capacity_) {
    for (const auto& nb : graph_->neighbors(state.focal)) {
      if (assigned(nb.trip)) continue;
      if (std::find(state.selected.begin(), state.selected.end(), nb.trip) != state.selected.end())
        continue;
      if (!state.selected.empty() && !group_route(sorted_group(state, nb.trip))) continue;
      out.push_back(PolicyAction::Select(nb.trip));
    }
  }
  out.push_back(PolicyAction::Stop());
  return out;
}

StepResult MatchEnvironment::step(const MatchState& state, const PolicyAction& action) {
  const auto candidates = candidate_actions(state);
  if (std::find(candidates.begin(), candidates.end(), action) == candidates.end())
    throw ContractError("action is not a feasible candidate for focal trip " +
                        std::to_string(state.focal));
  StepResult result;
  result.next = state;
  if (action.stop) {
    result.done = true;
    return result;
  }
  const auto before = sorted_group(state, std::nullopt);
  const auto after = sorted_group(state, action.trip);
  const double gain = group_value_of(after) - group_value_of(before);
  double penalty = 0.0;
  if (spec_.social_penalty_weight > 0.0 && gain > 0.0)
    penalty = spec_.social_penalty_weight * gain * (1.0 - acceptance_probability(after));
  result.next.selected.push_back(action.trip);
  result.reward = gain - penalty;
  result.done = false;
  return result;
}

void MatchEnvironment::reset() { std::fill(assigned_.begin(), assigned_.end(), 0); }

void MatchEnvironment::assign(TripId trip) { assigned_[graph_->index_of(trip)] = 1; }

// ---------------------------------------------------------------------------
// parameters

PolicyParams PolicyParams::init(std::size_t input_dim, std::size_t hidden, std::uint64_t seed) {
  if (input_dim == 0 || hidden == 0) throw ConfigError("policy dimensions must be positive");
  PolicyParams p;
  const auto h = static_cast<Eigen::Index>(hidden);
  const auto n = static_cast<Eigen::Index>(input_dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  Rng rng(seed);
  p.w_hidden.resize(h, n);
  for (Eigen::Index r = 0; r < h; ++r)
    for (Eigen::Index c = 0; c < n; ++c) p.w_hidden(r, c) = rng.uniform(-bound, bound);
  p.b_hidden = Eigen::VectorXd::Zero(h);
  p.w_select = Eigen::VectorXd::Zero(h);
  p.w_stop = Eigen::VectorXd::Zero(h);
  p.w_value = Eigen::VectorXd::Zero(h);
  return p;
}

PolicyParams PolicyParams::zeros_like(const PolicyParams& p) {
  PolicyParams z;
  z.w_hidden = Eigen::MatrixXd::Zero(p.w_hidden.rows(), p.w_hidden.cols());
  z.b_hidden = Eigen::VectorXd::Zero(p.b_hidden.size());
  z.w_select = Eigen::VectorXd::Zero(p.w_select.size());
  z.w_stop = Eigen::VectorXd::Zero(p.w_stop.size());
  z.w_value = Eigen::VectorXd::Zero(p.w_value.size());
  return z;
}

std::size_t PolicyParams::size() const {
  return static_cast<std::size_t>(w_hidden.size() + b_hidden.size() + w_select.size() +
                                   w_stop.size() + w_value.size()) +
         3;
}

std::vector<double> PolicyParams::flatten() const {
  std::vector<double> out;
  out.reserve(size());
  for (Eigen::Index r = 0; r < w_hidden.rows(); ++r)
    for (Eigen::Index c = 0; c < w_hidden.cols(); ++c) out.push_back(w_hidden(r, c));
  out.insert(out.end(), b_hidden.begin(), b_hidden.end());
  out.insert(out.end(), w_select.begin(), w_select.end());
  out.push_back(b_select);
  out.insert(out.end(), w_stop.begin(), w_stop.end());
  out.push_back(b_stop);
  out.insert(out.end(), w_value.begin(), w_value.end());
  out.push_back(b_value);
  return out;
}

void PolicyParams::unflatten(std::span<const double> values) {
  if (values.size() != size()) throw StructuralError("parameter vector has the wrong length");
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < w_hidden.rows(); ++r)
    for (Eigen::Index c = 0; c < w_hidden.cols(); ++c) w_hidden(r, c) = values[k++];
  for (auto& v : b_hidden) v = values[k++];
  for (auto& v : w_select) v = values[k++];
  b_select = values[k++];
  for (auto& v : w_stop) v = values[k++];
  b_stop = values[k++];
  for (auto& v : w_value) v = values[k++];
  b_value = values[k++];
}

void PolicyParams::add_scaled(double alpha, const PolicyParams& other) {
  w_hidden += alpha * other.w_hidden;
  b_hidden += alpha * other.b_hidden;
  w_select += alpha * other.w_select;
  b_select += alpha * other.b_select;
  w_stop += alpha * other.w_stop;
  b_stop += alpha * other.b_stop;
  w_value += alpha * other.w_value;
  b_value += alpha * other.b_value;
}

bool PolicyParams::all_finite() const {
  const auto v = flatten();
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// ---------------------------------------------------------------------------
// forward pass

Eigen::MatrixXd state_inputs(const MatchEnvironment& env, const MatchState& state,
                             std::span<const PolicyAction> candidates) {
  const auto f = static_cast<Eigen::Index>(env.feature_length());
  const auto m = static_cast<Eigen::Index>(candidates.size());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(m, 2 * f + 2);
  const Eigen::Map<const Eigen::RowVectorXd> focal(state.context->data(), f);
  const double fill =
      static_cast<double>(state.selected.size()) / static_cast<double>(env.capacity() - 1);
  for (Eigen::Index k = 0; k < m; ++k) {
    x.block(k, 0, 1, f) = focal;
    x(k, 2 * f + 1) = fill;
    const PolicyAction& a = candidates[static_cast<std::size_t>(k)];
    if (a.stop) continue;
    const auto& ctx = env.context(a.trip);
    x.block(k, f, 1, f) = Eigen::Map<const Eigen::RowVectorXd>(ctx.data(), f);
    const ShareabilityEdge* e = env.graph().edge_between(state.focal, a.trip);
    x(k, 2 * f) = e != nullptr ? e->weight / env.reward_scale() : 0.0;
  }
  return x;
}

namespace {

struct Forward {
  Eigen::MatrixXd hidden;  // rows x hidden
  PolicyOutput out;
};

Forward forward(const PolicyParams& p, const Eigen::MatrixXd& inputs) {
  const Eigen::Index m = inputs.rows();
  if (m == 0) throw ContractError("policy needs at least one candidate row");
  if (static_cast<std::size_t>(inputs.cols()) != p.input_dim())
    throw StructuralError("policy input width does not match the parameters");
  Forward f;
  f.hidden = ((inputs * p.w_hidden.transpose()).rowwise() + p.b_hidden.transpose()).array().tanh();
  f.out.logits.resize(m);
  for (Eigen::Index k = 0; k + 1 < m; ++k) f.out.logits(k) = f.hidden.row(k).dot(p.w_select) + p.b_select;
  f.out.logits(m - 1) = f.hidden.row(m - 1).dot(p.w_stop) + p.b_stop;
  const double top = f.out.logits.maxCoeff();
  const double lse = top + std::log((f.out.logits.array() - top).exp().sum());
  f.out.log_probs = f.out.logits.array() - lse;
  f.out.probs = f.out.log_probs.array().exp();
  f.out.value = f.hidden.row(m - 1).dot(p.w_value) + p.b_value;
  return f;
}

}  // namespace

PolicyOutput evaluate_policy(const PolicyParams& params, const Eigen::MatrixXd& inputs) {
  return forward(params, inputs).out;
}

std::vector<double> action_distribution(const PolicyParams& params, const MatchEnvironment& env,
                                        const MatchState& state,
                                        std::span<const PolicyAction> candidates) {
  if (candidates.empty() || !candidates.back().stop)
    throw ContractError("candidate list must end with Stop");
  const PolicyOutput out = evaluate_policy(params, state_inputs(env, state, candidates));
  return {out.probs.begin(), out.probs.end()};
}

// ---------------------------------------------------------------------------
// rollouts

Rollout rollout(MatchEnvironment& env, const PolicyParams& params, std::uint64_t seed, bool greedy) {
  Rng rng(seed);
  Rollout result;
  env.reset();
  for (const TripRequest& t : env.graph().trips()) {
    if (env.assigned(t.trip_id)) continue;
    Episode ep;
    ep.focal = t.trip_id;
    MatchState state = env.initial_state(t.trip_id);
    for (;;) {
      const auto candidates = env.candidate_actions(state);
      StepRecord rec;
      rec.focal = t.trip_id;
      rec.inputs = state_inputs(env, state, candidates);
      const PolicyOutput out = evaluate_policy(params, rec.inputs);
      std::size_t pick = 0;
      if (greedy) {
        for (std::size_t k = 1; k < candidates.size(); ++k)
          if (out.probs(static_cast<Eigen::Index>(k)) > out.probs(static_cast<Eigen::Index>(pick))) pick = k;
      } else {
        const double u = rng.uniform();
        double acc = 0.0;
        pick = candidates.size() - 1;
        for (std::size_t k = 0; k < candidates.size(); ++k) {
          acc += out.probs(static_cast<Eigen::Index>(k));
          if (u < acc) {
            pick = k;
            break;
          }
        }
      }
      rec.action = candidates[pick];
      rec.action_index = pick;
      rec.log_prob = out.log_probs(static_cast<Eigen::Index>(pick));
      rec.value = out.value;
      StepResult sr = env.step(state, rec.action);
      result.total_reward += sr.reward;
      rec.reward = sr.reward / env.reward_scale();
      ep.steps.push_back(std::move(rec));
      if (sr.done) break;
      state = std::move(sr.next);
    }
    ep.group = {state.focal};
    ep.group.insert(ep.group.end(), state.selected.begin(), state.selected.end());
    std::sort(ep.group.begin(), ep.group.end());
    for (TripId id : ep.group) env.assign(id);
    result.episodes.push_back(std::move(ep));
  }
  return result;
}

void compute_returns(Rollout& r, double gamma) {
  double g = 0.0;
  for (auto ep = r.episodes.rbegin(); ep != r.episodes.rend(); ++ep) {
    for (auto st = ep->steps.rbegin(); st != ep->steps.rend(); ++st) {
      g = st->reward + gamma * g;
      st->ret = g;
      st->advantage = g - st->value;
    }
  }
}

// ---------------------------------------------------------------------------
// PPO

void PPOConfig::validate() const {
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) throw ConfigError("ppo.clip_epsilon must lie in (0, 1)");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("ppo.gamma must lie in (0, 1]");
  if (!(learning_rate > 0.0)) throw ConfigError("ppo.learning_rate must be positive");
  if (epochs_per_update < 1) throw ConfigError("ppo.epochs must be >= 1");
  if (rollouts_per_update < 1) throw ConfigError("ppo.rollouts must be >= 1");
  if (!(entropy_coeff >= 0.0)) throw ConfigError("ppo.entropy_coeff must be >= 0");
  if (!(value_coeff >= 0.0)) throw ConfigError("ppo.value_coeff must be >= 0");
  if (updates < 0) throw ConfigError("ppo.updates must be >= 0");
  if (hidden < 1) throw ConfigError("ppo.hidden must be >= 1");
}

namespace {

struct StepTerms {
  double objective = 0.0;
  Eigen::VectorXd dlogits;  // d objective / d logits
  double dvalue = 0.0;
};

StepTerms step_terms(const PolicyOutput& out, const StepRecord& s, const PPOConfig& cfg) {
  const auto a = static_cast<Eigen::Index>(s.action_index);
  const double ratio = std::exp(out.log_probs(a) - s.log_prob);
  const double clipped = std::clamp(ratio, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon);
  const double unclipped_term = ratio * s.advantage;
  const double clipped_term = clipped * s.advantage;
  const bool use_unclipped = unclipped_term <= clipped_term;
  const double surrogate = use_unclipped ? unclipped_term : clipped_term;
  const double dsurr_dratio = use_unclipped ? s.advantage : 0.0;

  const double entropy = -(out.probs.array() * out.log_probs.array()).sum();
  const double verr = out.value - s.ret;

  StepTerms t;
  t.objective = surrogate + cfg.entropy_coeff * entropy - cfg.value_coeff * verr * verr;
  t.dlogits = -dsurr_dratio * ratio * out.probs;
  t.dlogits(a) += dsurr_dratio * ratio;
  t.dlogits.array() -= cfg.entropy_coeff * out.probs.array() * (out.log_probs.array() + entropy);
  t.dvalue = -2.0 * cfg.value_coeff * verr;
  return t;
}

}  // namespace

double ppo_objective(const PolicyParams& params, std::span<const StepRecord* const> steps,
                     const PPOConfig& cfg) {
  if (steps.empty()) return 0.0;
  double total = 0.0;
  for (const StepRecord* s : steps) total += step_terms(evaluate_policy(params, s->inputs), *s, cfg).objective;
  return total / static_cast<double>(steps.size());
}

double ppo_gradient(const PolicyParams& params, std::span<const StepRecord* const> steps,
                    const PPOConfig& cfg, PolicyParams& grad) {
  grad = PolicyParams::zeros_like(params);
  if (steps.empty()) return 0.0;
  const double scale = 1.0 / static_cast<double>(steps.size());
  double total = 0.0;
  for (const StepRecord* s : steps) {
    const Forward f = forward(params, s->inputs);
    const StepTerms t = step_terms(f.out, *s, cfg);
    total += t.objective;
    const Eigen::Index m = s->inputs.rows();
    const Eigen::Index stop = m - 1;

    Eigen::MatrixXd dhidden(m, f.hidden.cols());
    for (Eigen::Index k = 0; k < stop; ++k) {
      const double g = scale * t.dlogits(k);
      grad.b_select += g;
      grad.w_select += g * f.hidden.row(k).transpose();
      dhidden.row(k) = g * params.w_select.transpose();
    }
    const double gs = scale * t.dlogits(stop);
    const double gv = scale * t.dvalue;
    grad.b_stop += gs;
    grad.w_stop += gs * f.hidden.row(stop).transpose();
    grad.b_value += gv;
    grad.w_value += gv * f.hidden.row(stop).transpose();
    dhidden.row(stop) = gs * params.w_stop.transpose() + gv * params.w_value.transpose();

    const Eigen::MatrixXd dpre = dhidden.array() * (1.0 - f.hidden.array().square());
    grad.w_hidden += dpre.transpose() * s->inputs;
    grad.b_hidden += dpre.colwise().sum().transpose();
  }
  return total * scale;
}

PolicyParams ppo_update(const PolicyParams& params, std::span<Rollout> rollouts, const PPOConfig& cfg) {
  cfg.validate();
  if (rollouts.empty()) throw ContractError("ppo_update needs at least one rollout");
  std::vector<const StepRecord*> steps;
  for (Rollout& r : rollouts) {
    compute_returns(r, cfg.gamma);
    // Forced steps (Stop as the only candidate) carry no decision to learn.
    for (const Episode& ep : r.episodes)
      for (const StepRecord& s : ep.steps)
        if (s.inputs.rows() > 1) steps.push_back(&s);
  }
  if (steps.empty()) return params;

  // Standardized advantages live in a private copy of the batch.
  std::vector<StepRecord> batch;
  batch.reserve(steps.size());
  for (const StepRecord* s : steps) batch.push_back(*s);
  if (cfg.normalize_advantages && batch.size() > 1) {
    double mean = 0.0;
    for (const auto& s : batch) mean += s.advantage;
    mean /= static_cast<double>(batch.size());
    double var = 0.0;
    for (const auto& s : batch) var += (s.advantage - mean) * (s.advantage - mean);
    const double sd = std::sqrt(var / static_cast<double>(batch.size()));
    if (sd > 1e-8)
      for (auto& s : batch) s.advantage = (s.advantage - mean) / sd;
  }
  std::vector<const StepRecord*> view;
  view.reserve(batch.size());
  for (const auto& s : batch) view.push_back(&s);

  PolicyParams current = params;
  PolicyParams grad;
  for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
    ppo_gradient(current, view, cfg, grad);
    current.add_scaled(cfg.learning_rate, grad);
  }
  return current;
}

PolicyParams train_policy(MatchEnvironment& env, const PPOConfig& cfg, TrainingLog* log) {
  cfg.validate();
  PolicyParams params = PolicyParams::init(policy_input_dim(env.feature_length()),
                                           static_cast<std::size_t>(cfg.hidden),
                                           derive_seed(cfg.seed, {0x1a17}));
  std::vector<Rollout> batch(static_cast<std::size_t>(cfg.rollouts_per_update));
  for (int u = 0; u < cfg.updates; ++u) {
    double reward = 0.0;
    for (int r = 0; r < cfg.rollouts_per_update; ++r) {
      batch[static_cast<std::size_t>(r)] =
          rollout(env, params, derive_seed(cfg.seed, {0x5eed, static_cast<std::uint64_t>(u),
                                                      static_cast<std::uint64_t>(r)}));
      reward += batch[static_cast<std::size_t>(r)].total_reward;
    }
    if (log != nullptr) log->mean_reward.push_back(reward / cfg.rollouts_per_update);
    params = ppo_update(params, batch, cfg);
  }
  env.reset();
  return params;
}

MatchingSolution match_all(MatchEnvironment& env, const PolicyParams& params) {
  const Rollout r = rollout(env, params, 0, /*greedy=*/true);
  MatchingSolution sol;
  for (const Episode& ep : r.episodes) {
    sol.groups.push_back(ep.group);
    sol.objective_value += env.group_value_of(ep.group);
    const auto route = env.group_route(ep.group);
    if (!route) throw NoRouteError("decoded group is not routable");
    sol.routes.push_back(*route);
  }
  env.reset();
  canonicalize(sol);
  return sol;
}

}  // namespace ridepool
