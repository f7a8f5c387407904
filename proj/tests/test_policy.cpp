#include <gtest/gtest.h>

#include <cmath>

#include "ridepool/error.hpp"
#include "ridepool/oracle.hpp"
#include "ridepool/policy.hpp"
#include "ridepool/random.hpp"

using namespace ridepool;

namespace {

// 1 x 6 line, 1000 m spacing. Trips 0 (0->2) and 1 (1->3) overlap, trip 2
// (0->2, departing an hour later) is temporally isolated.
struct Fixture {
  RoadNetwork net = build_grid_network(1, 6, 1000.0, 10.0, {0.0, 0.0});
  RouteCache cache{net};
  ShareabilityGraph graph;
  FeatureMap features;

  explicit Fixture(Objective obj = Objective::MinTotalDistance) {
    std::vector<TripRequest> trips{make_trip(cache, 0, 10, 0, 2, 0.0), make_trip(cache, 1, 11, 1, 3, 0.0),
                                   make_trip(cache, 2, 12, 0, 2, 3600.0), make_trip(cache, 3, 13, 0, 3, 30.0)};
    graph = build_shareability_graph(net, trips, obj);
    features = {{10, {1.0, 5.0}}, {11, {2.0, 5.0}}, {12, {3.0, 5.0}}, {13, {6.0, 5.0}}};
  }
};

Eigen::MatrixXd random_inputs(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-1, 1);
  return m;
}

PolicyParams random_params(Rng& rng, std::size_t input, std::size_t hidden) {
  PolicyParams p = PolicyParams::init(input, hidden, rng.next());
  std::vector<double> v = p.flatten();
  for (double& x : v) x = rng.uniform(-0.8, 0.8);
  p.unflatten(v);
  return p;
}

}  // namespace

TEST(MatchEnvironment, Validation) {
  Fixture f;
  EXPECT_THROW(MatchEnvironment(f.graph, f.features, {}, 1), ConfigError);
  EXPECT_THROW(MatchEnvironment(f.graph, f.features, {}, 5, &f.net), ConfigError);
  EXPECT_THROW(MatchEnvironment(f.graph, f.features, {}, 3), ConfigError);  // no network
  RewardSpec wrong;
  wrong.objective = Objective::MaxSharedRides;
  EXPECT_THROW(MatchEnvironment(f.graph, f.features, wrong), ConfigError);
  FeatureMap missing = f.features;
  missing.erase(12);
  EXPECT_THROW(MatchEnvironment(f.graph, missing, {}), CoverageError);
  FeatureMap ragged = f.features;
  ragged[12] = {1.0};
  EXPECT_THROW(MatchEnvironment(f.graph, ragged, {}), StructuralError);
}

TEST(MatchEnvironment, ContextsAreStandardizedPerDimension) {
  Fixture f;
  MatchEnvironment env(f.graph, f.features, {});
  double mean = 0.0, sq = 0.0;
  for (TripId t = 0; t < 4; ++t) {
    mean += env.context(t)[0];
    sq += env.context(t)[0] * env.context(t)[0];
    EXPECT_EQ(env.context(t)[1], 0.0);  // constant dimension
  }
  EXPECT_NEAR(mean / 4, 0.0, 1e-12);
  EXPECT_NEAR(sq / 4, 1.0, 1e-12);
  // Raw values 1, 2, 3, 6: mean 3, sd sqrt(3.5).
  EXPECT_NEAR(env.context(0)[0], -2.0 / std::sqrt(3.5), 1e-12);
}

TEST(MatchEnvironment, CandidatesAscendingWithStopLast) {
  Fixture f;
  MatchEnvironment env(f.graph, f.features, {});
  const auto c0 = env.candidate_actions(env.initial_state(0));
  ASSERT_FALSE(c0.empty());
  EXPECT_EQ(c0.back(), PolicyAction::Stop());
  for (std::size_t k = 0; k + 1 < c0.size(); ++k) {
    EXPECT_FALSE(c0[k].stop);
    EXPECT_NE(f.graph.edge_between(0, c0[k].trip), nullptr);
    if (k > 0) {
      EXPECT_LT(c0[k - 1].trip, c0[k].trip);
    }
  }
  EXPECT_EQ(env.candidate_actions(env.initial_state(2)), std::vector<PolicyAction>{PolicyAction::Stop()});

  // Assigned trips disappear; a full pair leaves only Stop.
  env.assign(1);
  for (const auto& a : env.candidate_actions(env.initial_state(0))) EXPECT_NE(a, PolicyAction::Select(1));
  env.reset();
  MatchState s = env.initial_state(0);
  s.selected = {1};
  EXPECT_EQ(env.candidate_actions(s), std::vector<PolicyAction>{PolicyAction::Stop()});
}

TEST(MatchEnvironment, StepRewardIsEdgeWeight) {
  Fixture f;
  MatchEnvironment env(f.graph, f.features, {});
  const MatchState s = env.initial_state(0);
  const StepResult r = env.step(s, PolicyAction::Select(1));
  EXPECT_EQ(r.reward, f.graph.edge_between(0, 1)->weight);
  EXPECT_EQ(r.reward, 1000.0);
  EXPECT_FALSE(r.done);
  EXPECT_EQ(r.next.selected, std::vector<TripId>{1});
  const StepResult stop = env.step(r.next, PolicyAction::Stop());
  EXPECT_TRUE(stop.done);
  EXPECT_EQ(stop.reward, 0.0);
  EXPECT_THROW(env.step(s, PolicyAction::Select(2)), ContractError);
}

TEST(MatchEnvironment, SocialPenaltyScalesLostGain) {
  Fixture f;
  RewardSpec spec;
  spec.social_penalty_weight = 0.5;
  spec.profile = {900.0, 2.0, 1.0};
  MatchEnvironment env(f.graph, f.features, spec);
  const std::vector<TripId> pair{0, 1};
  const double p = env.acceptance_probability(pair);
  const auto& delays = f.graph.edge_between(0, 1)->shared.delay_s;
  double expected_p = 1.0;
  for (double d : delays) expected_p *= std::exp(-(d / 900.0) * 3.0);
  EXPECT_NEAR(p, expected_p, 1e-15);
  EXPECT_LT(p, 1.0);
  const StepResult r = env.step(env.initial_state(0), PolicyAction::Select(1));
  EXPECT_NEAR(r.reward, 1000.0 - 0.5 * 1000.0 * (1.0 - p), 1e-9);

  spec.profile = ToleranceProfile::off();
  MatchEnvironment off(f.graph, f.features, spec);
  EXPECT_EQ(off.acceptance_probability(pair), 1.0);
  EXPECT_EQ(off.step(off.initial_state(0), PolicyAction::Select(1)).reward, 1000.0);
}

TEST(MatchEnvironment, RewardScaleIsLargestWeight) {
  Fixture f;
  MatchEnvironment env(f.graph, f.features, {});
  double top = 0.0;
  for (const auto& e : f.graph.edges()) top = std::max(top, e.weight);
  EXPECT_EQ(env.reward_scale(), top);
}

TEST(MatchEnvironment, GroupsOfThreeAreRerouted) {
  Fixture f;
  MatchEnvironment env(f.graph, f.features, {}, 3, &f.net);
  MatchState s = env.initial_state(0);
  s.selected = {1};
  const std::vector<TripId> trio{0, 1, 3};
  if (f.graph.edge_between(0, 3) != nullptr) {
    const auto cands = env.candidate_actions(s);
    EXPECT_NE(std::find(cands.begin(), cands.end(), PolicyAction::Select(3)), cands.end());
  }
  const auto route = env.group_route(trio);
  ASSERT_TRUE(route.has_value());
  std::vector<const TripRequest*> riders{&f.graph.trip(0), &f.graph.trip(1), &f.graph.trip(3)};
  EXPECT_EQ(route->total_distance_m, best_group_route(f.cache, riders).total_distance_m);
  EXPECT_EQ(env.group_value_of(trio), group_value(*route, riders, Objective::MinTotalDistance));
}

TEST(PolicyParams, FlattenRoundTripAndSize) {
  Rng rng(1);
  const PolicyParams p = random_params(rng, 6, 4);
  EXPECT_EQ(p.size(), 6u * 4 + 4 + 4 + 4 + 4 + 3);
  PolicyParams q = PolicyParams::zeros_like(p);
  q.unflatten(p.flatten());
  EXPECT_EQ(q, p);
  EXPECT_THROW(q.unflatten(std::vector<double>(3)), StructuralError);
  EXPECT_TRUE(p.all_finite());
}

TEST(PolicyParams, InitHasZeroHeadsAndBoundedHidden) {
  const PolicyParams p = PolicyParams::init(9, 5, 3);
  EXPECT_TRUE(p.w_select.isZero());
  EXPECT_TRUE(p.w_stop.isZero());
  EXPECT_TRUE(p.w_value.isZero());
  EXPECT_EQ(p.b_select, 0.0);
  EXPECT_LE(p.w_hidden.cwiseAbs().maxCoeff(), 1.0 / 3.0);
  EXPECT_EQ(p, PolicyParams::init(9, 5, 3));
  EXPECT_THROW(PolicyParams::init(0, 5, 3), ConfigError);
}

TEST(EvaluatePolicy, ZeroHeadsGiveUniformDistribution) {
  const PolicyParams p = PolicyParams::init(4, 3, 1);
  Rng rng(2);
  const PolicyOutput out = evaluate_policy(p, random_inputs(rng, 5, 4));
  for (Eigen::Index k = 0; k < 5; ++k) EXPECT_NEAR(out.probs(k), 0.2, 1e-15);
  EXPECT_EQ(out.value, 0.0);
}

TEST(EvaluatePolicy, MatchesHandComputation) {
  Rng rng(3);
  const PolicyParams p = random_params(rng, 3, 2);
  const Eigen::MatrixXd x = random_inputs(rng, 3, 3);
  std::vector<double> logits(3);
  double value = 0.0;
  for (int k = 0; k < 3; ++k) {
    double h[2];
    for (int j = 0; j < 2; ++j) {
      double z = p.b_hidden(j);
      for (int i = 0; i < 3; ++i) z += p.w_hidden(j, i) * x(k, i);
      h[j] = std::tanh(z);
    }
    if (k < 2) {
      logits[k] = p.b_select + h[0] * p.w_select(0) + h[1] * p.w_select(1);
    } else {
      logits[k] = p.b_stop + h[0] * p.w_stop(0) + h[1] * p.w_stop(1);
      value = p.b_value + h[0] * p.w_value(0) + h[1] * p.w_value(1);
    }
  }
  const double z = std::exp(logits[0]) + std::exp(logits[1]) + std::exp(logits[2]);
  const PolicyOutput out = evaluate_policy(p, x);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(out.logits(k), logits[k], 1e-14);
    EXPECT_NEAR(out.probs(k), std::exp(logits[k]) / z, 1e-14);
    EXPECT_NEAR(out.log_probs(k), logits[k] - std::log(z), 1e-14);
  }
  EXPECT_NEAR(out.value, value, 1e-14);
  EXPECT_NEAR(out.probs.sum(), 1.0, 1e-15);
}

TEST(EvaluatePolicy, RejectsBadShapes) {
  const PolicyParams p = PolicyParams::init(4, 3, 1);
  EXPECT_THROW(evaluate_policy(p, Eigen::MatrixXd(0, 4)), ContractError);
  EXPECT_THROW(evaluate_policy(p, Eigen::MatrixXd::Zero(2, 5)), StructuralError);
}

TEST(StateInputs, LayoutFollowsCandidates) {
  Fixture f;
  MatchEnvironment env(f.graph, f.features, {});
  const MatchState s = env.initial_state(0);
  const auto cands = env.candidate_actions(s);
  const Eigen::MatrixXd x = state_inputs(env, s, cands);
  ASSERT_EQ(x.cols(), static_cast<Eigen::Index>(policy_input_dim(2)));
  ASSERT_EQ(x.rows(), static_cast<Eigen::Index>(cands.size()));
  for (Eigen::Index k = 0; k < x.rows(); ++k) {
    EXPECT_EQ(x(k, 0), env.context(0)[0]);
    EXPECT_EQ(x(k, 5), 0.0);  // nothing selected yet
  }
  const Eigen::Index stop = x.rows() - 1;
  EXPECT_EQ(x(stop, 2), 0.0);
  EXPECT_EQ(x(stop, 4), 0.0);
  EXPECT_EQ(x(0, 2), env.context(cands[0].trip)[0]);
  EXPECT_EQ(x(0, 4), f.graph.edge_between(0, cands[0].trip)->weight / env.reward_scale());
}

TEST(ComputeReturns, DiscountsAcrossTheWholePass) {
  Rollout r;
  r.episodes.resize(2);
  r.episodes[0].steps.resize(2);
  r.episodes[1].steps.resize(1);
  r.episodes[0].steps[0].reward = 1.0;
  r.episodes[0].steps[1].reward = 0.0;
  r.episodes[1].steps[0].reward = 2.0;
  r.episodes[1].steps[0].value = 0.5;
  compute_returns(r, 0.5);
  EXPECT_EQ(r.episodes[1].steps[0].ret, 2.0);
  EXPECT_EQ(r.episodes[1].steps[0].advantage, 1.5);
  EXPECT_EQ(r.episodes[0].steps[1].ret, 1.0);
  EXPECT_EQ(r.episodes[0].steps[0].ret, 1.5);
}

TEST(PPOGradient, MatchesCentralDifferences) {
  Rng rng(5);
  PPOConfig cfg;
  cfg.entropy_coeff = 0.05;
  for (int trial = 0; trial < 5; ++trial) {
    const PolicyParams p = random_params(rng, 4, 3);
    std::vector<StepRecord> recs(6);
    for (auto& s : recs) {
      s.inputs = random_inputs(rng, 2 + static_cast<Eigen::Index>(rng.below(3)), 4);
      s.action_index = rng.below(static_cast<std::uint64_t>(s.inputs.rows()));
      const PolicyOutput out = evaluate_policy(p, s.inputs);
      // Old log-prob places the ratio well inside or well outside the clip band.
      const double shift = rng.uniform() < 0.5 ? 0.05 : 0.6;
      s.log_prob = out.log_probs(static_cast<Eigen::Index>(s.action_index)) + (rng.uniform() < 0.5 ? shift : -shift);
      s.advantage = rng.uniform(-2, 2);
      s.ret = rng.uniform(-1, 1);
    }
    std::vector<const StepRecord*> view;
    for (const auto& s : recs) view.push_back(&s);
    PolicyParams grad;
    const double obj = ppo_gradient(p, view, cfg, grad);
    EXPECT_NEAR(obj, ppo_objective(p, view, cfg), 1e-14);
    const std::vector<double> theta = p.flatten(), g = grad.flatten();
    double err = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      PolicyParams plus = p, minus = p;
      auto tp = theta, tm = theta;
      tp[i] += 1e-6;
      tm[i] -= 1e-6;
      plus.unflatten(tp);
      minus.unflatten(tm);
      const double fd = (ppo_objective(plus, view, cfg) - ppo_objective(minus, view, cfg)) / 2e-6;
      err += (fd - g[i]) * (fd - g[i]);
      norm += fd * fd;
    }
    EXPECT_LT(std::sqrt(err), 1e-6 * std::max(1.0, std::sqrt(norm)));
  }
}

TEST(Rollout, EpisodesPartitionTheTrips) {
  Fixture f;
  MatchEnvironment env(f.graph, f.features, {});
  const PolicyParams p = PolicyParams::init(policy_input_dim(2), 8, 1);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Rollout r = rollout(env, p, seed);
    std::vector<TripId> seen;
    double total = 0.0;
    for (const auto& ep : r.episodes) {
      EXPECT_EQ(ep.group.front() <= ep.focal, true);
      seen.insert(seen.end(), ep.group.begin(), ep.group.end());
      EXPECT_TRUE(ep.steps.back().action.stop);
      for (const auto& s : ep.steps) total += s.reward * env.reward_scale();
    }
    std::sort(seen.begin(), seen.end());
    EXPECT_EQ(seen, (std::vector<TripId>{0, 1, 2, 3}));
    EXPECT_NEAR(total, r.total_reward, 1e-9);
    const Rollout again = rollout(env, p, seed);
    ASSERT_EQ(again.episodes.size(), r.episodes.size());
    for (std::size_t k = 0; k < r.episodes.size(); ++k) EXPECT_EQ(again.episodes[k].group, r.episodes[k].group);
  }
}

TEST(PPOUpdate, RejectsEmptyAndSkipsForcedSteps) {
  Fixture f;
  MatchEnvironment env(f.graph, f.features, {});
  const PolicyParams p = PolicyParams::init(policy_input_dim(2), 4, 1);
  PPOConfig cfg;
  EXPECT_THROW(ppo_update(p, std::span<Rollout>{}, cfg), ContractError);

  Rollout forced;
  forced.episodes.resize(1);
  forced.episodes[0].steps.resize(1);
  forced.episodes[0].steps[0].inputs = Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(policy_input_dim(2)));
  forced.episodes[0].steps[0].reward = 5.0;
  std::vector<Rollout> batch{forced};
  EXPECT_EQ(ppo_update(p, batch, cfg), p);

  std::vector<Rollout> real{rollout(env, p, 3), rollout(env, p, 4)};
  const PolicyParams q = ppo_update(p, real, cfg);
  EXPECT_NE(q, p);
  EXPECT_TRUE(q.all_finite());
}

TEST(PPOConfig, Validation) {
  PPOConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.clip_epsilon = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.gamma = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.hidden = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.updates = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(TrainPolicy, ReachesTheOptimumOnASmallInstance) {
  Fixture f;
  MatchEnvironment env(f.graph, f.features, {});
  PPOConfig cfg;
  cfg.updates = 60;
  cfg.hidden = 16;
  cfg.learning_rate = 0.01;
  cfg.seed = 9;
  TrainingLog log;
  const PolicyParams p = train_policy(env, cfg, &log);
  EXPECT_EQ(log.mean_reward.size(), 60u);
  EXPECT_TRUE(p.all_finite());
  const MatchingSolution sol = match_all(env, p);
  EXPECT_TRUE(is_partition(sol, f.graph.trips(), 2));
  ASSERT_EQ(sol.routes.size(), sol.groups.size());
  double value = 0.0;
  for (const auto& g : sol.groups)
    if (g.size() == 2) value += f.graph.edge_between(g[0], g[1])->weight;
  EXPECT_EQ(sol.objective_value, value);
  EXPECT_EQ(sol.objective_value, brute_force_optimal(f.graph).objective_value);
  // Training is deterministic in its seed.
  EXPECT_EQ(train_policy(env, cfg), p);
}
