#include <doctest.h>

#include <cmath>

#include "mfc/ppo.hpp"

using namespace mfc;

namespace {

Trajectory empty_traj(int obs_dim, int act_dim, int steps) {
  Trajectory t;
  t.obs = MatX::Zero(obs_dim, steps);
  t.raw_actions = MatX::Zero(act_dim, steps);
  t.old_means = MatX::Zero(act_dim, steps);
  t.old_log_std = VecX::Zero(act_dim);
  t.log_probs = VecX::Zero(steps);
  t.rewards = VecX::Zero(steps);
  t.values = VecX::Zero(steps);
  t.next_values = VecX::Zero(steps);
  t.episode_end.assign(steps, 0);
  t.terminal.assign(steps, 0);
  t.lanes = 1;
  t.env_steps = steps;
  return t;
}

} // namespace

TEST_SUITE("ppo") {

TEST_CASE("gae hand check: three unit rewards") {
  Trajectory t = empty_traj(1, 1, 3);
  t.rewards << 1.0, 1.0, 1.0;
  t.episode_end = {0, 0, 1};
  t.terminal = {0, 0, 1};
  const GaeResult g = compute_gae(t, 0.99, 1.0);
  CHECK(std::abs(g.advantages_raw(0) - 2.9701) < 1e-12);
  CHECK(std::abs(g.advantages_raw(1) - 1.99) < 1e-12);
  CHECK(std::abs(g.advantages_raw(2) - 1.0) < 1e-12);
  CHECK(g.value_targets == g.advantages_raw); // zero baseline
}

TEST_CASE("gae single step and empty input") {
  Trajectory t = empty_traj(1, 1, 1);
  t.rewards(0) = 2.5;
  t.values(0) = 0.7;
  t.episode_end = {1};
  t.terminal = {1};
  const GaeResult g = compute_gae(t, 0.99, 1.0);
  CHECK(g.advantages_raw(0) == doctest::Approx(1.8));

  Trajectory none = empty_traj(1, 1, 0);
  CHECK_THROWS_AS(compute_gae(none, 0.99, 1.0), std::invalid_argument);
}

TEST_CASE("gae truncation bootstraps from the successor value") {
  Trajectory t = empty_traj(1, 1, 2);
  t.rewards << 1.0, 1.0;
  t.values << 0.0, 0.0;
  t.next_values << 0.0, 3.0;
  t.episode_end = {0, 1};
  t.terminal = {0, 0}; // time truncation, not a terminal state
  const GaeResult g = compute_gae(t, 0.5, 1.0);
  // A1 = 1 + 0.5*3 = 2.5; A0 = 1 + 0.5*A1 ... with next_values(0)=values(1)
  CHECK(g.advantages_raw(1) == doctest::Approx(2.5));
  CHECK(g.advantages_raw(0) == doctest::Approx(1.0 + 0.5 * 2.5));
}

TEST_CASE("gae zero inputs give zero advantages") {
  Trajectory t = empty_traj(1, 1, 5);
  t.episode_end = {0, 0, 0, 0, 1};
  t.terminal = t.episode_end;
  const GaeResult g = compute_gae(t, 0.99, 1.0);
  CHECK(g.advantages_raw.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.advantages.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("advantage normalization") {
  Trajectory t = empty_traj(1, 1, 64);
  rng::Stream s(rng::Key{70});
  for (int i = 0; i < 64; ++i) {
    t.rewards(i) = s.uniform(-3, 5);
    t.episode_end[i] = 1; // one-step episodes
    t.terminal[i] = 1;
  }
  const GaeResult g = compute_gae(t, 0.99, 1.0);
  CHECK(std::abs(g.advantages.mean()) < 1e-6);
  const Scalar var = g.advantages.array().square().mean();
  CHECK(std::abs(var - 1.0) < 1e-3);

  SUBCASE("adding a constant to every advantage changes nothing") {
    Trajectory shifted = t;
    shifted.rewards.array() += 7.5; // one-step episodes: adv shift by 7.5
    const GaeResult g2 = compute_gae(shifted, 0.99, 1.0);
    CHECK((g2.advantages - g.advantages).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("gae handles interleaved lanes independently") {
  // two lanes, two env steps; lane rewards differ
  Trajectory t = empty_traj(1, 1, 4);
  t.lanes = 2;
  t.rewards << 1.0, 2.0, 1.0, 2.0;
  t.episode_end = {0, 0, 1, 1};
  t.terminal = {0, 0, 1, 1};
  const GaeResult g = compute_gae(t, 1.0, 1.0);
  CHECK(g.advantages_raw(0) == doctest::Approx(2.0)); // lane 0: 1 + 1
  CHECK(g.advantages_raw(1) == doctest::Approx(4.0)); // lane 1: 2 + 2
  CHECK(g.advantages_raw(2) == doctest::Approx(1.0));
  CHECK(g.advantages_raw(3) == doctest::Approx(2.0));
}

TEST_CASE("identity update: ratio one, zero KL, surrogate is mean advantage") {
  PolicyConfig pc;
  pc.obs_dim = 3;
  pc.action_dim = 2;
  pc.hidden = {8};
  Policy policy = init_policy(pc, rng::Key{71});

  const int steps = 32;
  Trajectory t = empty_traj(3, 2, steps);
  rng::Stream s(rng::Key{72});
  const VecX ls = policy.clamped_log_std();
  t.old_log_std = ls;
  for (int i = 0; i < steps; ++i) {
    VecX obs(3);
    obs << s.uniform(-1, 1), s.uniform(-1, 1), s.uniform(-1, 1);
    t.obs.col(i) = obs;
    const VecX mean = policy.policy_mean(MatX(obs)).col(0);
    const ActionSample a = sample_action(mean, ls, s);
    t.raw_actions.col(i) = a.raw;
    t.old_means.col(i) = mean;
    t.log_probs(i) = a.log_prob;
    t.rewards(i) = s.uniform(-1, 1);
    t.episode_end[i] = 1;
    t.terminal[i] = 1;
  }

  TrainState st;
  st.policy = policy;
  st.adam = make_adam_state(policy_num_params(policy));
  st.kl_coeff = 0.03;
  PpoConfig cfg;
  cfg.learning_rate = 0.0; // observe losses without moving parameters
  cfg.train_batch = steps;
  cfg.minibatch = steps;
  cfg.epochs_per_batch = 1;
  const UpdateStats stats = ppo_update(st, t, cfg, rng::Key{73});
  CHECK(std::abs(stats.mean_kl) < 1e-12);
  // surrogate equals the mean normalized advantage, which is zero
  CHECK(std::abs(stats.policy_loss) < 1e-9);
}

TEST_CASE("clipped branch contributes no policy gradient") {
  PolicyConfig pc;
  pc.obs_dim = 2;
  pc.action_dim = 2;
  pc.hidden = {4};
  Policy policy = init_policy(pc, rng::Key{74});

  Trajectory t = empty_traj(2, 2, 2);
  rng::Stream s(rng::Key{75});
  const VecX ls = policy.clamped_log_std();
  t.old_log_std = ls;
  for (int i = 0; i < 2; ++i) {
    VecX obs(2);
    obs << s.uniform(-1, 1), s.uniform(-1, 1);
    t.obs.col(i) = obs;
    const VecX mean = policy.policy_mean(MatX(obs)).col(0);
    const ActionSample a = sample_action(mean, ls, s);
    t.raw_actions.col(i) = a.raw;
    t.old_means.col(i) = mean;
    t.episode_end[i] = 1;
    t.terminal[i] = 1;
  }
  // force ratios deep into the clipped region with signs that pick the
  // clipped branch: sample 0 has ratio e, positive advantage; sample 1 has
  // ratio 1/e, negative advantage
  t.log_probs(0) = gaussian_log_prob(t.raw_actions.col(0), t.old_means.col(0),
                                     ls) -
                   1.0;
  t.log_probs(1) = gaussian_log_prob(t.raw_actions.col(1), t.old_means.col(1),
                                     ls) +
                   1.0;
  t.rewards(0) = 5.0;  // normalized advantage +1
  t.rewards(1) = -5.0; // normalized advantage -1

  TrainState st;
  st.policy = policy;
  st.adam = make_adam_state(policy_num_params(policy));
  st.kl_coeff = 0.0; // isolate the surrogate path
  PpoConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.kl_coeff = 0.0;
  cfg.train_batch = 2;
  cfg.minibatch = 2;
  cfg.epochs_per_batch = 1;
  cfg.entropy_coeff = 0.0;

  const MatX pi_w0 = st.policy.pi.w[0];
  const VecX log_std0 = st.policy.log_std;
  ppo_update(st, t, cfg, rng::Key{76});
  // value net trains, the policy trunk and log-std must stay untouched
  CHECK(st.policy.pi.w[0] == pi_w0);
  CHECK(st.policy.log_std == log_std0);
  CHECK(st.policy.value.w[0] != policy.value.w[0]);
}

TEST_CASE("one-parameter bandit converges to the known optimum") {
  // reward -(a - 0.3)^2 for the clipped 1-D action; optimum at 0.3
  PolicyConfig pc;
  pc.obs_dim = 1;
  pc.action_dim = 1;
  pc.hidden = {8};
  pc.log_std_init = -0.7;
  Policy policy = init_policy(pc, rng::Key{77});

  TrainState st;
  st.policy = policy;
  st.adam = make_adam_state(policy_num_params(policy));
  st.kl_coeff = 0.03;

  PpoConfig cfg;
  cfg.learning_rate = 3e-3;
  cfg.train_batch = 256;
  cfg.minibatch = 64;
  cfg.epochs_per_batch = 5;

  const MatX obs_one = MatX::Ones(1, 1);
  rng::Stream s(rng::Key{78});
  for (int iter = 0; iter < 200; ++iter) {
    Trajectory t = empty_traj(1, 1, cfg.train_batch);
    t.old_log_std = st.policy.clamped_log_std();
    for (int i = 0; i < cfg.train_batch; ++i) {
      t.obs(0, i) = 1.0;
      const VecX mean = st.policy.policy_mean(obs_one).col(0);
      const ActionSample a = sample_action(mean, t.old_log_std, s);
      t.raw_actions.col(i) = a.raw;
      t.old_means.col(i) = mean;
      t.log_probs(i) = a.log_prob;
      const Scalar act = a.clipped(0);
      t.rewards(i) = -(act - 0.3) * (act - 0.3);
      t.values(i) = st.policy.value_of(obs_one)(0);
      t.episode_end[i] = 1;
      t.terminal[i] = 1;
    }
    ppo_update(st, t, cfg, rng::Key{79}.child(iter));
  }
  const Scalar learned = st.policy.policy_mean(obs_one)(0, 0);
  CHECK(std::abs(learned - 0.3) < 0.1);
}

TEST_CASE("rollout collection on the real environment") {
  EnvConfig cfg = default_env_config(EnvKind::Aggregation);
  cfg.n_agents = 12;
  cfg.horizon = 10;
  const PolicyConfig pc = make_policy_config(cfg, false, false);
  const Policy policy = init_policy(pc, rng::Key{80});

  SUBCASE("steps equal to the horizon give exactly one episode") {
    const Trajectory t = collect_rollout(cfg, policy, cfg.horizon,
                                         rng::Key{81}, false);
    CHECK(t.steps() == 10);
    CHECK(t.episode_returns.size() == 1);
    CHECK(t.episode_end[9] == 1);
    CHECK(t.terminal[9] == 0); // truncation, bootstrap retained
  }

  SUBCASE("deterministic in the key") {
    const Trajectory a = collect_rollout(cfg, policy, 30, rng::Key{82}, false);
    const Trajectory b = collect_rollout(cfg, policy, 30, rng::Key{82}, false);
    CHECK(a.rewards == b.rewards);
    CHECK(a.raw_actions == b.raw_actions);
    CHECK(a.obs == b.obs);
  }

  SUBCASE("rewards respect the analytic envelope") {
    const Trajectory t = collect_rollout(cfg, policy, 50, rng::Key{83}, false);
    const Scalar bound = 2.0 * 2.0 * std::numbers::sqrt2 + 0.3 * 0.2;
    CHECK((t.rewards.array().abs() <= bound).all());
  }

  SUBCASE("policy/env dimension mismatch is rejected") {
    PolicyConfig bad = pc;
    bad.obs_dim = 72;
    const Policy wrong = init_policy(bad, rng::Key{84});
    CHECK_THROWS_AS(collect_rollout(cfg, wrong, 10, rng::Key{85}, false),
                    std::invalid_argument);
  }
}

TEST_CASE("marl rollouts store one transition per agent per step") {
  EnvConfig cfg = default_env_config(EnvKind::Aggregation);
  cfg.n_agents = 3;
  cfg.horizon = 5;
  const PolicyConfig pc = make_policy_config(cfg, true, false);
  CHECK(pc.action_dim == 2);
  CHECK(pc.obs_dim == 38);
  const Policy policy = init_policy(pc, rng::Key{86});

  const Trajectory t = collect_rollout(cfg, policy, 10, rng::Key{87}, true);
  CHECK(t.lanes == 3);
  CHECK(t.steps() == 12); // rounded up to whole env steps
  // shared global reward within each env step
  for (int step = 0; step < 4; ++step) {
    CHECK(t.rewards(3 * step) == t.rewards(3 * step + 1));
    CHECK(t.rewards(3 * step) == t.rewards(3 * step + 2));
  }

  SUBCASE("single agent reduces to the flat case") {
    EnvConfig solo = cfg;
    solo.n_agents = 1;
    const PolicyConfig pc1 = make_policy_config(solo, true, false);
    const Policy p1 = init_policy(pc1, rng::Key{88});
    const Trajectory t1 = collect_rollout(solo, p1, 5, rng::Key{89}, true);
    CHECK(t1.lanes == 1);
    CHECK(t1.steps() == 5);
  }
}

TEST_CASE("training smoke runs and matches itself") {
  EnvConfig cfg = default_env_config(EnvKind::Aggregation);
  cfg.n_agents = 8;
  cfg.horizon = 5;
  PpoConfig ppo;
  ppo.train_batch = 40;
  ppo.minibatch = 20;
  ppo.epochs_per_batch = 2;
  ppo.total_iterations = 2;
  const PolicyConfig pc = make_policy_config(cfg, false, false);

  const TrainResult a = train(cfg, ppo, pc, false, rng::Key{90});
  CHECK(a.curve.size() == 2);
  CHECK(std::isfinite(a.curve[0].mean_return));
  CHECK(a.curve[1].env_steps_total == 80);

  SUBCASE("identical seeds give identical curves and parameters") {
    const TrainResult b = train(cfg, ppo, pc, false, rng::Key{90});
    CHECK(flatten_params(a.state.policy) == flatten_params(b.state.policy));
    CHECK(a.curve[1].mean_return == b.curve[1].mean_return);
  }

  SUBCASE("zero learning rate keeps parameters frozen") {
    PpoConfig still = ppo;
    still.learning_rate = 0.0;
    const TrainResult frozen = train(cfg, still, pc, false, rng::Key{91});
    const Policy fresh = init_policy(pc, rng::Key{91}.child(0));
    CHECK(flatten_params(frozen.state.policy) == flatten_params(fresh));
  }
}

TEST_CASE("checkpoint round trip is bit exact and update-equivalent") {
  EnvConfig cfg = default_env_config(EnvKind::Aggregation);
  cfg.n_agents = 6;
  cfg.horizon = 5;
  PpoConfig ppo;
  ppo.train_batch = 30;
  ppo.minibatch = 15;
  ppo.epochs_per_batch = 2;
  ppo.total_iterations = 1;
  const PolicyConfig pc = make_policy_config(cfg, false, false);
  const TrainResult base = train(cfg, ppo, pc, false, rng::Key{92});

  Checkpoint ck;
  ck.policy = base.state.policy;
  ck.adam = base.state.adam;
  ck.iteration = base.state.iteration;
  ck.kl_coeff = base.state.kl_coeff;
  ck.seed = 92;
  ck.env_kind = "aggregation";
  ck.n_agents = 6;
  ck.horizon = 5;

  const Checkpoint back = Checkpoint::from_json(ck.to_json());
  CHECK(flatten_params(back.policy) == flatten_params(ck.policy));
  CHECK(back.adam.m == ck.adam.m);
  CHECK(back.adam.v == ck.adam.v);
  CHECK(back.adam.t == ck.adam.t);
  CHECK(back.env_kind == "aggregation");

  // one further update from the restored state equals one from the live one
  const Trajectory traj = collect_rollout(cfg, ck.policy, ppo.train_batch,
                                          rng::Key{93}, false);
  TrainState live{ck.policy, ck.adam, ck.iteration, ck.kl_coeff};
  TrainState restored{back.policy, back.adam, back.iteration, back.kl_coeff};
  ppo_update(live, traj, ppo, rng::Key{94});
  ppo_update(restored, traj, ppo, rng::Key{94});
  CHECK(flatten_params(live.policy) == flatten_params(restored.policy));
}

TEST_CASE("non-finite losses abort with diagnostics") {
  PolicyConfig pc;
  pc.obs_dim = 1;
  pc.action_dim = 1;
  pc.hidden = {4};
  Policy policy = init_policy(pc, rng::Key{95});
  Trajectory t = empty_traj(1, 1, 4);
  t.old_log_std = policy.clamped_log_std();
  t.rewards.setConstant(std::numeric_limits<Scalar>::quiet_NaN());
  for (int i = 0; i < 4; ++i) {
    t.episode_end[i] = 1;
    t.terminal[i] = 1;
  }
  TrainState st{policy, make_adam_state(policy_num_params(policy)), 0, 0.03};
  PpoConfig cfg;
  cfg.train_batch = 4;
  cfg.minibatch = 4;
  CHECK_THROWS_AS(ppo_update(st, t, cfg, rng::Key{96}), std::runtime_error);
}

} // TEST_SUITE
