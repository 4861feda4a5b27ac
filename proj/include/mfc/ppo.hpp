#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mfc/policy_nn.hpp"
#include "mfc/rng.hpp"
#include "mfc/rollout.hpp"

namespace mfc {

struct PpoConfig {
  Scalar discount = 0.99;
  Scalar gae_lambda = 1.0;
  Scalar kl_coeff = 0.03;
  Scalar kl_target = 0.01;
  Scalar clip_param = 0.2;
  Scalar learning_rate = 5e-5;
  int train_batch = 4000;
  int minibatch = 1000;
  int epochs_per_batch = 5;
  int total_iterations = 100;
  Scalar value_loss_coeff = 1.0;
  Scalar entropy_coeff = 0.0;
  Scalar grad_clip_norm = 0.5; // <= 0 disables clipping
};

// Experience batch. Transitions are stored step-major; in the decentralized
// mode each environment step contributes `lanes` agent transitions, so lane
// i owns indices i, i+lanes, i+2*lanes, ...
struct Trajectory {
  MatX obs;         // obs_dim x T
  MatX raw_actions; // A x T, pre-clip samples
  MatX old_means;   // A x T
  VecX old_log_std; // A
  VecX log_probs;   // T
  VecX rewards;     // T
  VecX values;      // T
  VecX next_values; // T, value of the successor state in the same lane
  std::vector<std::uint8_t> episode_end; // advantage chain stops here
  std::vector<std::uint8_t> terminal;    // true end: bootstrap with zero
  int lanes = 1;
  VecX episode_returns; // completed episodes in this batch
  long env_steps = 0;   // environment transitions consumed

  int steps() const { return static_cast<int>(rewards.size()); }
};

struct GaeResult {
  VecX advantages_raw;
  VecX advantages; // normalized to zero mean, unit variance
  VecX value_targets;
};

GaeResult compute_gae(const Trajectory &traj, Scalar gamma, Scalar lambda);

struct TrainState {
  Policy policy;
  AdamState adam;
  int iteration = 0;
  Scalar kl_coeff = 0.03;
};

struct UpdateStats {
  Scalar mean_kl = 0.0;
  Scalar policy_loss = 0.0;
  Scalar value_loss = 0.0;
  Scalar total_loss = 0.0;
};

// One minibatch of update inputs, already gathered and normalized.
struct MinibatchData {
  MatX obs;         // obs_dim x B
  MatX raw_actions; // A x B
  MatX old_means;   // A x B
  VecX old_log_std; // A
  VecX old_log_probs;
  VecX advantages;
  VecX value_targets;
};

struct LossBreakdown {
  Scalar policy_loss = 0.0;
  Scalar mean_kl = 0.0;
  Scalar value_loss = 0.0;
  Scalar entropy = 0.0;
  Scalar total = 0.0;
};

// Full PPO objective on one minibatch: clipped surrogate plus KL penalty
// plus value regression. When grad is non-null the exact parameter gradient
// is accumulated into it.
LossBreakdown ppo_loss(const Policy &policy, const MinibatchData &mb,
                       Scalar kl_coeff, const PpoConfig &cfg,
                       PolicyGrad *grad);

// One training batch: epochs of shuffled minibatches maximizing the clipped
// surrogate with a KL penalty, followed by the KL-coefficient adaptation.
UpdateStats ppo_update(TrainState &state, const Trajectory &traj,
                       const PpoConfig &cfg, rng::Key shuffle_key);

// Runs episodes back-to-back until at least min_transitions transitions are
// collected. In MARL mode every environment step yields one transition per
// agent under the shared policy on agent-local views.
Trajectory collect_rollout(const EnvConfig &env_cfg, const Policy &policy,
                           int min_transitions, rng::Key key, bool marl);

struct IterationLog {
  int iteration = 0;
  long env_steps_total = 0;
  Scalar mean_return = 0.0;
  Scalar std_return = 0.0;
  Scalar mean_kl = 0.0;
  Scalar kl_coeff = 0.0;
};

struct TrainHooks {
  std::function<void(const TrainState &, const IterationLog &)> on_iteration;
};

struct TrainResult {
  TrainState state;
  std::vector<IterationLog> curve;
};

TrainResult train(const EnvConfig &env_cfg, const PpoConfig &ppo_cfg,
                  const PolicyConfig &policy_cfg, bool marl, rng::Key key,
                  const TrainHooks &hooks = {});

// Builds the policy view of a trained controller for rollouts: feeds the
// observation through the network (deterministic uses the mean action).
PolicyFn make_mfc_policy(const Policy &policy, const EnvConfig &cfg,
                         bool deterministic, rng::Key sample_key);

PolicyConfig make_policy_config(const EnvConfig &cfg, bool marl,
                                bool single_gaussian);

// Versioned checkpoint container; round-trips parameters bit-exactly.
struct Checkpoint {
  Policy policy;
  AdamState adam;
  int iteration = 0;
  Scalar kl_coeff = 0.03;
  std::uint64_t seed = 0;
  std::string env_kind = "aggregation";
  int n_agents = 300;
  int horizon = 50;
  bool marl = false;
  bool single_gaussian = false;

  std::string to_json() const;
  static Checkpoint from_json(const std::string &text);
  void save(const std::string &path) const;
  static Checkpoint load(const std::string &path);
};

} // namespace mfc
