#pragma once

#include <utility>
#include <vector>

#include "mfc/meanfield.hpp"
#include "mfc/rng.hpp"
#include "mfc/sim_core.hpp"
#include "mfc/transport.hpp"
#include "mfc/types.hpp"

namespace mfc {

enum class EnvKind { Aggregation, Formation, TaskAllocation };

const char *env_kind_name(EnvKind kind);
EnvKind env_kind_from_name(const std::string &name);

struct EnvConfig {
  EnvKind kind = EnvKind::Aggregation;
  int horizon = 50;
  int n_agents = 300;
  SpaceConfig space;
  GridSpec grid;
  Scalar min_separation = 0.0; // initial-state rejection threshold, 0 = off

  Scalar move_cost = 0.3; // Aggregation action penalty

  MixtureSpec formation_target;      // Formation target distribution
  int target_samples = 300;          // fresh target draws per reward
  bool resample_targets_each_step = true;

  Scalar task_arrival_rate = 0.4; // TaskAllocation Poisson rate
  int max_tasks = 5;
  Scalar initial_task_length = 10.0;
};

// Canonical configuration for each benchmark (horizons 50/100/200, the
// two-mode Gaussian target for Formation).
EnvConfig default_env_config(EnvKind kind);

struct Task {
  Vec2 location;
  Scalar remaining;
};
using TaskState = std::vector<Task>;

struct Observation {
  Histogram state_hist;
  VecX task_hist; // empty unless TaskAllocation; counts scaled by 1/max_tasks

  bool has_tasks() const { return task_hist.size() > 0; }
};

struct EnvState {
  SwarmState swarm;
  TaskState tasks;
  int t = 0;
  rng::Key episode_target_key; // target stream when per-step resampling is off
};

EnvState env_reset(const EnvConfig &cfg, rng::Key key);
Observation observe(const EnvConfig &cfg, const EnvState &state);

struct StepOutcome {
  EnvState state;
  Observation obs;
  Scalar reward = 0.0;
  bool done = false;
};

// Samples per-agent actions from the decision rule, computes the reward on
// the pre-move state (and the sampled actions), then advances the swarm and
// the task process.
StepOutcome env_step(const EnvConfig &cfg, const EnvState &state,
                     const MeanFieldAction &h, rng::Key key);

// Same step with externally chosen (already disc-clipped) per-agent actions;
// used by the decentralized training mode.
StepOutcome env_step_with_actions(const EnvConfig &cfg, const EnvState &state,
                                  const ActionBatch &acts, rng::Key key);

// Reward pieces, exposed for direct testing and for the collision runner.
Scalar aggregation_reward(const Positions &positions, const ActionBatch &acts,
                          Scalar move_cost);
Scalar formation_reward(const Positions &positions, const EnvConfig &cfg,
                        rng::Key target_key);
std::pair<TaskState, Scalar> task_process(const Positions &positions,
                                          const TaskState &tasks,
                                          const EnvConfig &cfg);
TaskState task_arrivals(const TaskState &tasks, const EnvConfig &cfg,
                        rng::Key key);

// Shared step internals (the collision runner replaces only the movement).
ActionBatch sample_action_batch(const EnvConfig &cfg, const SwarmState &swarm,
                                const MeanFieldAction &h, rng::Key key);
Scalar step_reward(const EnvConfig &cfg, const EnvState &state,
                   const ActionBatch &acts, rng::Key step_key,
                   TaskState *tasks_after);
rng::Key target_key_for_step(const EnvConfig &cfg, const EnvState &state,
                             rng::Key step_key);

// Count vector of task locations scaled by 1/max_tasks.
VecX task_histogram(const TaskState &tasks, const EnvConfig &cfg);

// Flat observation for the central controller: state histogram followed by
// the task histogram when present.
VecX mfc_observation_vector(const Observation &obs);
int mfc_observation_dim(const EnvConfig &cfg);

// Agent-local view: the same histograms plus the agent's own position
// scaled to [-1, 1].
VecX per_agent_view(const Observation &obs, const SwarmState &swarm,
                    int agent, const EnvConfig &cfg);
int per_agent_view_dim(const EnvConfig &cfg);

} // namespace mfc
