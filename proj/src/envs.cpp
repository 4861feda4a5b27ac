#include "mfc/envs.hpp"

#include <cmath>
#include <stdexcept>

namespace mfc {

namespace {

// Step-key lanes; env_step consumes 0-3, callers may use 4+ freely.
constexpr std::uint64_t kLaneActions = 0;
constexpr std::uint64_t kLaneNoise = 1;
constexpr std::uint64_t kLaneTargets = 2;
constexpr std::uint64_t kLaneArrivals = 3;

// Reset-key lanes.
constexpr std::uint64_t kLaneInit = 0;
constexpr std::uint64_t kLaneEpisodeTargets = 1;

} // namespace

const char *env_kind_name(EnvKind kind) {
  switch (kind) {
  case EnvKind::Aggregation:
    return "aggregation";
  case EnvKind::Formation:
    return "formation";
  case EnvKind::TaskAllocation:
    return "taskalloc";
  }
  return "unknown";
}

EnvKind env_kind_from_name(const std::string &name) {
  if (name == "aggregation")
    return EnvKind::Aggregation;
  if (name == "formation")
    return EnvKind::Formation;
  if (name == "taskalloc")
    return EnvKind::TaskAllocation;
  throw std::invalid_argument("unknown environment kind: " + name);
}

EnvConfig default_env_config(EnvKind kind) {
  EnvConfig cfg;
  cfg.kind = kind;
  switch (kind) {
  case EnvKind::Aggregation:
    cfg.horizon = 50;
    break;
  case EnvKind::Formation:
    cfg.horizon = 100;
    break;
  case EnvKind::TaskAllocation:
    cfg.horizon = 200;
    break;
  }
  // Two symmetric Gaussian modes at +-e1.
  cfg.formation_target = {
      MixtureComponent{0.5, Vec2(1.0, 0.0), Vec2(0.05, 0.05)},
      MixtureComponent{0.5, Vec2(-1.0, 0.0), Vec2(0.05, 0.05)},
  };
  return cfg;
}

EnvState env_reset(const EnvConfig &cfg, rng::Key key) {
  EnvState state;
  state.swarm = sample_initial(cfg.n_agents, cfg.space, cfg.min_separation,
                               key.child(kLaneInit));
  state.tasks.clear();
  state.t = 0;
  state.episode_target_key = key.child(kLaneEpisodeTargets);
  return state;
}

VecX task_histogram(const TaskState &tasks, const EnvConfig &cfg) {
  VecX h = VecX::Zero(cfg.grid.total_bins());
  for (const auto &task : tasks)
    h(bin_index(task.location, cfg.grid)) += 1.0;
  return h / static_cast<Scalar>(cfg.max_tasks);
}

Observation observe(const EnvConfig &cfg, const EnvState &state) {
  Observation obs;
  obs.state_hist = empirical_histogram(state.swarm, cfg.grid);
  if (cfg.kind == EnvKind::TaskAllocation)
    obs.task_hist = task_histogram(state.tasks, cfg);
  return obs;
}

Scalar aggregation_reward(const Positions &positions, const ActionBatch &acts,
                          Scalar move_cost) {
  const Eigen::Index n = positions.cols();
  if (n < 1)
    throw std::invalid_argument("aggregation_reward: empty swarm");
  const Vec2 centroid = positions.rowwise().mean();
  Scalar spread = 0.0;
  Scalar effort = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    spread += (positions.col(i) - centroid).norm();
    effort += acts.col(i).norm();
  }
  return -(spread + move_cost * effort) / static_cast<Scalar>(n);
}

Scalar formation_reward(const Positions &positions, const EnvConfig &cfg,
                        rng::Key target_key) {
  const PointCloud agents = cloud_from_positions(positions);
  const PointCloud target =
      sample_gaussian_mixture(cfg.formation_target, cfg.target_samples,
                              cfg.space.box_half_width, target_key);
  return -wasserstein1(agents, target);
}

std::pair<TaskState, Scalar> task_process(const Positions &positions,
                                          const TaskState &tasks,
                                          const EnvConfig &cfg) {
  (void)cfg;
  const Eigen::Index n = positions.cols();
  TaskState next;
  next.reserve(tasks.size());
  Scalar reward = 0.0;
  for (const auto &task : tasks) {
    Scalar mass = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar d = (positions.col(i) - task.location).norm();
      if (d <= 0.5)
        mass += 1.0 - 2.0 * d;
    }
    const Scalar delta = std::min(1.0, mass / static_cast<Scalar>(n));
    reward += delta;
    const Scalar remaining = task.remaining - delta;
    if (remaining > 0.0)
      next.push_back(Task{task.location, remaining});
  }
  return {std::move(next), reward};
}

TaskState task_arrivals(const TaskState &tasks, const EnvConfig &cfg,
                        rng::Key key) {
  TaskState next = tasks;
  rng::Stream s(key);
  const int drawn = s.poisson(cfg.task_arrival_rate);
  const int room = cfg.max_tasks - static_cast<int>(next.size());
  const int added = std::min(drawn, std::max(0, room));
  const Scalar m = cfg.space.box_half_width;
  for (int k = 0; k < added; ++k) {
    Vec2 loc(s.uniform(-m, m), s.uniform(-m, m));
    next.push_back(Task{loc, cfg.initial_task_length});
  }
  return next;
}

ActionBatch sample_action_batch(const EnvConfig &cfg, const SwarmState &swarm,
                                const MeanFieldAction &h, rng::Key key) {
  const Eigen::Index n = swarm.size();
  ActionBatch acts(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rng::Stream s(key.child(static_cast<std::uint64_t>(i)));
    acts.col(i) = sample_decision_rule(h, swarm.positions.col(i), cfg.grid,
                                       cfg.space, s);
  }
  return acts;
}

rng::Key target_key_for_step(const EnvConfig &cfg, const EnvState &state,
                             rng::Key step_key) {
  return cfg.resample_targets_each_step ? step_key.child(kLaneTargets)
                                        : state.episode_target_key;
}

Scalar step_reward(const EnvConfig &cfg, const EnvState &state,
                   const ActionBatch &acts, rng::Key step_key,
                   TaskState *tasks_after) {
  switch (cfg.kind) {
  case EnvKind::Aggregation:
    if (tasks_after)
      *tasks_after = state.tasks;
    return aggregation_reward(state.swarm.positions, acts, cfg.move_cost);
  case EnvKind::Formation:
    if (tasks_after)
      *tasks_after = state.tasks;
    return formation_reward(state.swarm.positions, cfg,
                            target_key_for_step(cfg, state, step_key));
  case EnvKind::TaskAllocation: {
    auto [tasks, reward] =
        task_process(state.swarm.positions, state.tasks, cfg);
    if (tasks_after)
      *tasks_after = std::move(tasks);
    return reward;
  }
  }
  throw std::logic_error("step_reward: unhandled env kind");
}

StepOutcome env_step_with_actions(const EnvConfig &cfg, const EnvState &state,
                                  const ActionBatch &acts, rng::Key key) {
  StepOutcome out;
  TaskState tasks_after;
  out.reward = step_reward(cfg, state, acts, key, &tasks_after);

  out.state.swarm =
      step_swarm(state.swarm, acts, cfg.space, key.child(kLaneNoise));
  out.state.tasks = std::move(tasks_after);
  if (cfg.kind == EnvKind::TaskAllocation)
    out.state.tasks =
        task_arrivals(out.state.tasks, cfg, key.child(kLaneArrivals));
  out.state.t = state.t + 1;
  out.state.episode_target_key = state.episode_target_key;

  out.obs = observe(cfg, out.state);
  out.done = out.state.t >= cfg.horizon;
  return out;
}

StepOutcome env_step(const EnvConfig &cfg, const EnvState &state,
                     const MeanFieldAction &h, rng::Key key) {
  const ActionBatch acts =
      sample_action_batch(cfg, state.swarm, h, key.child(kLaneActions));
  return env_step_with_actions(cfg, state, acts, key);
}

VecX mfc_observation_vector(const Observation &obs) {
  VecX v(obs.state_hist.size() + obs.task_hist.size());
  v.head(obs.state_hist.size()) = obs.state_hist;
  if (obs.has_tasks())
    v.tail(obs.task_hist.size()) = obs.task_hist;
  return v;
}

int mfc_observation_dim(const EnvConfig &cfg) {
  const int m = cfg.grid.total_bins();
  return cfg.kind == EnvKind::TaskAllocation ? 2 * m : m;
}

VecX per_agent_view(const Observation &obs, const SwarmState &swarm, int agent,
                    const EnvConfig &cfg) {
  if (agent < 0 || agent >= swarm.size())
    throw std::out_of_range("per_agent_view: agent index out of range");
  const VecX base = mfc_observation_vector(obs);
  VecX v(base.size() + 2);
  v.head(base.size()) = base;
  v.tail(2) = swarm.positions.col(agent) / cfg.space.box_half_width;
  return v;
}

int per_agent_view_dim(const EnvConfig &cfg) {
  return mfc_observation_dim(cfg) + 2;
}

} // namespace mfc
