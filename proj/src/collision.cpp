#include "mfc/collision.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mfc {

namespace {

// Repulsion of agent i from agent j for d = x_i - x_j:
// rep_gain * c_rep * (1/||d|| - 1) * d / ||d||^3, zero beyond the radius.
Vec2 repulsion(const Vec2 &d, Scalar dist, const ApfConfig &cfg) {
  return (cfg.rep_gain_base * cfg.c_rep) * (1.0 / dist - 1.0) /
         (dist * dist * dist) * d;
}

} // namespace

Vec2 apf_velocity(int agent, const Positions &positions,
                  const Positions &targets, const ApfConfig &cfg,
                  long *singularity_count) {
  const Eigen::Index n = positions.cols();
  if (targets.cols() != n)
    throw std::invalid_argument("apf_velocity: target count mismatch");
  if (agent < 0 || agent >= n)
    throw std::out_of_range("apf_velocity: agent index out of range");

  Vec2 v = cfg.attract_gain * (targets.col(agent) - positions.col(agent));
  if (cfg.c_rep > 0.0) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == agent)
        continue;
      Vec2 d = positions.col(agent) - positions.col(j);
      Scalar dist = d.norm();
      if (dist > cfg.interaction_radius)
        continue;
      if (dist < cfg.distance_floor) {
        if (singularity_count)
          ++*singularity_count;
        // evaluate at the floor in a fixed direction
        d = Vec2(cfg.distance_floor, 0.0);
        dist = cfg.distance_floor;
      }
      v += repulsion(d, dist, cfg);
    }
  }
  if (cfg.speed_cap && v.norm() > *cfg.speed_cap)
    v *= *cfg.speed_cap / v.norm();
  return v;
}

EpochResult integrate_epoch(const Positions &start, const Positions &targets,
                            const ApfConfig &cfg, const SpaceConfig &space) {
  const Eigen::Index n = start.cols();
  if (targets.cols() != n)
    throw std::invalid_argument("integrate_epoch: target count mismatch");

  EpochResult res;
  res.positions = start;
  res.min_distance = std::numeric_limits<Scalar>::infinity();
  if (n >= 2)
    res.min_distance = min_pairwise_distance(start);

  Positions velocity(2, n);
  for (int step = 0; step < cfg.inner_steps; ++step) {
    // attraction
    for (Eigen::Index i = 0; i < n; ++i)
      velocity.col(i) =
          cfg.attract_gain * (targets.col(i) - res.positions.col(i));

    // pairwise repulsion, antisymmetric, one evaluation per pair
    if (cfg.c_rep > 0.0) {
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
          Vec2 d = res.positions.col(i) - res.positions.col(j);
          Scalar dist = d.norm();
          if (dist > cfg.interaction_radius)
            continue;
          if (dist < cfg.distance_floor) {
            ++res.singularities;
            d = Vec2(cfg.distance_floor, 0.0);
            dist = cfg.distance_floor;
          }
          const Vec2 f = repulsion(d, dist, cfg);
          velocity.col(i) += f;
          velocity.col(j) -= f;
        }
      }
    }
    if (cfg.speed_cap) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar s = velocity.col(i).norm();
        if (s > *cfg.speed_cap)
          velocity.col(i) *= *cfg.speed_cap / s;
      }
    }

    for (Eigen::Index i = 0; i < n; ++i)
      res.positions.col(i) =
          clip_to_box(res.positions.col(i) + cfg.inner_dt * velocity.col(i),
                      space.box_half_width);

    if (n >= 2)
      res.min_distance =
          std::min(res.min_distance, min_pairwise_distance(res.positions));
  }

  res.max_target_deviation = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    res.max_target_deviation =
        std::max(res.max_target_deviation,
                 (res.positions.col(i) - targets.col(i)).norm());
  return res;
}

SafetyEpisode run_with_collision_avoidance(const EnvConfig &env_cfg,
                                           const ApfConfig &apf_cfg,
                                           const PolicyFn &policy,
                                           rng::Key key) {
  SafetyEpisode ep;
  ep.rewards.resize(env_cfg.horizon);
  ep.min_distance = std::numeric_limits<Scalar>::infinity();

  EnvState state = env_reset(env_cfg, key.child(0));
  if (env_cfg.n_agents >= 2)
    ep.min_distance = min_pairwise_distance(state.swarm);

  for (int t = 0; t < env_cfg.horizon; ++t) {
    const rng::Key step_key = key.child(1 + t);
    const Observation obs = observe(env_cfg, state);
    const MeanFieldAction h = policy(obs, t);

    const ActionBatch acts =
        sample_action_batch(env_cfg, state.swarm, h, step_key.child(0));

    TaskState tasks_after;
    ep.rewards(t) = step_reward(env_cfg, state, acts, step_key, &tasks_after);

    // per-agent targets: the position the plain dynamics would realize
    Positions targets(2, env_cfg.n_agents);
    for (int i = 0; i < env_cfg.n_agents; ++i)
      targets.col(i) = clip_to_box(state.swarm.positions.col(i) + acts.col(i),
                                   env_cfg.space.box_half_width);

    const EpochResult epoch =
        integrate_epoch(state.swarm.positions, targets, apf_cfg,
                        env_cfg.space);
    ep.min_distance = std::min(ep.min_distance, epoch.min_distance);
    ep.max_target_deviation =
        std::max(ep.max_target_deviation, epoch.max_target_deviation);
    ep.singularities += epoch.singularities;

    state.swarm.positions = epoch.positions;
    state.swarm.time_index += 1;
    state.tasks = std::move(tasks_after);
    if (env_cfg.kind == EnvKind::TaskAllocation)
      state.tasks = task_arrivals(state.tasks, env_cfg, step_key.child(3));
    state.t += 1;
  }
  ep.episode_return = ep.rewards.sum();
  return ep;
}

} // namespace mfc
