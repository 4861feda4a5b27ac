#pragma once

#include <optional>

#include "mfc/rollout.hpp"

namespace mfc {

struct ApfConfig {
  Scalar attract_gain = 1.5;
  Scalar rep_gain_base = 1.5;
  Scalar c_rep = 0.0;              // repulsion coefficient, 0 disables
  Scalar interaction_radius = 1.0; // repulsion active for ||d|| <= this
  Scalar inner_dt = 0.02;
  int inner_steps = 100;
  std::optional<Scalar> speed_cap;
  Scalar distance_floor = 1e-6; // guards the repulsion singularity
};

// Attraction toward the agent's target plus pairwise repulsion from
// neighbors inside the interaction radius. Near-coincident pairs are
// evaluated at the distance floor and counted.
Vec2 apf_velocity(int agent, const Positions &positions,
                  const Positions &targets, const ApfConfig &cfg,
                  long *singularity_count = nullptr);

struct EpochResult {
  Positions positions;
  Scalar min_distance = 0.0; // over all substeps, including the start
  Scalar max_target_deviation = 0.0;
  long singularities = 0;
};

// inner_steps explicit Euler substeps of x <- clip_box(x + dt*v), with all
// velocities evaluated on the previous substep's positions.
EpochResult integrate_epoch(const Positions &start, const Positions &targets,
                            const ApfConfig &cfg, const SpaceConfig &space);

struct SafetyEpisode {
  VecX rewards;
  Scalar episode_return = 0.0;
  Scalar min_distance = 0.0;
  Scalar max_target_deviation = 0.0;
  long singularities = 0;
};

// Full episode where each decision epoch assigns per-agent targets
// clip_box(x + u) from the controller and the movement is realized by the
// potential-field integrator; rewards use the realized positions.
SafetyEpisode run_with_collision_avoidance(const EnvConfig &env_cfg,
                                           const ApfConfig &apf_cfg,
                                           const PolicyFn &policy,
                                           rng::Key key);

} // namespace mfc
