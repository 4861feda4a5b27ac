#pragma once

#include "mfc/rng.hpp"
#include "mfc/types.hpp"

namespace mfc {

// Projects u onto the closed disc of the given radius; direction preserved,
// zero maps to zero.
Vec2 clip_to_disc(const Vec2 &u, Scalar radius);

// Componentwise projection onto [-half_width, half_width]^2.
Vec2 clip_to_box(const Vec2 &x, Scalar half_width);

// N i.i.d. uniform positions on the box. If min_separation > 0, whole
// configurations are redrawn until every pairwise distance exceeds it;
// throws after max_rounds redraws.
SwarmState sample_initial(int n, const SpaceConfig &space,
                          Scalar min_separation, rng::Key key,
                          int max_rounds = 10000);

// x' = clip_box(x + u + eps) per agent, eps ~ N(0, diag(noise_std^2)),
// independent stream per agent. Actions must already be disc-clipped.
SwarmState step_swarm(const SwarmState &state, const ActionBatch &acts,
                      const SpaceConfig &space, rng::Key key);

Scalar min_pairwise_distance(const Positions &positions);
Scalar min_pairwise_distance(const SwarmState &state);

} // namespace mfc
