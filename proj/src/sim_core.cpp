#include "mfc/sim_core.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mfc {

Vec2 clip_to_disc(const Vec2 &u, Scalar radius) {
  const Scalar r2 = radius * radius;
  if (u.squaredNorm() <= r2)
    return u;
  Vec2 v = u * (radius / u.norm());
  // rescaling can overshoot by an ulp; settle so the result is a fixpoint
  while (v.squaredNorm() > r2)
    v *= radius / v.norm();
  return v;
}

Vec2 clip_to_box(const Vec2 &x, Scalar half_width) {
  return x.cwiseMax(-half_width).cwiseMin(half_width);
}

SwarmState sample_initial(int n, const SpaceConfig &space,
                          Scalar min_separation, rng::Key key,
                          int max_rounds) {
  if (n < 1)
    throw std::invalid_argument("sample_initial: need at least one agent");
  if (min_separation < 0)
    throw std::invalid_argument("sample_initial: negative min_separation");

  const Scalar m = space.box_half_width;
  SwarmState state;
  state.positions.resize(2, n);
  state.time_index = 0;

  // Agents are placed sequentially; a draw conflicting with an already
  // placed agent is redrawn, up to max_rounds attempts per agent.
  rng::Stream s(key);
  const Scalar sep2 = min_separation * min_separation;
  for (int i = 0; i < n; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < max_rounds; ++attempt) {
      const Vec2 x(s.uniform(-m, m), s.uniform(-m, m));
      bool ok = true;
      if (min_separation > 0.0) {
        for (int j = 0; j < i; ++j)
          if ((x - Vec2(state.positions.col(j))).squaredNorm() <= sep2) {
            ok = false;
            break;
          }
      }
      if (ok) {
        state.positions.col(i) = x;
        placed = true;
        break;
      }
    }
    if (!placed)
      throw std::runtime_error(
          "sample_initial: min_separation infeasible for given agent count "
          "(rejection cap reached)");
  }
  return state;
}

SwarmState step_swarm(const SwarmState &state, const ActionBatch &acts,
                      const SpaceConfig &space, rng::Key key) {
  const Eigen::Index n = state.size();
  if (acts.cols() != n)
    throw std::invalid_argument("step_swarm: action count mismatch");

  const bool noisy = space.noise_std(0) > 0.0 || space.noise_std(1) > 0.0;
  SwarmState next;
  next.positions.resize(2, n);
  next.time_index = state.time_index + 1;

  for (Eigen::Index i = 0; i < n; ++i) {
    Vec2 x = state.positions.col(i) + acts.col(i);
    if (noisy) {
      rng::Stream s(key.child(static_cast<std::uint64_t>(i)));
      x += s.normal2().cwiseProduct(space.noise_std);
    }
    next.positions.col(i) = clip_to_box(x, space.box_half_width);
  }
  return next;
}

Scalar min_pairwise_distance(const Positions &positions) {
  const Eigen::Index n = positions.cols();
  if (n < 2)
    throw std::invalid_argument(
        "min_pairwise_distance: undefined for fewer than two agents");
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Scalar d = (positions.col(i) - positions.col(j)).norm();
      if (d < best)
        best = d;
    }
  return best;
}

Scalar min_pairwise_distance(const SwarmState &state) {
  return min_pairwise_distance(state.positions);
}

} // namespace mfc
