#pragma once

#include <vector>

#include "mfc/rng.hpp"
#include "mfc/types.hpp"

namespace mfc {

// Discrete measure: one column per support point, nonnegative weights
// summing to 1.
struct PointCloud {
  Positions points;
  VecX weights;

  Eigen::Index size() const { return points.cols(); }
};

// Uniform-weight cloud over the given positions.
PointCloud cloud_from_positions(const Positions &positions);

// Exact Wasserstein-1 distance (Euclidean ground cost) between two discrete
// measures, solved as a transportation problem to primal-dual optimality.
Scalar wasserstein1(const PointCloud &a, const PointCloud &b);

struct MixtureComponent {
  Scalar weight = 1.0;
  Vec2 mean = Vec2::Zero();
  Vec2 variance = Vec2::Zero(); // diagonal covariance entries
};
using MixtureSpec = std::vector<MixtureComponent>;

// n i.i.d. draws from the mixture, clipped to the box, uniform weights.
PointCloud sample_gaussian_mixture(const MixtureSpec &spec, int n,
                                   Scalar box_half_width, rng::Key key);

namespace detail {

struct TransportResult {
  Scalar cost = 0.0;
  long pivots = 0;
  Scalar max_dual_violation = 0.0; // most negative reduced cost, negated
};

// Network simplex on the dense transportation problem min <C, F> subject to
// row sums = supply, column sums = demand, F >= 0. Exposed for testing.
TransportResult solve_transport(const MatX &cost, VecX supply, VecX demand);

} // namespace detail

} // namespace mfc
