#pragma once

#include <Eigen/Core>

namespace mfc {

using Scalar = double;
using Vec2 = Eigen::Vector2d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// One column per agent; column-major storage keeps each agent's (x, y)
// contiguous.
using Positions = Eigen::Matrix2Xd;
using ActionBatch = Eigen::Matrix2Xd;

// Normalized mass per grid cell, row-major over (row, col).
using Histogram = Eigen::VectorXd;

struct SpaceConfig {
  Scalar box_half_width = 2.0;   // positions live in [-m, m]^2
  Scalar action_radius = 0.2;    // movement disc ||u|| <= r
  Vec2 noise_std = Vec2::Zero(); // per-axis std of the transition noise
};

struct SwarmState {
  Positions positions; // 2 x N
  int time_index = 0;

  Eigen::Index size() const { return positions.cols(); }
};

} // namespace mfc
