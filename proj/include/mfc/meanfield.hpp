#pragma once

#include <string>
#include <vector>

#include "mfc/rng.hpp"
#include "mfc/sim_core.hpp"
#include "mfc/types.hpp"

namespace mfc {

struct GridSpec {
  int bins_per_axis = 6;
  Scalar box_half_width = 2.0;

  int total_bins() const { return bins_per_axis * bins_per_axis; }
  Scalar bin_width() const { return 2.0 * box_half_width / bins_per_axis; }
  Vec2 bin_center(int bin) const;
};

// Row-major cell index of the cell containing x. Cells are half-open,
// closed at the top boundary; interior edge points go to the higher cell.
// Throws if x lies outside the closed box.
int bin_index(const Vec2 &x, const GridSpec &grid);

// Normalized bin counts of the agent positions; entries sum to 1.
Histogram empirical_histogram(const Positions &positions,
                              const GridSpec &grid);
Histogram empirical_histogram(const SwarmState &state, const GridSpec &grid);

// Per-bin Gaussian decision rule: mean theta_b in U and per-axis std
// sigma_b in (0, 0.25]. Column b holds the parameters of cell b.
struct MeanFieldAction {
  Eigen::Matrix2Xd theta; // 2 x M
  Eigen::Matrix2Xd sigma; // 2 x M

  int bins() const { return static_cast<int>(theta.cols()); }
};

// Draws u ~ N(theta_b, diag(sigma_b^2)) for the cell containing x, then
// clips to the action disc.
Vec2 sample_decision_rule(const MeanFieldAction &h, const Vec2 &x,
                          const GridSpec &grid, const SpaceConfig &space,
                          rng::Stream &stream);

// One decision-rule action per particle followed by a swarm step; the
// induced histogram approximates the limiting transition operator.
SwarmState mf_transition(const SwarmState &particles, const MeanFieldAction &h,
                         const SpaceConfig &space, const GridSpec &grid,
                         rng::Key key);

// Recorded sequence of decision rules for feedback-free replay.
struct OpenLoopSequence {
  GridSpec grid;
  Histogram initial_histogram;
  std::vector<MeanFieldAction> actions;

  int horizon() const { return static_cast<int>(actions.size()); }

  std::string to_json() const;
  static OpenLoopSequence from_json(const std::string &text);
  void save(const std::string &path) const;
  static OpenLoopSequence load(const std::string &path);
};

} // namespace mfc
