#pragma once

#include <functional>
#include <vector>

#include "mfc/envs.hpp"

namespace mfc {

// Closed-loop controllers map the current observation (and step index) to a
// decision rule; open-loop replay ignores the observation.
using PolicyFn = std::function<MeanFieldAction(const Observation &, int)>;

struct EpisodeOptions {
  bool track_min_distance = false;
  bool record_actions = false;
  bool record_histograms = false;
};

struct EpisodeTrace {
  VecX rewards;
  Scalar total_return = 0.0;
  VecX min_distances; // per time index (0..horizon), empty unless tracked
  std::vector<int> task_counts;
  std::vector<MeanFieldAction> actions;  // only when recorded
  std::vector<Histogram> histograms;     // pre-move state, when recorded
  Histogram initial_histogram;

  Scalar episode_min_distance() const {
    return min_distances.size() ? min_distances.minCoeff() : -1.0;
  }
};

// Writes one row per time step: time, reward, min distance, task count and
// optionally the per-bin histogram.
void export_trace_csv(const EpisodeTrace &trace, const std::string &path,
                      bool with_histogram);

EpisodeTrace run_episode(const EnvConfig &cfg, const PolicyFn &policy,
                         rng::Key key, const EpisodeOptions &opts = {});

// Records the decision-rule sequence of one closed-loop rollout together
// with its initial histogram.
OpenLoopSequence record_open_loop(const EnvConfig &cfg, const PolicyFn &policy,
                                  rng::Key key);

// Runs the finite swarm on the pre-recorded sequence without histogram
// feedback. Throws if the sequence is shorter than the horizon.
EpisodeTrace replay_open_loop(const OpenLoopSequence &seq,
                              const EnvConfig &cfg, rng::Key key,
                              const EpisodeOptions &opts = {});

struct SummaryStats {
  Scalar mean = 0.0;
  Scalar stddev = 0.0;
  Scalar ci95 = 0.0;
  int count = 0;
  bool degenerate() const { return count < 2; }
};

SummaryStats summarize(const VecX &values);

} // namespace mfc
