#include "mfc/rollout.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mfc/csv.hpp"

namespace mfc {

EpisodeTrace run_episode(const EnvConfig &cfg, const PolicyFn &policy,
                         rng::Key key, const EpisodeOptions &opts) {
  EpisodeTrace trace;
  trace.rewards.resize(cfg.horizon);
  const bool track =
      opts.track_min_distance && cfg.n_agents >= 2;
  if (track)
    trace.min_distances.resize(cfg.horizon + 1);

  EnvState state = env_reset(cfg, key.child(0));
  Observation obs = observe(cfg, state);
  trace.initial_histogram = obs.state_hist;
  if (opts.record_actions)
    trace.actions.reserve(cfg.horizon);

  for (int t = 0; t < cfg.horizon; ++t) {
    if (track)
      trace.min_distances(t) = min_pairwise_distance(state.swarm);
    if (cfg.kind == EnvKind::TaskAllocation)
      trace.task_counts.push_back(static_cast<int>(state.tasks.size()));
    if (opts.record_histograms)
      trace.histograms.push_back(obs.state_hist);
    const MeanFieldAction h = policy(obs, t);
    if (opts.record_actions)
      trace.actions.push_back(h);
    StepOutcome out = env_step(cfg, state, h, key.child(1 + t));
    trace.rewards(t) = out.reward;
    state = std::move(out.state);
    obs = std::move(out.obs);
  }
  if (track)
    trace.min_distances(cfg.horizon) = min_pairwise_distance(state.swarm);
  trace.total_return = trace.rewards.sum();
  return trace;
}

OpenLoopSequence record_open_loop(const EnvConfig &cfg, const PolicyFn &policy,
                                  rng::Key key) {
  EpisodeOptions opts;
  opts.record_actions = true;
  EpisodeTrace trace = run_episode(cfg, policy, key, opts);
  OpenLoopSequence seq;
  seq.grid = cfg.grid;
  seq.initial_histogram = trace.initial_histogram;
  seq.actions = std::move(trace.actions);
  return seq;
}

EpisodeTrace replay_open_loop(const OpenLoopSequence &seq,
                              const EnvConfig &cfg, rng::Key key,
                              const EpisodeOptions &opts) {
  if (seq.horizon() < cfg.horizon)
    throw std::invalid_argument(
        "replay_open_loop: horizon exceeds recorded sequence length");
  PolicyFn replay = [&seq](const Observation &, int t) {
    return seq.actions[static_cast<std::size_t>(t)];
  };
  return run_episode(cfg, replay, key, opts);
}

void export_trace_csv(const EpisodeTrace &trace, const std::string &path,
                      bool with_histogram) {
  std::vector<std::string> columns{"time", "reward", "min_distance",
                                   "task_count"};
  const int bins = with_histogram && !trace.histograms.empty()
                       ? static_cast<int>(trace.histograms.front().size())
                       : 0;
  for (int b = 0; b < bins; ++b)
    columns.push_back("hist_" + std::to_string(b));
  CsvWriter csv(path, columns);

  for (int t = 0; t < trace.rewards.size(); ++t) {
    std::vector<Scalar> row{static_cast<Scalar>(t), trace.rewards(t),
                            t < trace.min_distances.size()
                                ? trace.min_distances(t)
                                : -1.0,
                            t < static_cast<int>(trace.task_counts.size())
                                ? static_cast<Scalar>(trace.task_counts[t])
                                : 0.0};
    for (int b = 0; b < bins; ++b)
      row.push_back(trace.histograms[t](b));
    csv.write_row(row);
  }
}

SummaryStats summarize(const VecX &values) {
  SummaryStats s;
  s.count = static_cast<int>(values.size());
  if (s.count == 0)
    return s;
  s.mean = values.mean();
  if (s.count >= 2) {
    const Scalar ss = (values.array() - s.mean).square().sum() /
                      static_cast<Scalar>(s.count - 1);
    s.stddev = std::sqrt(ss);
    s.ci95 = 1.96 * s.stddev / std::sqrt(static_cast<Scalar>(s.count));
  }
  return s;
}

} // namespace mfc
