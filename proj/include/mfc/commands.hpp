#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfc/collision.hpp"
#include "mfc/ppo.hpp"

namespace mfc {

// Maps to exit code 1 (usage) rather than 2 (runtime failure).
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct CommonOptions {
  std::uint64_t seed = 0;
  std::string out_dir = "runs/out";
};

struct TrainOptions {
  CommonOptions common;
  std::string env = "aggregation";
  int agents = 300;
  int horizon = 0; // 0 = per-environment default
  int iterations = 100;
  bool marl = false;
  bool single_gaussian = false;
  Scalar min_separation = 0.0;
  int checkpoint_every = 0; // 0 = final checkpoint only
  PpoConfig ppo;

  std::string to_config_text() const;
};

struct EvalOptions {
  CommonOptions common;
  std::string checkpoint;
  std::string env; // optional; must match the checkpoint when set
  std::vector<int> n_list = {300};
  int episodes = 100;
  bool stochastic = false;
  bool trace = false;      // export one episode trace CSV per swarm size
  bool trace_hist = false; // include per-bin histogram columns

  std::string to_config_text() const;
};

struct ConvergenceOptions {
  CommonOptions common;
  std::string env = "aggregation";
  std::string checkpoint; // empty = built-in drift test policy
  std::vector<int> n_list = {10, 50, 100, 300, 1000};
  int episodes = 200;
  int eval_t = 10;
  int ref_particles = 10000;
  int ref_runs = 16;

  std::string to_config_text() const;
};

struct OpenLoopOptions {
  CommonOptions common;
  std::string checkpoint;
  std::vector<int> n_list = {10, 100, 300};
  int episodes = 100;

  std::string to_config_text() const;
};

struct SweepCrepOptions {
  CommonOptions common;
  std::string checkpoint;
  std::vector<Scalar> crep_list = {0.01, 0.1, 1.0};
  std::vector<int> n_list = {100};
  int episodes = 100;
  Scalar min_separation = 0.1;
  ApfConfig apf; // c_rep is overridden per sweep point
  bool include_plain = true;

  std::string to_config_text() const;
};

struct PlotOptions {
  CommonOptions common;
  std::vector<std::string> inputs;

  std::string to_config_text() const;
};

// ---- library-level experiment runners (used by the CLI and tests) ----

EnvConfig env_config_from_checkpoint(const Checkpoint &ck);

// Closed-loop episode returns of a trained controller (deterministic action
// by default); handles both the central and the per-agent policy modes.
VecX episode_returns_closed_loop(const Checkpoint &ck, const EnvConfig &cfg,
                                 int episodes, rng::Key key, bool stochastic);

struct EvalRow {
  int n = 0;
  SummaryStats ret;
};
std::vector<EvalRow> run_eval_experiment(const EvalOptions &opts,
                                         const Checkpoint &ck);

struct ConvergenceRow {
  int n = 0;
  SummaryStats gap;
};
struct ConvergenceOutcome {
  std::vector<ConvergenceRow> rows;
  Scalar slope = 0.0;     // log-gap vs log-N least squares
  Scalar ref_objective = 0.0;
};
ConvergenceOutcome run_convergence_experiment(const ConvergenceOptions &opts,
                                              const Checkpoint *ck);

struct OpenLoopRow {
  int n = 0;
  SummaryStats closed;
  SummaryStats open;
  Scalar rel_gap = 0.0;
};
struct OpenLoopOutcome {
  OpenLoopSequence sequence;
  std::vector<OpenLoopRow> rows;
};
OpenLoopOutcome run_openloop_experiment(const OpenLoopOptions &opts,
                                        const Checkpoint &ck);

struct SweepSeries {
  Scalar c_rep = 0.0; // < 0 marks the plain baseline
  int n = 0;
  VecX returns;
  VecX min_distances;
  std::vector<long> singularities;
  SummaryStats ret_stats;
  SummaryStats dist_stats;
};
struct SweepOutcome {
  std::vector<SweepSeries> apf;
  std::vector<SweepSeries> plain;
};
SweepOutcome run_sweep_experiment(const SweepCrepOptions &opts,
                                  const Checkpoint &ck);

// ---- CLI entry points; write artifacts and the run manifest ----

int cmd_train(const TrainOptions &opts);
int cmd_eval(const EvalOptions &opts);
int cmd_convergence(const ConvergenceOptions &opts);
int cmd_openloop(const OpenLoopOptions &opts);
int cmd_sweep_crep(const SweepCrepOptions &opts);
int cmd_plot(const PlotOptions &opts);

} // namespace mfc
