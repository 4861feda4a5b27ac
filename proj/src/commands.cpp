#include "mfc/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mfc/csv.hpp"
#include "mfc/manifest.hpp"
#include "mfc/plot.hpp"
#include "mfc/rollout.hpp"

namespace mfc {

namespace {

std::string join_path(const std::string &dir, const std::string &name) {
  return (std::filesystem::path(dir) / name).string();
}

std::string bool_text(bool v) { return v ? "true" : "false"; }

template <typename T> std::string list_text(const std::vector<T> &xs) {
  std::ostringstream os;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i)
      os << ',';
    if constexpr (std::is_floating_point_v<T>)
      os << CsvWriter::format_number(xs[i]);
    else
      os << xs[i];
  }
  return os.str();
}

std::string num_text(Scalar v) { return CsvWriter::format_number(v); }

// Fixed per-bin drift toward the origin; a simple position-dependent
// decision rule for convergence experiments without a trained controller.
MeanFieldAction drift_test_policy(const GridSpec &grid, Scalar action_radius) {
  const int m = grid.total_bins();
  MeanFieldAction h;
  h.theta.resize(2, m);
  h.sigma.resize(2, m);
  for (int b = 0; b < m; ++b) {
    h.theta.col(b) = clip_to_disc(-0.1 * grid.bin_center(b), action_radius);
    h.sigma.col(b).setConstant(0.05);
  }
  return h;
}

void require_central_checkpoint(const Checkpoint &ck, const char *what) {
  if (ck.marl)
    throw UsageError(std::string(what) +
                     " requires a central-controller checkpoint");
}

} // namespace

// ---- config snapshots -------------------------------------------------

std::string TrainOptions::to_config_text() const {
  std::ostringstream os;
  os << "env=" << env << '\n'
     << "agents=" << agents << '\n'
     << "horizon=" << horizon << '\n'
     << "iters=" << iterations << '\n'
     << "marl=" << bool_text(marl) << '\n'
     << "single-gaussian=" << bool_text(single_gaussian) << '\n'
     << "min-separation=" << num_text(min_separation) << '\n'
     << "checkpoint-every=" << checkpoint_every << '\n'
     << "seed=" << common.seed << '\n'
     << "out=" << common.out_dir << '\n'
     << "gamma=" << num_text(ppo.discount) << '\n'
     << "gae-lambda=" << num_text(ppo.gae_lambda) << '\n'
     << "kl-coeff=" << num_text(ppo.kl_coeff) << '\n'
     << "kl-target=" << num_text(ppo.kl_target) << '\n'
     << "clip-param=" << num_text(ppo.clip_param) << '\n'
     << "lr=" << num_text(ppo.learning_rate) << '\n'
     << "train-batch=" << ppo.train_batch << '\n'
     << "minibatch=" << ppo.minibatch << '\n'
     << "epochs=" << ppo.epochs_per_batch << '\n'
     << "value-loss-coeff=" << num_text(ppo.value_loss_coeff) << '\n'
     << "entropy-coeff=" << num_text(ppo.entropy_coeff) << '\n'
     << "grad-clip=" << num_text(ppo.grad_clip_norm) << '\n';
  return os.str();
}

std::string EvalOptions::to_config_text() const {
  std::ostringstream os;
  os << "checkpoint=" << checkpoint << '\n'
     << "env=" << env << '\n'
     << "n-list=" << list_text(n_list) << '\n'
     << "episodes=" << episodes << '\n'
     << "stochastic=" << bool_text(stochastic) << '\n'
     << "trace=" << bool_text(trace) << '\n'
     << "trace-hist=" << bool_text(trace_hist) << '\n'
     << "seed=" << common.seed << '\n'
     << "out=" << common.out_dir << '\n';
  return os.str();
}

std::string ConvergenceOptions::to_config_text() const {
  std::ostringstream os;
  os << "env=" << env << '\n'
     << "checkpoint=" << checkpoint << '\n'
     << "n-list=" << list_text(n_list) << '\n'
     << "episodes=" << episodes << '\n'
     << "eval-t=" << eval_t << '\n'
     << "ref-particles=" << ref_particles << '\n'
     << "ref-runs=" << ref_runs << '\n'
     << "seed=" << common.seed << '\n'
     << "out=" << common.out_dir << '\n';
  return os.str();
}

std::string OpenLoopOptions::to_config_text() const {
  std::ostringstream os;
  os << "checkpoint=" << checkpoint << '\n'
     << "n-list=" << list_text(n_list) << '\n'
     << "episodes=" << episodes << '\n'
     << "seed=" << common.seed << '\n'
     << "out=" << common.out_dir << '\n';
  return os.str();
}

std::string SweepCrepOptions::to_config_text() const {
  std::ostringstream os;
  os << "checkpoint=" << checkpoint << '\n'
     << "crep-list=" << list_text(crep_list) << '\n'
     << "n-list=" << list_text(n_list) << '\n'
     << "episodes=" << episodes << '\n'
     << "min-separation=" << num_text(min_separation) << '\n'
     << "attract-gain=" << num_text(apf.attract_gain) << '\n'
     << "rep-gain=" << num_text(apf.rep_gain_base) << '\n'
     << "inner-dt=" << num_text(apf.inner_dt) << '\n'
     << "inner-steps=" << apf.inner_steps << '\n'
     << "include-plain=" << bool_text(include_plain) << '\n'
     << "seed=" << common.seed << '\n'
     << "out=" << common.out_dir << '\n';
  return os.str();
}

std::string PlotOptions::to_config_text() const {
  std::ostringstream os;
  os << "input=" << list_text(inputs) << '\n'
     << "out=" << common.out_dir << '\n';
  return os.str();
}

// ---- experiment runners ------------------------------------------------

EnvConfig env_config_from_checkpoint(const Checkpoint &ck) {
  EnvConfig cfg = default_env_config(env_kind_from_name(ck.env_kind));
  cfg.n_agents = ck.n_agents;
  cfg.horizon = ck.horizon;
  return cfg;
}

VecX episode_returns_closed_loop(const Checkpoint &ck, const EnvConfig &cfg,
                                 int episodes, rng::Key key, bool stochastic) {
  VecX rets(episodes);
  if (!ck.marl) {
    for (int e = 0; e < episodes; ++e) {
      const rng::Key ep = key.child(e);
      const PolicyFn pol =
          make_mfc_policy(ck.policy, cfg, !stochastic, ep.child(900));
      rets(e) = run_episode(cfg, pol, ep).total_return;
    }
    return rets;
  }

  // shared per-agent policy on local views
  const VecX log_std = ck.policy.clamped_log_std();
  for (int e = 0; e < episodes; ++e) {
    const rng::Key ep = key.child(e);
    EnvState state = env_reset(cfg, ep.child(0));
    Observation obs = observe(cfg, state);
    Scalar total = 0.0;
    for (int t = 0; t < cfg.horizon; ++t) {
      const int n = cfg.n_agents;
      MatX views(per_agent_view_dim(cfg), n);
      for (int i = 0; i < n; ++i)
        views.col(i) = per_agent_view(obs, state.swarm, i, cfg);
      const MatX means = ck.policy.policy_mean(views);
      ActionBatch acts(2, n);
      const rng::Key sample_key = ep.child(900).child(t);
      for (int i = 0; i < n; ++i) {
        VecX clipped;
        if (stochastic) {
          rng::Stream s(sample_key.child(i));
          clipped = sample_action(means.col(i), log_std, s).clipped;
        } else {
          clipped = clip_unit(means.col(i));
        }
        acts.col(i) = clip_to_disc(
            Vec2(ck.policy.cfg.squash.theta_scale * clipped.head<2>()),
            cfg.space.action_radius);
      }
      StepOutcome out = env_step_with_actions(cfg, state, acts, ep.child(1 + t));
      total += out.reward;
      state = std::move(out.state);
      obs = std::move(out.obs);
    }
    rets(e) = total;
  }
  return rets;
}

std::vector<EvalRow> run_eval_experiment(const EvalOptions &opts,
                                         const Checkpoint &ck) {
  if (!opts.env.empty() && opts.env != ck.env_kind)
    throw UsageError("eval: checkpoint was trained on '" + ck.env_kind +
                     "' but '" + opts.env + "' was requested");
  std::vector<EvalRow> rows;
  const rng::Key key{opts.common.seed};
  for (std::size_t k = 0; k < opts.n_list.size(); ++k) {
    EnvConfig cfg = env_config_from_checkpoint(ck);
    cfg.n_agents = opts.n_list[k];
    const VecX rets = episode_returns_closed_loop(
        ck, cfg, opts.episodes, key.child(k), opts.stochastic);
    rows.push_back(EvalRow{opts.n_list[k], summarize(rets)});
  }
  return rows;
}

ConvergenceOutcome run_convergence_experiment(const ConvergenceOptions &opts,
                                              const Checkpoint *ck) {
  EnvConfig base = default_env_config(env_kind_from_name(opts.env));
  base.horizon = opts.eval_t + 1;
  const rng::Key key{opts.common.seed};

  PolicyFn policy;
  if (ck != nullptr) {
    require_central_checkpoint(*ck, "convergence");
    policy = make_mfc_policy(ck->policy, base, true, rng::Key{});
  } else {
    const MeanFieldAction drift =
        drift_test_policy(base.grid, base.space.action_radius);
    policy = [drift](const Observation &, int) { return drift; };
  }

  // deterministic-limit reference: average the step-t objective of several
  // large particle-ensemble runs
  Scalar ref = 0.0;
  {
    EnvConfig ref_cfg = base;
    ref_cfg.n_agents = opts.ref_particles;
    for (int r = 0; r < opts.ref_runs; ++r) {
      const EpisodeTrace trace =
          run_episode(ref_cfg, policy, key.child(0).child(r));
      ref += trace.rewards(opts.eval_t);
    }
    ref /= opts.ref_runs;
  }

  ConvergenceOutcome out;
  out.ref_objective = ref;
  for (std::size_t k = 0; k < opts.n_list.size(); ++k) {
    EnvConfig cfg = base;
    cfg.n_agents = opts.n_list[k];
    VecX gaps(opts.episodes);
    for (int e = 0; e < opts.episodes; ++e) {
      const EpisodeTrace trace =
          run_episode(cfg, policy, key.child(1).child(k).child(e));
      gaps(e) = std::abs(trace.rewards(opts.eval_t) - ref);
    }
    out.rows.push_back(ConvergenceRow{opts.n_list[k], summarize(gaps)});
  }

  // least-squares slope of log(gap) against log(N)
  const std::size_t m = out.rows.size();
  if (m >= 2) {
    Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto &row : out.rows) {
      const Scalar x = std::log(static_cast<Scalar>(row.n));
      const Scalar y = std::log(std::max(row.gap.mean, 1e-300));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const Scalar denom = m * sxx - sx * sx;
    out.slope = (m * sxy - sx * sy) / denom;
  }
  return out;
}

OpenLoopOutcome run_openloop_experiment(const OpenLoopOptions &opts,
                                        const Checkpoint &ck) {
  require_central_checkpoint(ck, "openloop");
  EnvConfig base = env_config_from_checkpoint(ck);
  if (base.kind == EnvKind::TaskAllocation)
    throw UsageError("openloop: replay requires a deterministic-limit "
                     "environment (aggregation or formation)");

  const rng::Key key{opts.common.seed};
  const PolicyFn policy = make_mfc_policy(ck.policy, base, true, rng::Key{});

  OpenLoopOutcome out;
  out.sequence = record_open_loop(base, policy, key.child(0));

  for (std::size_t k = 0; k < opts.n_list.size(); ++k) {
    EnvConfig cfg = base;
    cfg.n_agents = opts.n_list[k];
    VecX closed(opts.episodes), open(opts.episodes);
    for (int e = 0; e < opts.episodes; ++e) {
      const rng::Key ep = key.child(1).child(k).child(e);
      closed(e) = run_episode(cfg, policy, ep).total_return;
      open(e) = replay_open_loop(out.sequence, cfg, ep).total_return;
    }
    OpenLoopRow row;
    row.n = opts.n_list[k];
    row.closed = summarize(closed);
    row.open = summarize(open);
    row.rel_gap = std::abs(row.open.mean - row.closed.mean) /
                  std::max(std::abs(row.closed.mean), 1e-12);
    out.rows.push_back(row);
  }
  return out;
}

SweepOutcome run_sweep_experiment(const SweepCrepOptions &opts,
                                  const Checkpoint &ck) {
  require_central_checkpoint(ck, "sweep-crep");
  EnvConfig base = env_config_from_checkpoint(ck);
  base.min_separation = opts.min_separation;
  const rng::Key key{opts.common.seed};
  const PolicyFn policy = make_mfc_policy(ck.policy, base, true, rng::Key{});

  SweepOutcome out;
  for (std::size_t nk = 0; nk < opts.n_list.size(); ++nk) {
    EnvConfig cfg = base;
    cfg.n_agents = opts.n_list[nk];

    if (opts.include_plain) {
      SweepSeries plain;
      plain.c_rep = -1.0;
      plain.n = cfg.n_agents;
      plain.returns.resize(opts.episodes);
      plain.min_distances.resize(opts.episodes);
      EpisodeOptions eopts;
      eopts.track_min_distance = true;
      for (int e = 0; e < opts.episodes; ++e) {
        const EpisodeTrace trace =
            run_episode(cfg, policy, key.child(nk).child(e), eopts);
        plain.returns(e) = trace.total_return;
        plain.min_distances(e) = trace.episode_min_distance();
      }
      plain.ret_stats = summarize(plain.returns);
      plain.dist_stats = summarize(plain.min_distances);
      out.plain.push_back(std::move(plain));
    }

    for (Scalar c_rep : opts.crep_list) {
      SweepSeries series;
      series.c_rep = c_rep;
      series.n = cfg.n_agents;
      series.returns.resize(opts.episodes);
      series.min_distances.resize(opts.episodes);
      ApfConfig apf = opts.apf;
      apf.c_rep = c_rep;
      for (int e = 0; e < opts.episodes; ++e) {
        const SafetyEpisode ep = run_with_collision_avoidance(
            cfg, apf, policy, key.child(nk).child(e));
        series.returns(e) = ep.episode_return;
        series.min_distances(e) = ep.min_distance;
        series.singularities.push_back(ep.singularities);
      }
      series.ret_stats = summarize(series.returns);
      series.dist_stats = summarize(series.min_distances);
      out.apf.push_back(std::move(series));
    }
  }
  return out;
}

// ---- CLI commands -------------------------------------------------------

int cmd_train(const TrainOptions &opts) {
  EnvConfig cfg;
  try {
    cfg = default_env_config(env_kind_from_name(opts.env));
  } catch (const std::invalid_argument &err) {
    throw UsageError(err.what());
  }
  cfg.n_agents = opts.agents;
  if (opts.horizon > 0)
    cfg.horizon = opts.horizon;
  cfg.min_separation = opts.min_separation;

  PpoConfig ppo = opts.ppo;
  ppo.total_iterations = opts.iterations;
  const PolicyConfig pc =
      make_policy_config(cfg, opts.marl, opts.single_gaussian);

  RunManifest manifest{"train", opts.to_config_text(), {opts.common.seed}};
  manifest.write_initial(opts.common.out_dir);
  std::vector<std::string> produced{"config.ini"};

  const std::string curve_path = join_path(opts.common.out_dir, "curve.csv");
  CsvWriter curve(curve_path, {"iteration", "env_steps", "mean_return",
                               "std_return", "mean_kl", "kl_coeff"});
  produced.push_back("curve.csv");

  TrainHooks hooks;
  hooks.on_iteration = [&](const TrainState &state, const IterationLog &log) {
    curve.write_row({static_cast<Scalar>(log.iteration),
                     static_cast<Scalar>(log.env_steps_total),
                     log.mean_return, log.std_return, log.mean_kl,
                     log.kl_coeff});
    std::cerr << "[train] iter " << log.iteration
              << " return " << log.mean_return << " kl " << log.mean_kl
              << '\n';
    if (opts.checkpoint_every > 0 &&
        (log.iteration + 1) % opts.checkpoint_every == 0) {
      Checkpoint ck{state.policy,  state.adam,
                    state.iteration, state.kl_coeff,
                    opts.common.seed, env_kind_name(cfg.kind),
                    cfg.n_agents,     cfg.horizon,
                    opts.marl,        opts.single_gaussian};
      const std::string name =
          "checkpoint_iter" + std::to_string(log.iteration) + ".json";
      ck.save(join_path(opts.common.out_dir, name));
      produced.push_back(name);
    }
  };

  const TrainResult res =
      train(cfg, ppo, pc, opts.marl, rng::Key{opts.common.seed}, hooks);

  Checkpoint ck{res.state.policy,  res.state.adam,
                res.state.iteration, res.state.kl_coeff,
                opts.common.seed,  env_kind_name(cfg.kind),
                cfg.n_agents,      cfg.horizon,
                opts.marl,         opts.single_gaussian};
  ck.save(join_path(opts.common.out_dir, "checkpoint.json"));
  produced.push_back("checkpoint.json");

  manifest.finalize(opts.common.out_dir, produced);
  return 0;
}

int cmd_eval(const EvalOptions &opts) {
  if (opts.checkpoint.empty())
    throw UsageError("eval: --checkpoint is required");
  const Checkpoint ck = Checkpoint::load(opts.checkpoint);

  RunManifest manifest{"eval", opts.to_config_text(), {opts.common.seed}};
  manifest.write_initial(opts.common.out_dir);

  const std::vector<EvalRow> rows = run_eval_experiment(opts, ck);

  CsvWriter csv(join_path(opts.common.out_dir, "eval.csv"),
                {"n", "episodes", "mean_return", "std_return",
                 "mean_return_ci95"});
  nlohmann::json summary = nlohmann::json::array();
  for (const auto &row : rows) {
    csv.write_row({static_cast<Scalar>(row.n),
                   static_cast<Scalar>(row.ret.count), row.ret.mean,
                   row.ret.stddev, row.ret.ci95});
    summary.push_back({{"n", row.n},
                       {"episodes", row.ret.count},
                       {"mean_return", row.ret.mean},
                       {"std_return", row.ret.stddev},
                       {"ci95", row.ret.ci95},
                       {"ci_degenerate", row.ret.degenerate()}});
  }
  {
    std::ofstream out(join_path(opts.common.out_dir, "summary.json"));
    out << summary.dump(2) << '\n';
  }
  std::vector<std::string> produced{"config.ini", "eval.csv", "summary.json"};

  if (opts.trace) {
    if (ck.marl)
      throw UsageError("eval: --trace requires a central-controller "
                       "checkpoint");
    const rng::Key key{opts.common.seed};
    for (std::size_t k = 0; k < opts.n_list.size(); ++k) {
      EnvConfig cfg = env_config_from_checkpoint(ck);
      cfg.n_agents = opts.n_list[k];
      const rng::Key ep = key.child(k).child(0); // first evaluation episode
      const PolicyFn pol =
          make_mfc_policy(ck.policy, cfg, !opts.stochastic, ep.child(900));
      EpisodeOptions eopts;
      eopts.track_min_distance = true;
      eopts.record_histograms = opts.trace_hist;
      const EpisodeTrace trace = run_episode(cfg, pol, ep, eopts);
      const std::string name =
          "trace_n" + std::to_string(opts.n_list[k]) + ".csv";
      export_trace_csv(trace, join_path(opts.common.out_dir, name),
                       opts.trace_hist);
      produced.push_back(name);
    }
  }

  manifest.finalize(opts.common.out_dir, produced);
  return 0;
}

int cmd_convergence(const ConvergenceOptions &opts) {
  std::optional<Checkpoint> ck;
  if (!opts.checkpoint.empty())
    ck = Checkpoint::load(opts.checkpoint);

  RunManifest manifest{"convergence", opts.to_config_text(),
                       {opts.common.seed}};
  manifest.write_initial(opts.common.out_dir);

  const ConvergenceOutcome out =
      run_convergence_experiment(opts, ck ? &*ck : nullptr);

  CsvWriter csv(join_path(opts.common.out_dir, "convergence.csv"),
                {"n", "episodes", "mean_gap", "std_gap", "mean_gap_ci95"});
  for (const auto &row : out.rows)
    csv.write_row({static_cast<Scalar>(row.n),
                   static_cast<Scalar>(row.gap.count), row.gap.mean,
                   row.gap.stddev, row.gap.ci95});

  {
    nlohmann::json fit = {{"slope", out.slope},
                          {"ref_objective", out.ref_objective},
                          {"eval_t", opts.eval_t},
                          {"ref_particles", opts.ref_particles}};
    std::ofstream f(join_path(opts.common.out_dir, "convergence_fit.json"));
    f << fit.dump(2) << '\n';
  }
  manifest.finalize(opts.common.out_dir,
                    {"config.ini", "convergence.csv", "convergence_fit.json"});
  return 0;
}

int cmd_openloop(const OpenLoopOptions &opts) {
  if (opts.checkpoint.empty())
    throw UsageError("openloop: --checkpoint is required");
  const Checkpoint ck = Checkpoint::load(opts.checkpoint);

  RunManifest manifest{"openloop", opts.to_config_text(), {opts.common.seed}};
  manifest.write_initial(opts.common.out_dir);

  const OpenLoopOutcome out = run_openloop_experiment(opts, ck);
  out.sequence.save(join_path(opts.common.out_dir, "sequence.json"));

  CsvWriter csv(join_path(opts.common.out_dir, "openloop.csv"),
                {"n", "episodes", "closed_mean", "closed_mean_ci95",
                 "open_mean", "open_mean_ci95", "rel_gap"});
  for (const auto &row : out.rows)
    csv.write_row({static_cast<Scalar>(row.n),
                   static_cast<Scalar>(row.closed.count), row.closed.mean,
                   row.closed.ci95, row.open.mean, row.open.ci95,
                   row.rel_gap});

  manifest.finalize(opts.common.out_dir,
                    {"config.ini", "sequence.json", "openloop.csv"});
  return 0;
}

int cmd_sweep_crep(const SweepCrepOptions &opts) {
  if (opts.checkpoint.empty())
    throw UsageError("sweep-crep: --checkpoint is required");
  const Checkpoint ck = Checkpoint::load(opts.checkpoint);

  RunManifest manifest{"sweep-crep", opts.to_config_text(),
                       {opts.common.seed}};
  manifest.write_initial(opts.common.out_dir);
  std::vector<std::string> produced{"config.ini"};

  const SweepOutcome out = run_sweep_experiment(opts, ck);

  // per-episode safety rows, one file per swarm size
  for (int n : opts.n_list) {
    const std::string name = "safety_n" + std::to_string(n) + ".csv";
    CsvWriter csv(join_path(opts.common.out_dir, name),
                  {"episode", "c_rep", "return", "min_distance",
                   "singularity_count"});
    for (const auto &series : out.apf) {
      if (series.n != n)
        continue;
      for (int e = 0; e < series.returns.size(); ++e)
        csv.write_row({static_cast<Scalar>(e), series.c_rep,
                       series.returns(e), series.min_distances(e),
                       static_cast<Scalar>(series.singularities[e])});
    }
    produced.push_back(name);
  }

  {
    CsvWriter csv(join_path(opts.common.out_dir, "sweep_summary.csv"),
                  {"c_rep", "n", "episodes", "mean_return",
                   "mean_return_ci95", "mean_min_distance",
                   "mean_min_distance_ci95", "total_singularities"});
    for (const auto &series : out.apf) {
      long sing = 0;
      for (long s : series.singularities)
        sing += s;
      csv.write_row({series.c_rep, static_cast<Scalar>(series.n),
                     static_cast<Scalar>(series.ret_stats.count),
                     series.ret_stats.mean, series.ret_stats.ci95,
                     series.dist_stats.mean, series.dist_stats.ci95,
                     static_cast<Scalar>(sing)});
    }
    produced.push_back("sweep_summary.csv");
  }

  if (!out.plain.empty()) {
    CsvWriter csv(join_path(opts.common.out_dir, "plain_summary.csv"),
                  {"n", "episodes", "mean_return", "mean_return_ci95",
                   "mean_min_distance", "mean_min_distance_ci95"});
    for (const auto &series : out.plain)
      csv.write_row({static_cast<Scalar>(series.n),
                     static_cast<Scalar>(series.ret_stats.count),
                     series.ret_stats.mean, series.ret_stats.ci95,
                     series.dist_stats.mean, series.dist_stats.ci95});
    produced.push_back("plain_summary.csv");
  }

  manifest.finalize(opts.common.out_dir, produced);
  return 0;
}

int cmd_plot(const PlotOptions &opts) {
  if (opts.inputs.empty())
    throw UsageError("plot: at least one --input CSV is required");
  RunManifest manifest{"plot", opts.to_config_text(), {}};
  manifest.write_initial(opts.common.out_dir);
  std::vector<std::string> produced{"config.ini"};
  for (const auto &input : opts.inputs) {
    const auto files = plot_csv(input, opts.common.out_dir);
    for (const auto &f : files)
      produced.push_back(std::filesystem::path(f).filename().string());
  }
  manifest.finalize(opts.common.out_dir, produced);
  return 0;
}

} // namespace mfc
