#include <iostream>

#include <CLI11.hpp>

#include "mfc/commands.hpp"

namespace {

void add_common(CLI::App *sub, mfc::CommonOptions &common) {
  sub->add_option("--seed", common.seed, "master RNG seed")
      ->envname("MFC_SEED");
  sub->add_option("--out", common.out_dir, "output directory")
      ->envname("MFC_OUT");
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"mfcswarm: mean-field control of 2D agent swarms"};
  app.require_subcommand(1);

  mfc::TrainOptions train_opts;
  mfc::EvalOptions eval_opts;
  mfc::ConvergenceOptions conv_opts;
  mfc::OpenLoopOptions open_opts;
  mfc::SweepCrepOptions sweep_opts;
  mfc::PlotOptions plot_opts;
  int rc = 0;

  {
    CLI::App *t = app.add_subcommand(
        "train", "train a swarm controller with PPO");
    t->set_config("--config", "", "key=value option file");
    add_common(t, train_opts.common);
    t->add_option("--env", train_opts.env,
                  "aggregation | formation | taskalloc")
        ->envname("MFC_ENV");
    t->add_option("--agents", train_opts.agents, "swarm size during training")
        ->envname("MFC_AGENTS");
    t->add_option("--horizon", train_opts.horizon,
                  "episode length (0 = environment default)")
        ->envname("MFC_HORIZON");
    t->add_option("--iters", train_opts.iterations, "training iterations")
        ->envname("MFC_ITERS");
    t->add_flag("--marl", train_opts.marl,
                "parameter-shared per-agent training instead of the central "
                "controller")
        ->envname("MFC_MARL");
    t->add_flag("--single-gaussian", train_opts.single_gaussian,
                "4-parameter global decision rule (ablation)")
        ->envname("MFC_SINGLE_GAUSSIAN");
    t->add_option("--min-separation", train_opts.min_separation,
                  "resample initial states below this pairwise distance")
        ->envname("MFC_MIN_SEPARATION");
    t->add_option("--checkpoint-every", train_opts.checkpoint_every,
                  "periodic checkpoint interval in iterations (0 = final "
                  "only)")
        ->envname("MFC_CHECKPOINT_EVERY");
    t->add_option("--gamma", train_opts.ppo.discount, "discount factor")
        ->envname("MFC_GAMMA");
    t->add_option("--gae-lambda", train_opts.ppo.gae_lambda, "GAE lambda")
        ->envname("MFC_GAE_LAMBDA");
    t->add_option("--kl-coeff", train_opts.ppo.kl_coeff,
                  "initial KL penalty coefficient")
        ->envname("MFC_KL_COEFF");
    t->add_option("--kl-target", train_opts.ppo.kl_target,
                  "KL adaptation target")
        ->envname("MFC_KL_TARGET");
    t->add_option("--clip-param", train_opts.ppo.clip_param,
                  "surrogate clip parameter")
        ->envname("MFC_CLIP_PARAM");
    t->add_option("--lr", train_opts.ppo.learning_rate, "learning rate")
        ->envname("MFC_LR");
    t->add_option("--train-batch", train_opts.ppo.train_batch,
                  "transitions per training batch")
        ->envname("MFC_TRAIN_BATCH");
    t->add_option("--minibatch", train_opts.ppo.minibatch, "minibatch size")
        ->envname("MFC_MINIBATCH");
    t->add_option("--epochs", train_opts.ppo.epochs_per_batch,
                  "update epochs per training batch")
        ->envname("MFC_EPOCHS");
    t->add_option("--value-loss-coeff", train_opts.ppo.value_loss_coeff,
                  "value loss coefficient")
        ->envname("MFC_VALUE_LOSS_COEFF");
    t->add_option("--entropy-coeff", train_opts.ppo.entropy_coeff,
                  "entropy bonus coefficient")
        ->envname("MFC_ENTROPY_COEFF");
    t->add_option("--grad-clip", train_opts.ppo.grad_clip_norm,
                  "gradient norm clip (<= 0 disables)")
        ->envname("MFC_GRAD_CLIP");
    t->callback([&]() { rc = mfc::cmd_train(train_opts); });
  }

  {
    CLI::App *e = app.add_subcommand(
        "eval", "evaluate a frozen checkpoint over sample episodes");
    e->set_config("--config", "", "key=value option file");
    add_common(e, eval_opts.common);
    e->add_option("--checkpoint", eval_opts.checkpoint, "checkpoint path")
        ->envname("MFC_CHECKPOINT");
    e->add_option("--env", eval_opts.env,
                  "environment check (must match the checkpoint)")
        ->envname("MFC_ENV");
    e->add_option("--n-list", eval_opts.n_list, "swarm sizes to evaluate")
        ->delimiter(',')
        ->envname("MFC_N_LIST");
    e->add_option("--episodes", eval_opts.episodes, "episodes per swarm size")
        ->envname("MFC_EPISODES");
    e->add_flag("--stochastic", eval_opts.stochastic,
                "sample controller outputs instead of using the mean")
        ->envname("MFC_STOCHASTIC");
    e->add_flag("--trace", eval_opts.trace,
                "export one per-step episode trace CSV per swarm size")
        ->envname("MFC_TRACE");
    e->add_flag("--trace-hist", eval_opts.trace_hist,
                "include per-bin histogram columns in traces")
        ->envname("MFC_TRACE_HIST");
    e->callback([&]() { rc = mfc::cmd_eval(eval_opts); });
  }

  {
    CLI::App *c = app.add_subcommand(
        "convergence",
        "objective gap between finite swarms and a large-ensemble reference");
    c->set_config("--config", "", "key=value option file");
    add_common(c, conv_opts.common);
    c->add_option("--env", conv_opts.env, "environment")->envname("MFC_ENV");
    c->add_option("--checkpoint", conv_opts.checkpoint,
                  "optional checkpoint (default: built-in drift rule)")
        ->envname("MFC_CHECKPOINT");
    c->add_option("--n-list", conv_opts.n_list, "swarm sizes")
        ->delimiter(',')
        ->envname("MFC_N_LIST");
    c->add_option("--episodes", conv_opts.episodes, "episodes per swarm size")
        ->envname("MFC_EPISODES");
    c->add_option("--eval-t", conv_opts.eval_t, "time step of the comparison")
        ->envname("MFC_EVAL_T");
    c->add_option("--ref-particles", conv_opts.ref_particles,
                  "reference ensemble size")
        ->envname("MFC_REF_PARTICLES");
    c->add_option("--ref-runs", conv_opts.ref_runs,
                  "reference runs to average")
        ->envname("MFC_REF_RUNS");
    c->callback([&]() { rc = mfc::cmd_convergence(conv_opts); });
  }

  {
    CLI::App *o = app.add_subcommand(
        "openloop",
        "record a decision-rule sequence and compare replay to closed loop");
    o->set_config("--config", "", "key=value option file");
    add_common(o, open_opts.common);
    o->add_option("--checkpoint", open_opts.checkpoint, "checkpoint path")
        ->envname("MFC_CHECKPOINT");
    o->add_option("--n-list", open_opts.n_list, "swarm sizes")
        ->delimiter(',')
        ->envname("MFC_N_LIST");
    o->add_option("--episodes", open_opts.episodes,
                  "episodes per swarm size")
        ->envname("MFC_EPISODES");
    o->callback([&]() { rc = mfc::cmd_openloop(open_opts); });
  }

  {
    CLI::App *s = app.add_subcommand(
        "sweep-crep",
        "safety/performance sweep over repulsion coefficients");
    s->set_config("--config", "", "key=value option file");
    add_common(s, sweep_opts.common);
    s->add_option("--checkpoint", sweep_opts.checkpoint, "checkpoint path")
        ->envname("MFC_CHECKPOINT");
    s->add_option("--crep-list", sweep_opts.crep_list,
                  "repulsion coefficients")
        ->delimiter(',')
        ->envname("MFC_CREP_LIST");
    s->add_option("--n-list", sweep_opts.n_list, "swarm sizes")
        ->delimiter(',')
        ->envname("MFC_N_LIST");
    s->add_option("--episodes", sweep_opts.episodes,
                  "episodes per sweep point")
        ->envname("MFC_EPISODES");
    s->add_option("--min-separation", sweep_opts.min_separation,
                  "initial-state separation threshold")
        ->envname("MFC_MIN_SEPARATION");
    s->add_option("--attract-gain", sweep_opts.apf.attract_gain,
                  "target attraction gain")
        ->envname("MFC_ATTRACT_GAIN");
    s->add_option("--rep-gain", sweep_opts.apf.rep_gain_base,
                  "repulsion base gain")
        ->envname("MFC_REP_GAIN");
    s->add_option("--inner-dt", sweep_opts.apf.inner_dt,
                  "integrator substep length")
        ->envname("MFC_INNER_DT");
    s->add_option("--inner-steps", sweep_opts.apf.inner_steps,
                  "integrator substeps per decision epoch")
        ->envname("MFC_INNER_STEPS");
    s->add_flag("--include-plain,!--no-include-plain",
                sweep_opts.include_plain,
                "also run the avoidance-free baseline")
        ->envname("MFC_INCLUDE_PLAIN");
    s->callback([&]() { rc = mfc::cmd_sweep_crep(sweep_opts); });
  }

  {
    CLI::App *p = app.add_subcommand("plot",
                                     "render SVG plots from result CSVs");
    p->set_config("--config", "", "key=value option file");
    add_common(p, plot_opts.common);
    p->add_option("--input", plot_opts.inputs, "CSV files to render")
        ->delimiter(',')
        ->envname("MFC_INPUT");
    p->callback([&]() { rc = mfc::cmd_plot(plot_opts); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const mfc::UsageError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return rc;
}
