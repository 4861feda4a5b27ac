#include "mfc/ppo.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mfc/serialize.hpp"

namespace mfc {

namespace {

constexpr std::uint64_t kLaneRlSample = 4; // env_step owns lanes 0-3

void shuffle_indices(std::vector<int> &idx, rng::Stream &s) {
  for (int i = static_cast<int>(idx.size()) - 1; i > 0; --i) {
    const int j = static_cast<int>(s.uniform01() * (i + 1));
    std::swap(idx[i], idx[std::min(j, i)]);
  }
}

} // namespace

GaeResult compute_gae(const Trajectory &traj, Scalar gamma, Scalar lambda) {
  const int T = traj.steps();
  if (T == 0)
    throw std::invalid_argument("compute_gae: empty trajectory");
  const int lanes = std::max(1, traj.lanes);

  VecX adv(T);
  std::vector<Scalar> acc(lanes, 0.0);
  for (int t = T - 1; t >= 0; --t) {
    const int lane = t % lanes;
    const Scalar boot = traj.terminal[t] ? 0.0 : traj.next_values(t);
    const Scalar delta = traj.rewards(t) + gamma * boot - traj.values(t);
    const Scalar cont = traj.episode_end[t] ? 0.0 : 1.0;
    acc[lane] = delta + gamma * lambda * cont * acc[lane];
    adv(t) = acc[lane];
  }

  GaeResult res;
  res.advantages_raw = adv;
  res.value_targets = adv + traj.values;
  const Scalar mean = adv.mean();
  const Scalar var = (adv.array() - mean).square().mean();
  res.advantages = ((adv.array() - mean) / std::sqrt(var + 1e-8)).matrix();
  return res;
}

Trajectory collect_rollout(const EnvConfig &env_cfg, const Policy &policy,
                           int min_transitions, rng::Key key, bool marl) {
  const int obs_dim = marl ? per_agent_view_dim(env_cfg)
                           : mfc_observation_dim(env_cfg);
  if (policy.cfg.obs_dim != obs_dim)
    throw std::invalid_argument("collect_rollout: policy/env dimension mismatch");
  const int act_dim = policy.cfg.action_dim;
  if (marl && act_dim != 2)
    throw std::invalid_argument("collect_rollout: MARL policy must be 2-D");

  const int lanes = marl ? env_cfg.n_agents : 1;
  // Whole environment steps only; MARL may overshoot by less than one step.
  const int env_steps_wanted = (min_transitions + lanes - 1) / lanes;
  const int total = env_steps_wanted * lanes;

  Trajectory traj;
  traj.obs.resize(obs_dim, total);
  traj.raw_actions.resize(act_dim, total);
  traj.old_means.resize(act_dim, total);
  traj.old_log_std = policy.clamped_log_std();
  traj.log_probs.resize(total);
  traj.rewards.resize(total);
  traj.values.resize(total);
  traj.next_values = VecX::Zero(total);
  traj.episode_end.assign(total, 0);
  traj.terminal.assign(total, 0);
  traj.lanes = lanes;
  traj.env_steps = total;

  std::vector<Scalar> completed_returns;
  const VecX log_std = policy.clamped_log_std();
  const int bins = env_cfg.grid.total_bins();

  int filled = 0;
  int episode = 0;
  while (filled < total) {
    const rng::Key ep_key = key.child(episode);
    EnvState state = env_reset(env_cfg, ep_key.child(0));
    Observation obs = observe(env_cfg, state);
    Scalar ep_return = 0.0;

    for (int t = 0; t < env_cfg.horizon && filled < total; ++t) {
      const rng::Key step_key = ep_key.child(1 + t);
      StepOutcome out;

      if (!marl) {
        const VecX x = mfc_observation_vector(obs);
        const MatX xm = x;
        const VecX mean = policy.policy_mean(xm).col(0);
        const Scalar value = policy.value_of(xm)(0);
        rng::Stream s(step_key.child(kLaneRlSample));
        ActionSample sample = sample_action(mean, log_std, s);
        const MeanFieldAction h =
            squash_to_mfc(sample.clipped, policy.cfg.squash, bins);
        out = env_step(env_cfg, state, h, step_key);

        traj.obs.col(filled) = x;
        traj.raw_actions.col(filled) = sample.raw;
        traj.old_means.col(filled) = mean;
        traj.log_probs(filled) = sample.log_prob;
        traj.rewards(filled) = out.reward;
        traj.values(filled) = value;
        const bool last = out.done || filled + 1 == total;
        if (last) {
          traj.episode_end[filled] = out.done ? 1 : 0;
          // time truncation: bootstrap from the successor state
          const MatX xn = mfc_observation_vector(out.obs);
          traj.next_values(filled) = policy.value_of(xn)(0);
        }
        ++filled;
      } else {
        const int n = env_cfg.n_agents;
        MatX views(obs_dim, n);
        for (int i = 0; i < n; ++i)
          views.col(i) = per_agent_view(obs, state.swarm, i, env_cfg);
        const MatX means = policy.policy_mean(views);
        const VecX values = policy.value_of(views);

        ActionBatch acts(2, n);
        const rng::Key sample_key = step_key.child(kLaneRlSample);
        for (int i = 0; i < n; ++i) {
          rng::Stream s(sample_key.child(i));
          ActionSample sample = sample_action(means.col(i), log_std, s);
          traj.raw_actions.col(filled + i) = sample.raw;
          traj.log_probs(filled + i) = sample.log_prob;
          const Vec2 scaled =
              policy.cfg.squash.theta_scale * Vec2(sample.clipped.head<2>());
          acts.col(i) = clip_to_disc(scaled, env_cfg.space.action_radius);
        }
        out = env_step_with_actions(env_cfg, state, acts, step_key);

        traj.obs.middleCols(filled, n) = views;
        traj.old_means.middleCols(filled, n) = means;
        traj.rewards.segment(filled, n).setConstant(out.reward);
        traj.values.segment(filled, n) = values;
        const bool last = out.done || filled + n >= total;
        if (last) {
          MatX next_views(obs_dim, n);
          for (int i = 0; i < n; ++i)
            next_views.col(i) = per_agent_view(out.obs, out.state.swarm, i,
                                               env_cfg);
          const VecX next_values = policy.value_of(next_views);
          for (int i = 0; i < n; ++i) {
            traj.episode_end[filled + i] = out.done ? 1 : 0;
            traj.next_values(filled + i) = next_values(i);
          }
        }
        filled += n;
      }

      ep_return += out.reward;
      state = std::move(out.state);
      obs = std::move(out.obs);
      if (out.done) {
        completed_returns.push_back(ep_return);
        break;
      }
    }
    ++episode;
  }

  // Successor values for interior steps come from the stored values of the
  // next transition in the same lane; episode ends and the batch cut were
  // bootstrapped above.
  for (int t = 0; t + lanes < total; ++t)
    if (!traj.episode_end[t])
      traj.next_values(t) = traj.values(t + lanes);

  traj.episode_returns = Eigen::Map<const VecX>(
      completed_returns.data(),
      static_cast<Eigen::Index>(completed_returns.size()));
  return traj;
}

LossBreakdown ppo_loss(const Policy &policy, const MinibatchData &mb,
                       Scalar kl_coeff, const PpoConfig &cfg,
                       PolicyGrad *grad) {
  constexpr Scalar kLogTwoPi = 1.8378770664093454836;
  const int bsz = static_cast<int>(mb.advantages.size());
  const int act_dim = policy.cfg.action_dim;

  Mlp::Cache pi_cache, v_cache;
  const MatX mu_new = policy.policy_mean(mb.obs, &pi_cache);
  const Eigen::ArrayXd ls = policy.clamped_log_std().array();
  const Eigen::ArrayXd inv_var = (-2.0 * ls).exp();
  const Eigen::ArrayXd old_ls = mb.old_log_std.array();
  const Eigen::ArrayXd var_old = (2.0 * old_ls).exp();

  const MatX diff = mb.raw_actions - mu_new;
  const Eigen::ArrayXXd z2 = diff.array().square().colwise() * inv_var;
  const VecX lp_new =
      (-0.5 * z2.colwise().sum()).transpose().matrix() -
      VecX::Constant(bsz, ls.sum() + 0.5 * kLogTwoPi * act_dim);
  const VecX ratio = (lp_new - mb.old_log_probs).array().exp().matrix();

  const VecX surr1 = ratio.cwiseProduct(mb.advantages);
  const VecX ratio_clipped =
      ratio.cwiseMax(1.0 - cfg.clip_param).cwiseMin(1.0 + cfg.clip_param);
  const VecX surr2 = ratio_clipped.cwiseProduct(mb.advantages);

  LossBreakdown out;
  out.policy_loss = -surr1.cwiseMin(surr2).mean();

  const MatX dmu = mb.old_means - mu_new;
  const Eigen::ArrayXXd sq = dmu.array().square().colwise() + var_old;
  const VecX kl_per_sample =
      ((sq.colwise() * (0.5 * inv_var)).colwise().sum()).transpose().matrix() +
      VecX::Constant(bsz, (ls - old_ls).sum() - 0.5 * act_dim);
  out.mean_kl = kl_per_sample.mean();

  const VecX v = policy.value.forward(mb.obs, &v_cache).transpose();
  const VecX vdiff = v - mb.value_targets;
  out.value_loss = cfg.value_loss_coeff * vdiff.squaredNorm() / bsz;

  if (cfg.entropy_coeff != 0.0)
    out.entropy = ls.sum() + 0.5 * act_dim * (kLogTwoPi + 1.0);

  out.total = out.policy_loss + kl_coeff * out.mean_kl + out.value_loss -
              cfg.entropy_coeff * out.entropy;

  if (grad != nullptr) {
    VecX coef(bsz);
    for (int k = 0; k < bsz; ++k)
      coef(k) =
          (surr1(k) <= surr2(k)) ? -mb.advantages(k) * ratio(k) / bsz : 0.0;

    // d loss / d mu_new: surrogate via d lp/d mu = diff/sigma^2, plus the
    // KL penalty (mu_new - mu_old)/sigma^2.
    MatX dmean =
        (diff.array().colwise() * inv_var).matrix() * coef.asDiagonal();
    dmean.noalias() +=
        (kl_coeff / bsz) * ((-dmu).array().colwise() * inv_var).matrix();

    // d loss / d log_std (shared across the batch).
    VecX dls = z2.matrix() * coef - coef.sum() * VecX::Ones(act_dim);
    const Eigen::ArrayXd kl_ls =
        Scalar(bsz) - (sq.colwise() * inv_var).rowwise().sum();
    dls += (kl_coeff / bsz) * kl_ls.matrix();
    if (cfg.entropy_coeff != 0.0)
      dls.array() -= cfg.entropy_coeff;
    grad->log_std += dls;

    const MatX dv = (cfg.value_loss_coeff * 2.0 / bsz) * vdiff.transpose();

    policy.pi.backward(pi_cache, dmean, grad->pi);
    policy.value.backward(v_cache, dv, grad->value);
  }
  return out;
}

UpdateStats ppo_update(TrainState &st, const Trajectory &traj,
                       const PpoConfig &cfg, rng::Key shuffle_key) {
  const int T = traj.steps();
  if (T == 0)
    throw std::invalid_argument("ppo_update: empty trajectory");
  Policy &p = st.policy;
  const int act_dim = p.cfg.action_dim;
  const int obs_dim = p.cfg.obs_dim;

  const GaeResult gae = compute_gae(traj, cfg.discount, cfg.gae_lambda);

  std::vector<int> idx(T);
  std::iota(idx.begin(), idx.end(), 0);

  UpdateStats stats;
  Scalar kl_sum = 0.0;
  int kl_count = 0;
  int updates = 0;

  for (int epoch = 0; epoch < cfg.epochs_per_batch; ++epoch) {
    rng::Stream shuffler(shuffle_key.child(epoch));
    shuffle_indices(idx, shuffler);
    const bool last_epoch = (epoch + 1 == cfg.epochs_per_batch);

    for (int start = 0; start < T; start += cfg.minibatch) {
      const int bsz = std::min(cfg.minibatch, T - start);

      MinibatchData mb;
      mb.obs.resize(obs_dim, bsz);
      mb.raw_actions.resize(act_dim, bsz);
      mb.old_means.resize(act_dim, bsz);
      mb.old_log_std = traj.old_log_std;
      mb.old_log_probs.resize(bsz);
      mb.advantages.resize(bsz);
      mb.value_targets.resize(bsz);
      for (int k = 0; k < bsz; ++k) {
        const int s = idx[start + k];
        mb.obs.col(k) = traj.obs.col(s);
        mb.raw_actions.col(k) = traj.raw_actions.col(s);
        mb.old_means.col(k) = traj.old_means.col(s);
        mb.advantages(k) = gae.advantages(s);
        mb.value_targets(k) = gae.value_targets(s);
        mb.old_log_probs(k) = traj.log_probs(s);
      }

      PolicyGrad grad = zero_policy_grad(p);
      const LossBreakdown loss = ppo_loss(p, mb, st.kl_coeff, cfg, &grad);
      if (!std::isfinite(loss.total)) {
        std::ostringstream msg;
        msg << "ppo_update: non-finite loss (iteration " << st.iteration
            << ", epoch " << epoch << ", minibatch at " << start
            << "): policy=" << loss.policy_loss << " kl=" << loss.mean_kl
            << " value=" << loss.value_loss;
        throw std::runtime_error(msg.str());
      }

      VecX flat_grad = flatten_grad(p, grad);
      if (cfg.grad_clip_norm > 0.0) {
        const Scalar norm = flat_grad.norm();
        if (norm > cfg.grad_clip_norm)
          flat_grad *= cfg.grad_clip_norm / norm;
      }
      VecX flat_params = flatten_params(p);
      adam_update(flat_params, flat_grad, st.adam, cfg.learning_rate);
      unflatten_params(flat_params, p);

      ++updates;
      stats.policy_loss += loss.policy_loss;
      stats.value_loss += loss.value_loss;
      stats.total_loss += loss.total;
      if (last_epoch) {
        kl_sum += loss.mean_kl;
        ++kl_count;
      }
    }
  }

  stats.policy_loss /= updates;
  stats.value_loss /= updates;
  stats.total_loss /= updates;
  stats.mean_kl = kl_count > 0 ? kl_sum / kl_count : 0.0;

  if (stats.mean_kl > 2.0 * cfg.kl_target)
    st.kl_coeff *= 2.0;
  else if (stats.mean_kl < 0.5 * cfg.kl_target)
    st.kl_coeff *= 0.5;

  st.iteration += 1;
  return stats;
}

TrainResult train(const EnvConfig &env_cfg, const PpoConfig &ppo_cfg,
                  const PolicyConfig &policy_cfg, bool marl, rng::Key key,
                  const TrainHooks &hooks) {
  TrainResult res;
  res.state.policy = init_policy(policy_cfg, key.child(0));
  res.state.adam = make_adam_state(policy_num_params(res.state.policy));
  res.state.kl_coeff = ppo_cfg.kl_coeff;

  long steps_total = 0;
  for (int it = 0; it < ppo_cfg.total_iterations; ++it) {
    const Trajectory traj = collect_rollout(
        env_cfg, res.state.policy, ppo_cfg.train_batch, key.child(1).child(it),
        marl);
    const UpdateStats us =
        ppo_update(res.state, traj, ppo_cfg, key.child(2).child(it));
    steps_total += traj.env_steps;

    IterationLog log;
    log.iteration = it;
    log.env_steps_total = steps_total;
    const SummaryStats ret = summarize(traj.episode_returns);
    log.mean_return = ret.mean;
    log.std_return = ret.stddev;
    log.mean_kl = us.mean_kl;
    log.kl_coeff = res.state.kl_coeff;
    res.curve.push_back(log);
    if (hooks.on_iteration)
      hooks.on_iteration(res.state, log);
  }
  return res;
}

PolicyFn make_mfc_policy(const Policy &policy, const EnvConfig &cfg,
                         bool deterministic, rng::Key sample_key) {
  const int bins = cfg.grid.total_bins();
  return [policy, bins, deterministic, sample_key](const Observation &obs,
                                                   int t) -> MeanFieldAction {
    const MatX x = mfc_observation_vector(obs);
    const VecX mean = policy.policy_mean(x).col(0);
    VecX clipped;
    if (deterministic) {
      clipped = clip_unit(mean);
    } else {
      rng::Stream s(sample_key.child(t));
      clipped = sample_action(mean, policy.clamped_log_std(), s).clipped;
    }
    return squash_to_mfc(clipped, policy.cfg.squash, bins);
  };
}

PolicyConfig make_policy_config(const EnvConfig &cfg, bool marl,
                                bool single_gaussian) {
  PolicyConfig pc;
  pc.obs_dim =
      marl ? per_agent_view_dim(cfg) : mfc_observation_dim(cfg);
  pc.action_dim = marl ? 2 : (single_gaussian ? 4 : 4 * cfg.grid.total_bins());
  return pc;
}

namespace {

nlohmann::json policy_config_to_json(const PolicyConfig &cfg) {
  return {{"obs_dim", cfg.obs_dim},
          {"action_dim", cfg.action_dim},
          {"hidden", cfg.hidden},
          {"output_scale", cfg.output_scale},
          {"log_std_init", cfg.log_std_init},
          {"log_std_min", cfg.log_std_min},
          {"log_std_max", cfg.log_std_max},
          {"squash",
           {{"theta_scale", cfg.squash.theta_scale},
            {"sigma_scale", cfg.squash.sigma_scale},
            {"sigma_floor", cfg.squash.sigma_floor}}}};
}

PolicyConfig policy_config_from_json(const nlohmann::json &j) {
  PolicyConfig cfg;
  cfg.obs_dim = j.at("obs_dim").get<int>();
  cfg.action_dim = j.at("action_dim").get<int>();
  cfg.hidden = j.at("hidden").get<std::vector<int>>();
  cfg.output_scale = j.at("output_scale").get<Scalar>();
  cfg.log_std_init = j.at("log_std_init").get<Scalar>();
  cfg.log_std_min = j.at("log_std_min").get<Scalar>();
  cfg.log_std_max = j.at("log_std_max").get<Scalar>();
  cfg.squash.theta_scale = j.at("squash").at("theta_scale").get<Scalar>();
  cfg.squash.sigma_scale = j.at("squash").at("sigma_scale").get<Scalar>();
  cfg.squash.sigma_floor = j.at("squash").at("sigma_floor").get<Scalar>();
  return cfg;
}

} // namespace

std::string Checkpoint::to_json() const {
  nlohmann::json j;
  j["format"] = "mfcswarm-checkpoint";
  j["version"] = 1;
  j["policy_config"] = policy_config_to_json(policy.cfg);
  j["params"] = vec_to_base64(flatten_params(policy));
  j["adam"] = {{"m", vec_to_base64(adam.m)},
               {"v", vec_to_base64(adam.v)},
               {"t", adam.t}};
  j["iteration"] = iteration;
  j["kl_coeff"] = kl_coeff;
  j["seed"] = seed;
  j["env"] = {{"kind", env_kind},
              {"n_agents", n_agents},
              {"horizon", horizon},
              {"marl", marl},
              {"single_gaussian", single_gaussian}};
  return j.dump(2);
}

Checkpoint Checkpoint::from_json(const std::string &text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("format").get<std::string>() != "mfcswarm-checkpoint")
    throw std::runtime_error("Checkpoint: unrecognized format tag");
  Checkpoint ck;
  const PolicyConfig cfg = policy_config_from_json(j.at("policy_config"));
  ck.policy = init_policy(cfg, rng::Key{0});
  unflatten_params(base64_to_vec(j.at("params").get<std::string>()),
                   ck.policy);
  ck.adam.m = base64_to_vec(j.at("adam").at("m").get<std::string>());
  ck.adam.v = base64_to_vec(j.at("adam").at("v").get<std::string>());
  ck.adam.t = j.at("adam").at("t").get<long>();
  ck.iteration = j.at("iteration").get<int>();
  ck.kl_coeff = j.at("kl_coeff").get<Scalar>();
  ck.seed = j.at("seed").get<std::uint64_t>();
  ck.env_kind = j.at("env").at("kind").get<std::string>();
  ck.n_agents = j.at("env").at("n_agents").get<int>();
  ck.horizon = j.at("env").at("horizon").get<int>();
  ck.marl = j.at("env").at("marl").get<bool>();
  ck.single_gaussian = j.at("env").at("single_gaussian").get<bool>();
  return ck;
}

void Checkpoint::save(const std::string &path) const {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("Checkpoint: cannot write " + path);
  out << to_json() << '\n';
}

Checkpoint Checkpoint::load(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("Checkpoint: cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

} // namespace mfc
