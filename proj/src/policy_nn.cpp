#include "mfc/policy_nn.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mfc {

Mlp Mlp::init(const MlpSpec &spec, rng::Stream &stream, Scalar output_scale) {
  std::vector<int> dims;
  dims.push_back(spec.input);
  for (int h : spec.hidden)
    dims.push_back(h);
  dims.push_back(spec.output);

  Mlp net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const Scalar bound = 1.0 / std::sqrt(static_cast<Scalar>(fan_in));
    MatX wl(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c)
        wl(r, c) = stream.uniform(-bound, bound);
    const bool last = (l + 2 == dims.size());
    if (last)
      wl *= output_scale;
    net.w.push_back(std::move(wl));
    net.b.push_back(VecX::Zero(fan_out));
  }
  return net;
}

long Mlp::num_params() const {
  long n = 0;
  for (int l = 0; l < layers(); ++l)
    n += w[l].size() + b[l].size();
  return n;
}

MatX Mlp::forward(const MatX &x, Cache *cache) const {
  if (x.rows() != input_dim())
    throw std::invalid_argument("Mlp::forward: input dimension mismatch");
  if (cache) {
    cache->act.clear();
    cache->act.reserve(layers() + 1);
    cache->act.push_back(x);
  }
  MatX a = x;
  for (int l = 0; l < layers(); ++l) {
    MatX z = (w[l] * a).colwise() + b[l];
    if (l + 1 < layers())
      a = z.array().tanh().matrix();
    else
      a = std::move(z);
    if (cache)
      cache->act.push_back(a);
  }
  return a;
}

Mlp::Grad Mlp::zero_grad() const {
  Grad g;
  for (int l = 0; l < layers(); ++l) {
    g.w.push_back(MatX::Zero(w[l].rows(), w[l].cols()));
    g.b.push_back(VecX::Zero(b[l].size()));
  }
  return g;
}

void Mlp::backward(const Cache &cache, const MatX &d_out, Grad &grad) const {
  if (static_cast<int>(cache.act.size()) != layers() + 1)
    throw std::invalid_argument("Mlp::backward: missing forward cache");
  MatX dz = d_out; // linear output layer
  for (int l = layers() - 1; l >= 0; --l) {
    grad.w[l].noalias() += dz * cache.act[l].transpose();
    grad.b[l] += dz.rowwise().sum();
    if (l > 0) {
      MatX da = w[l].transpose() * dz;
      // tanh'(z) = 1 - a^2, with a the cached post-activation
      dz = da.array() * (1.0 - cache.act[l].array().square());
    }
  }
}

Policy init_policy(const PolicyConfig &cfg, rng::Key key) {
  Policy p;
  p.cfg = cfg;
  MlpSpec pi_spec{cfg.obs_dim, cfg.hidden, cfg.action_dim};
  MlpSpec value_spec{cfg.obs_dim, cfg.hidden, 1};
  rng::Stream pi_stream(key.child(0));
  rng::Stream value_stream(key.child(1));
  p.pi = Mlp::init(pi_spec, pi_stream, cfg.output_scale);
  p.value = Mlp::init(value_spec, value_stream, 1.0);
  p.log_std = VecX::Constant(cfg.action_dim, cfg.log_std_init);
  return p;
}

Scalar gaussian_log_prob(const VecX &a, const VecX &mean, const VecX &log_std) {
  constexpr Scalar kLogTwoPi = 1.8378770664093454836;
  const Eigen::ArrayXd z =
      (a - mean).array() * (-log_std.array()).exp();
  return -0.5 * z.square().sum() - log_std.sum() -
         0.5 * kLogTwoPi * static_cast<Scalar>(a.size());
}

ActionSample sample_action(const VecX &mean, const VecX &log_std,
                           rng::Stream &stream) {
  const Eigen::Index n = mean.size();
  ActionSample s;
  s.raw.resize(n);
  for (Eigen::Index d = 0; d < n; ++d)
    s.raw(d) = mean(d) + std::exp(log_std(d)) * stream.normal();
  s.clipped = clip_unit(s.raw);
  s.log_prob = gaussian_log_prob(s.raw, mean, log_std);
  return s;
}

VecX clip_unit(VecX raw) {
  return raw.cwiseMax(-1.0).cwiseMin(1.0);
}

MeanFieldAction squash_to_mfc(const VecX &clipped, const SquashSpec &squash,
                              int total_bins) {
  const Eigen::Index a = clipped.size();
  if (a != 4 && a != 4L * total_bins)
    throw std::invalid_argument("squash_to_mfc: unexpected action dimension");
  const bool per_bin = (a == 4L * total_bins);

  MeanFieldAction h;
  h.theta.resize(2, total_bins);
  h.sigma.resize(2, total_bins);
  for (int bin = 0; bin < total_bins; ++bin) {
    const Eigen::Index base = per_bin ? 4L * bin : 0;
    h.theta(0, bin) = squash.theta_scale * clipped(base + 0);
    h.theta(1, bin) = squash.theta_scale * clipped(base + 1);
    h.sigma(0, bin) = std::max(squash.sigma_floor,
                               squash.sigma_scale * (clipped(base + 2) + 1.0));
    h.sigma(1, bin) = std::max(squash.sigma_floor,
                               squash.sigma_scale * (clipped(base + 3) + 1.0));
  }
  return h;
}

namespace {

long mlp_param_count(const Mlp &net) { return net.num_params(); }

template <typename Layered>
void copy_layers_out(const Layered &src, VecX &flat, Eigen::Index &pos) {
  for (std::size_t l = 0; l < src.w.size(); ++l) {
    flat.segment(pos, src.w[l].size()) =
        Eigen::Map<const VecX>(src.w[l].data(), src.w[l].size());
    pos += src.w[l].size();
    flat.segment(pos, src.b[l].size()) = src.b[l];
    pos += src.b[l].size();
  }
}

void copy_layers_in(const VecX &flat, Mlp &dst, Eigen::Index &pos) {
  for (std::size_t l = 0; l < dst.w.size(); ++l) {
    dst.w[l] = Eigen::Map<const MatX>(flat.data() + pos, dst.w[l].rows(),
                                      dst.w[l].cols());
    pos += dst.w[l].size();
    dst.b[l] = flat.segment(pos, dst.b[l].size());
    pos += dst.b[l].size();
  }
}

} // namespace

long policy_num_params(const Policy &p) {
  return mlp_param_count(p.pi) + p.log_std.size() + mlp_param_count(p.value);
}

VecX flatten_params(const Policy &p) {
  VecX flat(policy_num_params(p));
  Eigen::Index pos = 0;
  copy_layers_out(p.pi, flat, pos);
  flat.segment(pos, p.log_std.size()) = p.log_std;
  pos += p.log_std.size();
  copy_layers_out(p.value, flat, pos);
  return flat;
}

void unflatten_params(const VecX &flat, Policy &p) {
  if (flat.size() != policy_num_params(p))
    throw std::invalid_argument("unflatten_params: size mismatch");
  Eigen::Index pos = 0;
  copy_layers_in(flat, p.pi, pos);
  p.log_std = flat.segment(pos, p.log_std.size());
  pos += p.log_std.size();
  copy_layers_in(flat, p.value, pos);
}

PolicyGrad zero_policy_grad(const Policy &p) {
  PolicyGrad g;
  g.pi = p.pi.zero_grad();
  g.log_std = VecX::Zero(p.log_std.size());
  g.value = p.value.zero_grad();
  return g;
}

VecX flatten_grad(const Policy &p, const PolicyGrad &g) {
  VecX flat(policy_num_params(p));
  Eigen::Index pos = 0;
  copy_layers_out(g.pi, flat, pos);
  flat.segment(pos, g.log_std.size()) = g.log_std;
  pos += g.log_std.size();
  copy_layers_out(g.value, flat, pos);
  return flat;
}

AdamState make_adam_state(long n) {
  AdamState s;
  s.m = VecX::Zero(n);
  s.v = VecX::Zero(n);
  s.t = 0;
  return s;
}

void adam_update(VecX &params, const VecX &grad, AdamState &state, Scalar lr,
                 const AdamConfig &cfg) {
  if (params.size() != grad.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_update: shape mismatch");
  state.t += 1;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
  state.v = cfg.beta2 * state.v.array().matrix() +
            (1.0 - cfg.beta2) * grad.array().square().matrix();
  const Scalar bc1 = 1.0 - std::pow(cfg.beta1, static_cast<Scalar>(state.t));
  const Scalar bc2 = 1.0 - std::pow(cfg.beta2, static_cast<Scalar>(state.t));
  params.array() -= lr * (state.m.array() / bc1) /
                    ((state.v.array() / bc2).sqrt() + cfg.eps);
}

} // namespace mfc
