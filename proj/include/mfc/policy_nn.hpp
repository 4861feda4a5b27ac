#pragma once

#include <vector>

#include "mfc/meanfield.hpp"
#include "mfc/rng.hpp"
#include "mfc/types.hpp"

namespace mfc {

struct MlpSpec {
  int input = 1;
  std::vector<int> hidden;
  int output = 1;
};

// Fully-connected net with tanh hidden activations and a linear output,
// batched over columns. Gradients are exact reverse mode.
class Mlp {
public:
  std::vector<MatX> w; // w[l] maps layer l-1 to layer l
  std::vector<VecX> b;

  // Fan-in-scaled uniform init; the output layer is additionally scaled.
  static Mlp init(const MlpSpec &spec, rng::Stream &stream,
                  Scalar output_scale = 1.0);

  int layers() const { return static_cast<int>(w.size()); }
  int input_dim() const { return static_cast<int>(w.front().cols()); }
  int output_dim() const { return static_cast<int>(w.back().rows()); }
  long num_params() const;

  struct Cache {
    std::vector<MatX> act; // act[0] = input, act[l] = layer l output
  };

  MatX forward(const MatX &x, Cache *cache = nullptr) const;

  struct Grad {
    std::vector<MatX> w;
    std::vector<VecX> b;
  };
  Grad zero_grad() const;

  // d_out is dLoss/dOutput (output_dim x batch); accumulates into grad.
  // Requires the cache of the matching forward pass.
  void backward(const Cache &cache, const MatX &d_out, Grad &grad) const;
};

struct SquashSpec {
  Scalar theta_scale = 0.2;   // [-1,1] -> [-0.2, 0.2]
  Scalar sigma_scale = 0.125; // [-1,1] -> (0, 0.25]
  Scalar sigma_floor = 1e-3;
};

struct PolicyConfig {
  int obs_dim = 36;
  int action_dim = 144; // 4 per bin, or 4 in single-Gaussian mode, 2 in MARL
  std::vector<int> hidden = {256, 256};
  Scalar output_scale = 0.01;
  Scalar log_std_init = -1.0;
  Scalar log_std_min = -20.0;
  Scalar log_std_max = 2.0;
  SquashSpec squash;
};

// Diagonal-Gaussian policy with a state-independent log-std vector and a
// separate value network sharing the trunk architecture.
struct Policy {
  PolicyConfig cfg;
  Mlp pi;
  VecX log_std;
  Mlp value;

  MatX policy_mean(const MatX &obs, Mlp::Cache *cache = nullptr) const {
    return pi.forward(obs, cache);
  }
  VecX clamped_log_std() const {
    return log_std.cwiseMax(cfg.log_std_min).cwiseMin(cfg.log_std_max);
  }
  VecX value_of(const MatX &obs, Mlp::Cache *cache = nullptr) const {
    return value.forward(obs, cache).transpose();
  }
};

Policy init_policy(const PolicyConfig &cfg, rng::Key key);

struct ActionSample {
  VecX raw;     // pre-clip Gaussian sample (log_prob refers to this)
  VecX clipped; // clipped to [-1,1]^A, consumed by the squash
  Scalar log_prob = 0.0;
};

ActionSample sample_action(const VecX &mean, const VecX &log_std,
                           rng::Stream &stream);

Scalar gaussian_log_prob(const VecX &a, const VecX &mean, const VecX &log_std);

VecX clip_unit(VecX raw);

// Affine map from clipped samples to decision-rule parameters. action_dim 4
// broadcasts one Gaussian to every bin; 4M assigns per-bin parameters.
MeanFieldAction squash_to_mfc(const VecX &clipped, const SquashSpec &squash,
                              int total_bins);

// Flat parameter vector in a fixed order (policy layers, log-std, value
// layers); optimizer and checkpoints operate on this representation.
long policy_num_params(const Policy &p);
VecX flatten_params(const Policy &p);
void unflatten_params(const VecX &flat, Policy &p);

struct PolicyGrad {
  Mlp::Grad pi;
  VecX log_std;
  Mlp::Grad value;
};
PolicyGrad zero_policy_grad(const Policy &p);
VecX flatten_grad(const Policy &p, const PolicyGrad &g);

struct AdamConfig {
  Scalar beta1 = 0.9;
  Scalar beta2 = 0.999;
  Scalar eps = 1e-8;
};

struct AdamState {
  VecX m, v;
  long t = 0;
};

AdamState make_adam_state(long n);

// Bias-corrected first/second-moment update, in place.
void adam_update(VecX &params, const VecX &grad, AdamState &state, Scalar lr,
                 const AdamConfig &cfg = {});

} // namespace mfc
