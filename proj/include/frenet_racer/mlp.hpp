#pragma once

#include <Eigen/Dense>
#include <vector>

#include "frenet_racer/rng.hpp"

namespace frenet_racer {

enum class Activation { Relu, Tanh, Linear };

// Fully-connected network.  Batches are stored column-wise (one sample per
// column) so a forward pass is one GEMM per layer.
struct Mlp {
  std::vector<int> sizes;               // [input, hidden..., output]
  std::vector<Eigen::MatrixXd> W;       // W[l] is sizes[l+1] x sizes[l]
  std::vector<Eigen::VectorXd> b;
  Activation output = Activation::Linear;  // hidden layers are always ReLU

  // Uniform fan-in initialization: each layer's weights and biases drawn from
  // U(-1/sqrt(fan_in), 1/sqrt(fan_in)); the final layer additionally scaled
  // by final_layer_scale.
  static Mlp create(const std::vector<int>& sizes, Activation output,
                    Rng& rng, double final_layer_scale = 1.0);

  int layer_count() const { return static_cast<int>(W.size()); }
  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }
  long parameter_count() const;

  Eigen::VectorXd forward(const Eigen::VectorXd& input) const;
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& input) const;
};

// Intermediate values of a forward pass needed by the backward pass.
struct MlpCache {
  std::vector<Eigen::MatrixXd> pre;   // pre-activations z_l, one per layer
  std::vector<Eigen::MatrixXd> post;  // post[0] = input, post[l+1] = a_{l+1}
};

// Gradient (or any per-parameter) container shaped like an Mlp.
struct MlpGrads {
  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::VectorXd> b;

  static MlpGrads zeros_like(const Mlp& net);
  void set_zero();
};

Eigen::MatrixXd forward_cached(const Mlp& net, const Eigen::MatrixXd& input,
                               MlpCache& cache);

// Reverse-mode gradients of sum(upstream .* output) w.r.t. parameters
// (accumulated into `grads`) and the input (returned).
Eigen::MatrixXd mlp_backward(const Mlp& net, const MlpCache& cache,
                             const Eigen::MatrixXd& upstream, MlpGrads& grads);

struct AdamState {
  long t = 0;
  MlpGrads m;
  MlpGrads v;

  static AdamState zeros_like(const Mlp& net);
};

void adam_step(Mlp& net, AdamState& state, const MlpGrads& grads, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

}  // namespace frenet_racer
