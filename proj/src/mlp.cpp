#include "frenet_racer/mlp.hpp"

#include <cmath>

#include "frenet_racer/errors.hpp"

namespace frenet_racer {

namespace {

void apply_activation(Activation act, Eigen::MatrixXd& z) {
  switch (act) {
    case Activation::Relu:
      z = z.cwiseMax(0.0);
      break;
    case Activation::Tanh:
      z = z.array().tanh().matrix();
      break;
    case Activation::Linear:
      break;
  }
}

// dLoss/dz given dLoss/da, using pre-activation z and activation a.
void chain_activation(Activation act, const Eigen::MatrixXd& z,
                      const Eigen::MatrixXd& a, Eigen::MatrixXd& g) {
  switch (act) {
    case Activation::Relu:
      g = (z.array() > 0.0).select(g, 0.0);
      break;
    case Activation::Tanh:
      g.array() *= 1.0 - a.array().square();
      break;
    case Activation::Linear:
      break;
  }
}

}  // namespace

Mlp Mlp::create(const std::vector<int>& sizes, Activation output, Rng& rng,
                double final_layer_scale) {
  if (sizes.size() < 2) {
    throw ValidationError("an MLP needs at least input and output layers");
  }
  for (int s : sizes) {
    if (s < 1) throw ValidationError("layer sizes must be >= 1");
  }
  Mlp net;
  net.sizes = sizes;
  net.output = output;
  const int layers = static_cast<int>(sizes.size()) - 1;
  net.W.resize(layers);
  net.b.resize(layers);
  for (int l = 0; l < layers; ++l) {
    const int rows = sizes[l + 1];
    const int cols = sizes[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    const double scale = (l == layers - 1) ? final_layer_scale : 1.0;
    net.W[l].resize(rows, cols);
    for (int j = 0; j < cols; ++j) {
      for (int i = 0; i < rows; ++i) {
        net.W[l](i, j) = scale * rng.uniform(-bound, bound);
      }
    }
    net.b[l].resize(rows);
    for (int i = 0; i < rows; ++i) {
      net.b[l](i) = scale * rng.uniform(-bound, bound);
    }
  }
  return net;
}

long Mlp::parameter_count() const {
  long n = 0;
  for (int l = 0; l < layer_count(); ++l) n += W[l].size() + b[l].size();
  return n;
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& input) const {
  if (input.rows() != input_dim()) {
    throw ValidationError("mlp forward: input has " +
                          std::to_string(input.rows()) + " rows, expected " +
                          std::to_string(input_dim()));
  }
  Eigen::MatrixXd a = input;
  for (int l = 0; l < layer_count(); ++l) {
    Eigen::MatrixXd z = (W[l] * a).colwise() + b[l];
    apply_activation(l == layer_count() - 1 ? output : Activation::Relu, z);
    a = std::move(z);
  }
  return a;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& input) const {
  return forward_batch(input);
}

MlpGrads MlpGrads::zeros_like(const Mlp& net) {
  MlpGrads g;
  g.W.resize(net.layer_count());
  g.b.resize(net.layer_count());
  for (int l = 0; l < net.layer_count(); ++l) {
    g.W[l] = Eigen::MatrixXd::Zero(net.W[l].rows(), net.W[l].cols());
    g.b[l] = Eigen::VectorXd::Zero(net.b[l].size());
  }
  return g;
}

void MlpGrads::set_zero() {
  for (auto& w : W) w.setZero();
  for (auto& v : b) v.setZero();
}

Eigen::MatrixXd forward_cached(const Mlp& net, const Eigen::MatrixXd& input,
                               MlpCache& cache) {
  if (input.rows() != net.input_dim()) {
    throw ValidationError("mlp forward: input row mismatch");
  }
  const int layers = net.layer_count();
  cache.pre.resize(layers);
  cache.post.resize(layers + 1);
  cache.post[0] = input;
  for (int l = 0; l < layers; ++l) {
    cache.pre[l] = (net.W[l] * cache.post[l]).colwise() + net.b[l];
    cache.post[l + 1] = cache.pre[l];
    apply_activation(l == layers - 1 ? net.output : Activation::Relu,
                     cache.post[l + 1]);
  }
  return cache.post[layers];
}

Eigen::MatrixXd mlp_backward(const Mlp& net, const MlpCache& cache,
                             const Eigen::MatrixXd& upstream,
                             MlpGrads& grads) {
  const int layers = net.layer_count();
  if (upstream.rows() != net.output_dim() ||
      upstream.cols() != cache.post[0].cols()) {
    throw ValidationError("mlp backward: upstream gradient shape mismatch");
  }
  Eigen::MatrixXd g = upstream;
  for (int l = layers - 1; l >= 0; --l) {
    chain_activation(l == layers - 1 ? net.output : Activation::Relu,
                     cache.pre[l], cache.post[l + 1], g);
    grads.W[l].noalias() += g * cache.post[l].transpose();
    grads.b[l].noalias() += g.rowwise().sum();
    if (l > 0) {
      g = net.W[l].transpose() * g;
    } else {
      return net.W[0].transpose() * g;
    }
  }
  return {};  // unreachable
}

AdamState AdamState::zeros_like(const Mlp& net) {
  AdamState s;
  s.m = MlpGrads::zeros_like(net);
  s.v = MlpGrads::zeros_like(net);
  return s;
}

void adam_step(Mlp& net, AdamState& state, const MlpGrads& grads, double lr,
               double beta1, double beta2, double eps) {
  state.t += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  const auto update = [&](Eigen::Ref<Eigen::MatrixXd> p,
                          Eigen::Ref<Eigen::MatrixXd> m,
                          Eigen::Ref<Eigen::MatrixXd> v,
                          const Eigen::Ref<const Eigen::MatrixXd>& g) {
    m.array() = beta1 * m.array() + (1.0 - beta1) * g.array();
    v.array() = beta2 * v.array() + (1.0 - beta2) * g.array().square();
    p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
  };
  for (int l = 0; l < net.layer_count(); ++l) {
    update(net.W[l], state.m.W[l], state.v.W[l], grads.W[l]);
    update(net.b[l], state.m.b[l], state.v.b[l], grads.b[l]);
  }
}

}  // namespace frenet_racer
