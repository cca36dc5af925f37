#include "sleepsynth/net.hpp"

#include <cmath>

namespace sleepsynth {

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::identity: return "identity";
  }
  return "identity";
}

Activation activation_from_name(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "identity") return Activation::identity;
  throw Error(errc::config_error, "unknown activation '" + std::string(name) + "'");
}

DenseNet make_dense_net(const std::vector<int>& widths,
                        const std::vector<Activation>& activations, Rng& rng) {
  if (widths.size() < 2) throw Error(errc::config_error, "net needs at least one layer");
  if (activations.size() != widths.size() - 1)
    throw Error(errc::config_error, "one activation per layer required");
  DenseNet net;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int fan_in = widths[l];
    const int fan_out = widths[l + 1];
    if (fan_in < 1 || fan_out < 1) throw Error(errc::config_error, "layer width must be positive");
    Layer layer;
    layer.weights = Matrix(fan_out, fan_in);
    layer.bias.assign(static_cast<std::size_t>(fan_out), 0.0);
    layer.activation = activations[l];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& w : layer.weights.data) w = rng.uniform(-bound, bound);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

namespace {

inline double activate(Activation a, double x) {
  switch (a) {
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::tanh: return std::tanh(x);
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case Activation::identity: return x;
  }
  return x;
}

// Derivative in terms of pre-activation x and post-activation y.
inline double activate_grad(Activation a, double x, double y) {
  switch (a) {
    case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: return 1.0 - y * y;
    case Activation::sigmoid: return y * (1.0 - y);
    case Activation::identity: return 1.0;
  }
  return 1.0;
}

}  // namespace

Matrix forward(const DenseNet& net, const Matrix& batch, ForwardCache* cache) {
  if (net.layers.empty()) throw Error(errc::shape_mismatch, "forward: empty net");
  if (batch.cols != net.input_width())
    throw Error(errc::shape_mismatch, "forward: batch width " + std::to_string(batch.cols) +
                                          " != input width " + std::to_string(net.input_width()));
  if (cache) {
    cache->input = batch;
    cache->pre.clear();
    cache->post.clear();
  }
  Matrix x = batch;
  for (const Layer& layer : net.layers) {
    Matrix pre = kernels::matmul_tb(x, layer.weights);  // x * W^T
    for (int i = 0; i < pre.rows; ++i) {
      double* row = pre.row(i);
      for (int j = 0; j < pre.cols; ++j) row[j] += layer.bias[static_cast<std::size_t>(j)];
    }
    Matrix post = pre;
    for (double& v : post.data) v = activate(layer.activation, v);
    if (cache) {
      cache->pre.push_back(std::move(pre));
      cache->post.push_back(post);
    }
    x = std::move(post);
  }
  return x;
}

Gradients backward(const DenseNet& net, const ForwardCache& cache, const Matrix& upstream) {
  const std::size_t n_layers = net.layers.size();
  if (cache.pre.size() != n_layers || cache.post.size() != n_layers)
    throw Error(errc::shape_mismatch, "backward: cache does not match net");
  const Matrix& out = cache.post.back();
  if (upstream.rows != out.rows || upstream.cols != out.cols)
    throw Error(errc::shape_mismatch, "backward: upstream shape mismatch");

  Gradients grads;
  grads.layers.resize(n_layers);

  Matrix d_post = upstream;
  for (std::size_t li = n_layers; li-- > 0;) {
    const Layer& layer = net.layers[li];
    const Matrix& pre = cache.pre[li];
    const Matrix& post = cache.post[li];

    // d_pre = d_post (.) act'(pre)
    Matrix d_pre = d_post;
    for (std::size_t i = 0; i < d_pre.data.size(); ++i) {
      d_pre.data[i] *= activate_grad(layer.activation, pre.data[i], post.data[i]);
    }

    const Matrix& layer_input = li == 0 ? cache.input : cache.post[li - 1];
    LayerTensors& g = grads.layers[li];
    g.w = kernels::matmul_ta(d_pre, layer_input);  // d_pre^T * input, [out x in]
    g.b.assign(static_cast<std::size_t>(layer.weights.rows), 0.0);
    for (int i = 0; i < d_pre.rows; ++i) {
      const double* row = d_pre.row(i);
      for (int j = 0; j < d_pre.cols; ++j) g.b[static_cast<std::size_t>(j)] += row[j];
    }
    d_post = kernels::matmul(d_pre, layer.weights);  // [n x in]
  }
  grads.input = std::move(d_post);
  return grads;
}

std::vector<LayerTensors> zeros_like(const DenseNet& net) {
  std::vector<LayerTensors> out;
  out.reserve(net.layers.size());
  for (const Layer& layer : net.layers) {
    LayerTensors t;
    t.w = Matrix(layer.weights.rows, layer.weights.cols);
    t.b.assign(layer.bias.size(), 0.0);
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

void rmsprop_update(std::size_t count, double* theta, const double* g, double* s, double rho,
                    double lr, double eps) {
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::isfinite(g[i])) throw Error(errc::non_finite_gradient, "gradient entry not finite");
    s[i] = rho * s[i] + (1.0 - rho) * g[i] * g[i];
    theta[i] -= lr * g[i] / (std::sqrt(s[i]) + eps);
  }
}

}  // namespace

void rmsprop_step(DenseNet& net, const Gradients& grads, std::vector<LayerTensors>& acc,
                  double rho, double lr, double eps) {
  if (grads.layers.size() != net.layers.size() || acc.size() != net.layers.size())
    throw Error(errc::shape_mismatch, "rmsprop_step: layer count mismatch");
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Layer& layer = net.layers[l];
    const LayerTensors& g = grads.layers[l];
    LayerTensors& s = acc[l];
    if (g.w.rows != layer.weights.rows || g.w.cols != layer.weights.cols ||
        g.b.size() != layer.bias.size() || s.w.data.size() != layer.weights.data.size() ||
        s.b.size() != layer.bias.size())
      throw Error(errc::shape_mismatch, "rmsprop_step: tensor shape mismatch");
    rmsprop_update(layer.weights.data.size(), layer.weights.data.data(), g.w.data.data(),
                   s.w.data.data(), rho, lr, eps);
    rmsprop_update(layer.bias.size(), layer.bias.data(), g.b.data(), s.b.data(), rho, lr, eps);
  }
}

}  // namespace sleepsynth
