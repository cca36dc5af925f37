#pragma once

#include <string_view>
#include <vector>

#include "sleepsynth/kernels.hpp"
#include "sleepsynth/matrix.hpp"

namespace sleepsynth {

enum class Activation { relu, tanh, sigmoid, identity };

std::string_view activation_name(Activation a);
Activation activation_from_name(std::string_view name);

/// One fully connected layer: y = act(x * W^T + b), weights stored
/// [out x in].
struct Layer {
  Matrix weights;
  std::vector<double> bias;
  Activation activation = Activation::identity;

  bool operator==(const Layer&) const = default;
};

struct DenseNet {
  std::vector<Layer> layers;

  int input_width() const { return layers.empty() ? 0 : layers.front().weights.cols; }
  int output_width() const { return layers.empty() ? 0 : layers.back().weights.rows; }

  bool operator==(const DenseNet&) const = default;
};

/// Build a net with Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out)))
/// and zero biases. widths has one entry per boundary (so layers =
/// widths.size() - 1); activations has one entry per layer.
DenseNet make_dense_net(const std::vector<int>& widths,
                        const std::vector<Activation>& activations, Rng& rng);

/// Per-layer intermediates kept by forward for the backward pass.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;   // pre-activation per layer
  std::vector<Matrix> post;  // post-activation per layer
};

/// batch is [n x input_width]; returns [n x output_width]. Pass a cache to
/// keep intermediates for backward.
Matrix forward(const DenseNet& net, const Matrix& batch, ForwardCache* cache = nullptr);

/// Parameter-shaped buffer; used for gradients and optimizer accumulators.
struct LayerTensors {
  Matrix w;
  std::vector<double> b;

  bool operator==(const LayerTensors&) const = default;
};

struct Gradients {
  std::vector<LayerTensors> layers;
  Matrix input;  // gradient w.r.t. the forward input batch
};

/// Exact reverse-mode gradients of the scalar loss whose gradient w.r.t.
/// the network output is upstream [n x output_width].
Gradients backward(const DenseNet& net, const ForwardCache& cache, const Matrix& upstream);

std::vector<LayerTensors> zeros_like(const DenseNet& net);

/// RMSProp: s <- rho*s + (1-rho)*g^2; theta <- theta - lr*g/(sqrt(s)+eps),
/// elementwise. acc must be shaped like the net (see zeros_like). Throws
/// NonFiniteGradient if any gradient entry is not finite.
void rmsprop_step(DenseNet& net, const Gradients& grads, std::vector<LayerTensors>& acc,
                  double rho, double lr, double eps);

}  // namespace sleepsynth
