#pragma once

// Small dense classifiers with exact reverse-mode gradients for both the
// parameters (training, SAM) and the inputs (PGD).

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace samrobust {

class CounterRng;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { relu, identity };

const char* to_string(Activation a);

/// One affine map: out = weights * in + bias. weights is (out_dim x in_dim).
struct DenseLayer {
  Matrix weights;
  Vector bias;

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }
};

/// Parameter-shaped values: model weights, gradients, momentum buffers.
using LayerStack = std::vector<DenseLayer>;

/// Feed-forward classifier. Hidden layer k applies activations[k]; the last
/// layer produces logits and has no activation. With a single layer the
/// model is a plain linear classifier.
struct ModelParams {
  LayerStack layers;
  std::vector<Activation> activations;  // size layers.size() - 1

  Eigen::Index input_dim() const;
  Eigen::Index num_classes() const;
  std::size_t parameter_count() const;

  /// Throws ConfigError naming the first offending layer.
  void validate() const;
};

/// Builds an MLP with the given widths (input, hidden..., classes). Weights
/// are He-uniform for relu layers and Glorot-uniform otherwise; biases zero.
ModelParams make_mlp(std::span<const int> widths, Activation hidden_activation,
                     CounterRng& rng);

struct Batch {
  Matrix inputs;            // n_samples x d_in
  std::vector<int> labels;  // class indices

  Eigen::Index size() const { return inputs.rows(); }

  /// Checks label range and n >= 1. Throws UsageError.
  void validate(Eigen::Index n_classes) const;
};

/// Everything backward() needs from a forward pass.
struct ForwardCache {
  std::vector<Matrix> pre_activations;  // z_k, one per layer
  std::vector<Matrix> activations;      // a_0 = inputs, a_k = act(z_k)
  std::uint64_t param_digest = 0;
};

struct ForwardPass {
  Matrix logits;  // n_samples x n_classes
  ForwardCache cache;
};

struct GradientBundle {
  LayerStack param_grads;
  Matrix input_grads;
  double loss = 0.0;
};

ForwardPass forward(const ModelParams& model, const Matrix& inputs);

/// Logits only; skips the cache.
Matrix predict_logits(const ModelParams& model, const Matrix& inputs);

/// Mean over samples of -log softmax(logits)[label], max-shifted.
double cross_entropy(const Matrix& logits, std::span<const int> labels);

/// Row-wise softmax with the max-shift.
Matrix softmax_rows(const Matrix& logits);

/// Exact gradients of the mean cross-entropy. Throws UsageError when the
/// model no longer matches the parameters the cache was built from.
GradientBundle backward(const ModelParams& model, const ForwardCache& cache,
                        std::span<const int> labels);

/// forward + backward.
GradientBundle loss_and_gradients(const ModelParams& model, const Batch& batch);

std::vector<int> predict_classes(const ModelParams& model, const Matrix& inputs);

/// FNV-1a over the raw parameter bytes.
std::uint64_t parameter_digest(const ModelParams& model);

// Parameter-space arithmetic used by the optimizers.
LayerStack zeros_like(const LayerStack& shape);
double squared_norm(const LayerStack& values);
/// y += scale * x
void axpy(double scale, const LayerStack& x, LayerStack& y);
bool same_shape(const LayerStack& a, const LayerStack& b);

}  // namespace samrobust
