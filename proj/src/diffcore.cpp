#include "samrobust/diffcore.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "samrobust/error.hpp"
#include "samrobust/rng.hpp"

namespace samrobust {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::relu:
      return "relu";
    case Activation::identity:
      return "identity";
  }
  return "?";
}

Eigen::Index ModelParams::input_dim() const {
  return layers.empty() ? 0 : layers.front().in_dim();
}

Eigen::Index ModelParams::num_classes() const {
  return layers.empty() ? 0 : layers.back().out_dim();
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

void ModelParams::validate() const {
  if (layers.empty()) throw ConfigError("model has no layers");
  if (activations.size() + 1 != layers.size()) {
    throw ConfigError("model has " + std::to_string(layers.size()) + " layers but " +
                      std::to_string(activations.size()) +
                      " hidden activations (expected layers - 1)");
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    if (l.bias.size() != l.out_dim()) {
      throw ConfigError("layer " + std::to_string(k) + ": bias has " +
                        std::to_string(l.bias.size()) + " entries, weights have " +
                        std::to_string(l.out_dim()) + " rows");
    }
    if (k > 0 && layers[k - 1].out_dim() != l.in_dim()) {
      throw ConfigError("layer " + std::to_string(k) + ": input dim " +
                        std::to_string(l.in_dim()) + " does not match layer " +
                        std::to_string(k - 1) + " output dim " +
                        std::to_string(layers[k - 1].out_dim()));
    }
    if (!l.weights.allFinite() || !l.bias.allFinite()) {
      throw ConfigError("layer " + std::to_string(k) + " has non-finite parameters");
    }
  }
}

ModelParams make_mlp(std::span<const int> widths, Activation hidden_activation,
                     CounterRng& rng) {
  if (widths.size() < 2) throw ConfigError("an MLP needs at least input and output widths");
  ModelParams model;
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    const int in = widths[k];
    const int out = widths[k + 1];
    if (in < 1 || out < 1) {
      throw ConfigError("layer " + std::to_string(k) + " has a non-positive width");
    }
    const bool followed_by_relu =
        k + 2 < widths.size() && hidden_activation == Activation::relu;
    const double bound = followed_by_relu ? std::sqrt(6.0 / in) : std::sqrt(6.0 / (in + out));
    DenseLayer layer{Matrix(out, in), Vector::Zero(out)};
    for (Eigen::Index i = 0; i < out; ++i)
      for (Eigen::Index j = 0; j < in; ++j) layer.weights(i, j) = rng.uniform(-bound, bound);
    model.layers.push_back(std::move(layer));
    if (k + 2 < widths.size()) model.activations.push_back(hidden_activation);
  }
  return model;
}

void Batch::validate(Eigen::Index n_classes) const {
  if (inputs.rows() < 1) throw UsageError("batch is empty");
  if (static_cast<Eigen::Index>(labels.size()) != inputs.rows()) {
    throw UsageError("batch has " + std::to_string(inputs.rows()) + " inputs but " +
                     std::to_string(labels.size()) + " labels");
  }
  for (int y : labels) {
    if (y < 0 || y >= n_classes) {
      throw UsageError("label " + std::to_string(y) + " outside [0, " +
                       std::to_string(n_classes) + ")");
    }
  }
}

namespace {

void check_input_dim(const ModelParams& model, const Matrix& inputs) {
  if (model.layers.empty()) throw ConfigError("model has no layers");
  if (model.activations.size() + 1 != model.layers.size()) {
    throw ConfigError("model has " + std::to_string(model.layers.size()) + " layers but " +
                      std::to_string(model.activations.size()) + " hidden activations");
  }
  if (inputs.cols() != model.input_dim()) {
    throw ConfigError("layer 0: expects input dim " + std::to_string(model.input_dim()) +
                      ", batch has " + std::to_string(inputs.cols()) + " columns");
  }
}

Matrix affine(const DenseLayer& layer, const Matrix& in) {
  Matrix z = in * layer.weights.transpose();
  z.rowwise() += layer.bias.transpose();
  return z;
}

Matrix activate(Activation act, const Matrix& z) {
  if (act == Activation::relu) return z.cwiseMax(0.0);
  return z;
}

void check_labels(std::span<const int> labels, Eigen::Index rows, Eigen::Index classes) {
  if (static_cast<Eigen::Index>(labels.size()) != rows) {
    throw UsageError("have " + std::to_string(rows) + " logit rows but " +
                     std::to_string(labels.size()) + " labels");
  }
  for (int y : labels) {
    if (y < 0 || y >= classes) {
      throw UsageError("label " + std::to_string(y) + " outside [0, " +
                       std::to_string(classes) + ")");
    }
  }
}

}  // namespace

ForwardPass forward(const ModelParams& model, const Matrix& inputs) {
  check_input_dim(model, inputs);
  ForwardPass pass;
  auto& cache = pass.cache;
  cache.activations.reserve(model.layers.size() + 1);
  cache.pre_activations.reserve(model.layers.size());
  cache.activations.push_back(inputs);
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    const auto& layer = model.layers[k];
    if (layer.in_dim() != cache.activations.back().cols()) {
      throw ConfigError("layer " + std::to_string(k) + ": input dim " +
                        std::to_string(layer.in_dim()) + " does not match incoming width " +
                        std::to_string(cache.activations.back().cols()));
    }
    cache.pre_activations.push_back(affine(layer, cache.activations.back()));
    if (k + 1 < model.layers.size()) {
      cache.activations.push_back(activate(model.activations.at(k), cache.pre_activations.back()));
    }
  }
  pass.logits = cache.pre_activations.back();
  cache.param_digest = parameter_digest(model);
  return pass;
}

Matrix predict_logits(const ModelParams& model, const Matrix& inputs) {
  check_input_dim(model, inputs);
  Matrix a = inputs;
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    Matrix z = affine(model.layers[k], a);
    a = (k + 1 < model.layers.size()) ? activate(model.activations.at(k), z) : std::move(z);
  }
  return a;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - m).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

double cross_entropy(const Matrix& logits, std::span<const int> labels) {
  if (!logits.allFinite()) throw NumericError("cross_entropy: non-finite logits");
  check_labels(labels, logits.rows(), logits.cols());
  if (logits.rows() == 0) throw UsageError("cross_entropy: no samples");
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    total += lse - logits(i, labels[static_cast<std::size_t>(i)]);
  }
  return total / static_cast<double>(logits.rows());
}

GradientBundle backward(const ModelParams& model, const ForwardCache& cache,
                        std::span<const int> labels) {
  if (cache.pre_activations.size() != model.layers.size() ||
      cache.param_digest != parameter_digest(model)) {
    throw UsageError("backward: forward cache is stale (model changed since forward)");
  }
  const Matrix& logits = cache.pre_activations.back();
  GradientBundle out;
  out.loss = cross_entropy(logits, labels);

  const auto n = static_cast<double>(logits.rows());
  Matrix delta = softmax_rows(logits);
  for (Eigen::Index i = 0; i < delta.rows(); ++i) delta(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
  delta /= n;

  out.param_grads.resize(model.layers.size());
  for (std::size_t k = model.layers.size(); k-- > 0;) {
    const Matrix& a_prev = cache.activations[k];
    out.param_grads[k].weights = delta.transpose() * a_prev;
    out.param_grads[k].bias = delta.colwise().sum().transpose();
    Matrix upstream = delta * model.layers[k].weights;
    if (k == 0) {
      out.input_grads = std::move(upstream);
    } else if (model.activations[k - 1] == Activation::relu) {
      delta = (cache.pre_activations[k - 1].array() > 0.0).select(upstream, 0.0);
    } else {
      delta = std::move(upstream);
    }
  }
  return out;
}

GradientBundle loss_and_gradients(const ModelParams& model, const Batch& batch) {
  auto pass = forward(model, batch.inputs);
  return backward(model, pass.cache, batch.labels);
}

std::vector<int> predict_classes(const ModelParams& model, const Matrix& inputs) {
  const Matrix logits = predict_logits(model, inputs);
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    logits.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

std::uint64_t parameter_digest(const ModelParams& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const double* data, Eigen::Index count) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < static_cast<std::size_t>(count) * sizeof(double); ++i) {
      h = (h ^ bytes[i]) * 0x100000001b3ULL;
    }
  };
  for (const auto& l : model.layers) {
    feed(l.weights.data(), l.weights.size());
    feed(l.bias.data(), l.bias.size());
  }
  return h;
}

LayerStack zeros_like(const LayerStack& shape) {
  LayerStack out;
  out.reserve(shape.size());
  for (const auto& l : shape) {
    out.push_back({Matrix::Zero(l.weights.rows(), l.weights.cols()), Vector::Zero(l.bias.size())});
  }
  return out;
}

double squared_norm(const LayerStack& values) {
  double s = 0.0;
  for (const auto& l : values) s += l.weights.squaredNorm() + l.bias.squaredNorm();
  return s;
}

void axpy(double scale, const LayerStack& x, LayerStack& y) {
  for (std::size_t k = 0; k < y.size(); ++k) {
    y[k].weights += scale * x[k].weights;
    y[k].bias += scale * x[k].bias;
  }
}

bool same_shape(const LayerStack& a, const LayerStack& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].weights.rows() != b[k].weights.rows() || a[k].weights.cols() != b[k].weights.cols() ||
        a[k].bias.size() != b[k].bias.size()) {
      return false;
    }
  }
  return true;
}

}  // namespace samrobust
