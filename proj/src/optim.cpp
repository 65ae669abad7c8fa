#include "samrobust/optim.hpp"

#include <cmath>
#include <string>

#include "samrobust/error.hpp"

namespace samrobust {

void SgdConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw UsageError("sgd: lr must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw UsageError("sgd: momentum must be in [0, 1)");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw UsageError("sgd: weight_decay must be >= 0");
  }
}

void SamConfig::validate() const {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw UsageError("sam: rho must be >= 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw UsageError("sam: lambda must be >= 0");
}

void LrSchedule::validate() const {
  if (!(base_lr > 0.0)) throw ConfigError("schedule: base_lr must be > 0");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) {
    throw ConfigError("schedule: decay_factor must be in (0, 1]");
  }
  for (std::size_t i = 0; i < milestones.size(); ++i) {
    if (milestones[i] < 0) throw ConfigError("schedule: milestones must be >= 0");
    if (i > 0 && milestones[i] <= milestones[i - 1]) {
      throw ConfigError("schedule: milestones must be strictly increasing");
    }
  }
}

void sgd_step(ModelParams& model, const LayerStack& grads, SgdState& state, const SgdConfig& cfg) {
  cfg.validate();
  if (!same_shape(model.layers, grads)) throw UsageError("sgd_step: gradient shape mismatch");
  if (state.velocity.empty()) state.velocity = zeros_like(model.layers);
  if (!same_shape(model.layers, state.velocity)) {
    throw UsageError("sgd_step: momentum buffer shape mismatch");
  }
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    auto& w = model.layers[k];
    auto& v = state.velocity[k];
    v.weights = cfg.momentum * v.weights + grads[k].weights + cfg.weight_decay * w.weights;
    v.bias = cfg.momentum * v.bias + grads[k].bias + cfg.weight_decay * w.bias;
    w.weights -= cfg.lr * v.weights;
    w.bias -= cfg.lr * v.bias;
  }
}

LayerStack sam_perturbation(const LayerStack& grads, double rho) {
  LayerStack eps = zeros_like(grads);
  const double norm = std::sqrt(squared_norm(grads));
  if (rho > 0.0 && norm > 0.0) axpy(rho / norm, grads, eps);
  return eps;
}

SamStepStats sam_update(ModelParams& model, const GradientFn& loss_grad, const SamConfig& sam,
                        const SgdConfig& base, SgdState& state) {
  sam.validate();
  base.validate();
  SamStepStats stats;

  LossGrad first = loss_grad(model);
  stats.loss = first.loss;
  const double g_norm = std::sqrt(squared_norm(first.grads));

  LossGrad second;
  if (sam.rho > 0.0 && g_norm > 0.0) {
    const LayerStack saved = model.layers;
    axpy(sam.rho / g_norm, first.grads, model.layers);
    stats.perturbation_norm = sam.rho;
    second = loss_grad(model);
    model.layers = saved;
  } else {
    // Zero radius: the second pass is evaluated at w itself.
    second = loss_grad(model);
  }
  stats.perturbed_loss = second.loss;

  if (sam.lambda > 0.0) axpy(2.0 * sam.lambda, model.layers, second.grads);
  sgd_step(model, second.grads, state, base);
  return stats;
}

SamStepStats sam_step(ModelParams& model, const Batch& batch, const SamConfig& sam,
                      const SgdConfig& base, SgdState& state) {
  auto fn = [&batch](const ModelParams& m) {
    GradientBundle g = loss_and_gradients(m, batch);
    return LossGrad{g.loss, std::move(g.param_grads)};
  };
  return sam_update(model, fn, sam, base, state);
}

double lr_at(const LrSchedule& schedule, int epoch) {
  double lr = schedule.base_lr;
  for (int m : schedule.milestones) {
    if (m <= epoch) lr *= schedule.decay_factor;
  }
  return lr;
}

}  // namespace samrobust
