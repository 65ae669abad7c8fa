#pragma once

#include <functional>
#include <vector>

#include "samrobust/diffcore.hpp"

namespace samrobust {

struct SgdConfig {
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;

  /// Step-time check. lr = 0 is accepted here (it is a legal no-op step);
  /// configuration parsing insists on lr > 0.
  void validate() const;
};

struct SamConfig {
  double rho = 0.05;    // weight-perturbation radius (global l2)
  double lambda = 0.0;  // explicit ||w||^2 penalty weight

  void validate() const;
};

struct LrSchedule {
  double base_lr = 0.1;
  std::vector<int> milestones;  // strictly increasing epoch indices
  double decay_factor = 0.1;

  void validate() const;
};

/// Momentum buffers. Empty until the first step.
struct SgdState {
  LayerStack velocity;
};

/// v <- momentum * v + (g + weight_decay * w);  w <- w - lr * v
void sgd_step(ModelParams& model, const LayerStack& grads, SgdState& state, const SgdConfig& cfg);

/// Loss and parameter gradients at the current model.
struct LossGrad {
  double loss = 0.0;
  LayerStack grads;
};
using GradientFn = std::function<LossGrad(const ModelParams&)>;

struct SamStepStats {
  double loss = 0.0;            // at the unperturbed weights
  double perturbed_loss = 0.0;  // at w + eps_hat
  double perturbation_norm = 0.0;
  int grad_evals = 2;
};

/// Two-pass sharpness-aware update against an arbitrary differentiable loss:
///   g1 = grad L(w); eps_hat = rho * g1 / ||g1||_2 (global norm, 0 if g1 = 0)
///   g2 = grad L(w + eps_hat); restore w; sgd_step with g2 + 2 * lambda * w.
/// Momentum buffers are never perturbed.
SamStepStats sam_update(ModelParams& model, const GradientFn& loss_grad, const SamConfig& sam,
                        const SgdConfig& base, SgdState& state);

/// sam_update with the mean cross-entropy of the batch.
SamStepStats sam_step(ModelParams& model, const Batch& batch, const SamConfig& sam,
                      const SgdConfig& base, SgdState& state);

/// The SAM ascent direction rho * g / ||g||_2; zero when g is zero.
LayerStack sam_perturbation(const LayerStack& grads, double rho);

/// base_lr * decay_factor^(number of milestones <= epoch)
double lr_at(const LrSchedule& schedule, int epoch);

}  // namespace samrobust
