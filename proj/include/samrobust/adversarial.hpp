#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "samrobust/diffcore.hpp"
#include "samrobust/optim.hpp"

namespace samrobust {

struct Dataset;

enum class Norm { linf, l2 };

const char* to_string(Norm n);

struct ClipDomain {
  double lo = 0.0;
  double hi = 1.0;
};

struct AttackConfig {
  Norm norm = Norm::linf;
  double epsilon = 0.0;
  double alpha = 0.0;
  int steps = 0;
  bool random_start = false;
  std::optional<ClipDomain> clip_domain;
  /// Number of leading input columns the attack never touches. 1 mimics the
  /// theory model, where the robust feature x1 is left alone.
  int frozen_prefix = 0;

  /// PGD with the default step size alpha = 2.5 * epsilon / steps.
  static AttackConfig pgd(Norm norm, double epsilon, int steps = 10);

  void validate() const;
};

/// Closest point of B(x, epsilon) (intersected with the clip domain) to x_adv,
/// written back into x_adv. Coordinates inside an unchanged ball are left
/// bit-identical.
void project(std::span<double> x_adv, std::span<const double> x, Norm norm, double epsilon,
             const std::optional<ClipDomain>& clip = std::nullopt, int frozen_prefix = 0);

/// Iterated signed (linf) or l2-normalised (l2) gradient ascent on the
/// cross-entropy, projected after every step. Row i draws its random start
/// from a stream keyed by (seed, row_offset + i), so splitting a dataset into
/// chunks does not change any sample's attack.
Matrix pgd_attack(const ModelParams& model, const Batch& batch, const AttackConfig& cfg,
                  std::uint64_t seed, std::size_t row_offset = 0);

/// Loss of the model on each row, unreduced.
std::vector<double> per_sample_loss(const ModelParams& model, const Matrix& inputs,
                                    std::span<const int> labels);

struct EpochStats {
  double mean_loss = 0.0;  // mean training loss over batches (adversarial for AT)
  std::size_t steps = 0;
  std::size_t grad_evals = 0;
};

/// One epoch of standard training: one backward pass and one sgd_step per batch.
EpochStats train_epoch(ModelParams& model, const Dataset& data, int batch_size,
                       const SgdConfig& opt, SgdState& state, std::uint64_t shuffle_seed);

/// One epoch of SAM training.
EpochStats sam_train_epoch(ModelParams& model, const Dataset& data, int batch_size,
                           const SamConfig& sam, const SgdConfig& opt, SgdState& state,
                           std::uint64_t shuffle_seed);

/// One epoch of adversarial training: per batch, PGD against the current
/// model, then one sgd_step on the adversarial batch. With attack.steps == 0
/// this is exactly train_epoch.
EpochStats adv_train_epoch(ModelParams& model, const Dataset& data, int batch_size,
                           const AttackConfig& attack, const SgdConfig& opt, SgdState& state,
                           std::uint64_t shuffle_seed, std::uint64_t attack_seed);

struct RobustEntry {
  Norm norm = Norm::linf;
  double epsilon = 0.0;
  double robust_accuracy = 0.0;
};

struct RobustReport {
  double natural_accuracy = 0.0;
  std::vector<RobustEntry> robust;  // in the order the attacks were given
  std::size_t n_samples = 0;
};

/// Natural accuracy plus one robust accuracy per attack. A sample counts as
/// robust when the model is correct both at the clean input and at the
/// attack's output.
RobustReport evaluate(const ModelParams& model, const Dataset& data,
                      std::span<const AttackConfig> attacks, std::uint64_t seed);

}  // namespace samrobust
