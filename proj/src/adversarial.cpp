#include "samrobust/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "samrobust/datagen.hpp"
#include "samrobust/error.hpp"
#include "samrobust/rng.hpp"

namespace samrobust {

const char* to_string(Norm n) { return n == Norm::linf ? "linf" : "l2"; }

AttackConfig AttackConfig::pgd(Norm norm, double epsilon, int steps) {
  AttackConfig cfg;
  cfg.norm = norm;
  cfg.epsilon = epsilon;
  cfg.steps = steps;
  cfg.alpha = steps > 0 ? 2.5 * epsilon / steps : 0.0;
  return cfg;
}

void AttackConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ConfigError("attack: epsilon must be >= 0");
  if (steps < 0) throw ConfigError("attack: steps must be >= 0");
  if (steps > 0 && epsilon > 0.0 && !(alpha > 0.0)) {
    throw ConfigError("attack: alpha must be > 0 when steps > 0");
  }
  if (frozen_prefix < 0) throw ConfigError("attack: frozen_prefix must be >= 0");
  if (clip_domain && !(clip_domain->lo <= clip_domain->hi)) {
    throw ConfigError("attack: clip domain needs lo <= hi");
  }
}

namespace {

// Works on anything indexable with [] (spans, Eigen row blocks).
template <class Adv, class Clean>
void project_into_ball(Adv&& x_adv, const Clean& x, Eigen::Index n, Norm norm, double epsilon,
                       const std::optional<ClipDomain>& clip, Eigen::Index frozen) {
  for (Eigen::Index j = 0; j < std::min(frozen, n); ++j) x_adv[j] = x[j];
  if (norm == Norm::linf) {
    for (Eigen::Index j = frozen; j < n; ++j) {
      const double delta = x_adv[j] - x[j];
      if (delta > epsilon) {
        x_adv[j] = x[j] + epsilon;
      } else if (delta < -epsilon) {
        x_adv[j] = x[j] - epsilon;
      }
    }
  } else {
    double sq = 0.0;
    for (Eigen::Index j = frozen; j < n; ++j) sq += (x_adv[j] - x[j]) * (x_adv[j] - x[j]);
    const double len = std::sqrt(sq);
    if (len > epsilon) {
      const double scale = epsilon / len;
      for (Eigen::Index j = frozen; j < n; ++j) x_adv[j] = x[j] + (x_adv[j] - x[j]) * scale;
    }
  }
  if (clip) {
    for (Eigen::Index j = frozen; j < n; ++j) x_adv[j] = std::clamp(x_adv[j], clip->lo, clip->hi);
  }
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void random_start(RowMatrix& x_adv, const Matrix& x, const AttackConfig& cfg, std::uint64_t seed,
                  std::size_t row_offset) {
  const Eigen::Index n = x.cols();
  const Eigen::Index frozen = std::min<Eigen::Index>(cfg.frozen_prefix, n);
  const Eigen::Index free = n - frozen;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    CounterRng rng(seed, row_offset + static_cast<std::size_t>(i));
    if (cfg.norm == Norm::linf) {
      for (Eigen::Index j = frozen; j < n; ++j) {
        x_adv(i, j) = x(i, j) + rng.uniform(-cfg.epsilon, cfg.epsilon);
      }
    } else if (free > 0) {
      Vector dir(free);
      for (Eigen::Index j = 0; j < free; ++j) dir(j) = rng.normal();
      const double radius = cfg.epsilon * std::pow(rng.uniform(), 1.0 / static_cast<double>(free));
      dir *= radius / dir.norm();
      for (Eigen::Index j = 0; j < free; ++j) x_adv(i, frozen + j) = x(i, frozen + j) + dir(j);
    }
    auto row = x_adv.row(i);
    const auto clean = x.row(i);
    project_into_ball(row, clean, n, cfg.norm, cfg.epsilon, cfg.clip_domain, frozen);
  }
}

std::size_t count_correct(const std::vector<int>& pred, std::span<const int> labels) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) c += pred[i] == labels[i];
  return c;
}

}  // namespace

void project(std::span<double> x_adv, std::span<const double> x, Norm norm, double epsilon,
             const std::optional<ClipDomain>& clip, int frozen_prefix) {
  if (x_adv.size() != x.size()) throw UsageError("project: shape mismatch");
  project_into_ball(x_adv, x, static_cast<Eigen::Index>(x.size()), norm, epsilon, clip,
                    frozen_prefix);
}

Matrix pgd_attack(const ModelParams& model, const Batch& batch, const AttackConfig& cfg,
                  std::uint64_t seed, std::size_t row_offset) {
  cfg.validate();
  if (batch.inputs.cols() != model.input_dim()) {
    throw ConfigError("pgd_attack: batch has " + std::to_string(batch.inputs.cols()) +
                      " columns, model expects " + std::to_string(model.input_dim()));
  }
  if (cfg.epsilon == 0.0 || (cfg.steps == 0 && !cfg.random_start)) return batch.inputs;

  const Matrix& x = batch.inputs;
  const Eigen::Index n = x.cols();
  const Eigen::Index frozen = std::min<Eigen::Index>(cfg.frozen_prefix, n);
  RowMatrix x_adv = x;
  if (cfg.random_start) random_start(x_adv, x, cfg, seed, row_offset);

  Batch current{Matrix(), batch.labels};
  for (int t = 0; t < cfg.steps; ++t) {
    current.inputs = x_adv;
    const Matrix g = loss_and_gradients(model, current).input_grads;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (cfg.norm == Norm::linf) {
        for (Eigen::Index j = frozen; j < n; ++j) {
          const double gij = g(i, j);
          if (gij > 0.0) {
            x_adv(i, j) += cfg.alpha;
          } else if (gij < 0.0) {
            x_adv(i, j) -= cfg.alpha;
          }
        }
      } else {
        const double len = g.row(i).tail(n - frozen).norm();
        if (len > 0.0) {
          for (Eigen::Index j = frozen; j < n; ++j) x_adv(i, j) += cfg.alpha * g(i, j) / len;
        }
      }
      auto row = x_adv.row(i);
      const auto clean = x.row(i);
      project_into_ball(row, clean, n, cfg.norm, cfg.epsilon, cfg.clip_domain, frozen);
    }
  }
  return x_adv;
}

std::vector<double> per_sample_loss(const ModelParams& model, const Matrix& inputs,
                                    std::span<const int> labels) {
  const Matrix logits = predict_logits(model, inputs);
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows()) {
    throw UsageError("per_sample_loss: label count mismatch");
  }
  std::vector<double> out(labels.size());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    out[static_cast<std::size_t>(i)] = lse - logits(i, labels[static_cast<std::size_t>(i)]);
  }
  return out;
}

EpochStats train_epoch(ModelParams& model, const Dataset& data, int batch_size,
                       const SgdConfig& opt, SgdState& state, std::uint64_t shuffle_seed) {
  EpochStats stats;
  double total = 0.0;
  for (const Batch& b : batches(data, batch_size, shuffle_seed)) {
    GradientBundle g = loss_and_gradients(model, b);
    sgd_step(model, g.param_grads, state, opt);
    total += g.loss;
    ++stats.steps;
    stats.grad_evals += 1;
  }
  stats.mean_loss = stats.steps ? total / static_cast<double>(stats.steps) : 0.0;
  return stats;
}

EpochStats sam_train_epoch(ModelParams& model, const Dataset& data, int batch_size,
                           const SamConfig& sam, const SgdConfig& opt, SgdState& state,
                           std::uint64_t shuffle_seed) {
  EpochStats stats;
  double total = 0.0;
  for (const Batch& b : batches(data, batch_size, shuffle_seed)) {
    const SamStepStats s = sam_step(model, b, sam, opt, state);
    total += s.loss;
    ++stats.steps;
    stats.grad_evals += static_cast<std::size_t>(s.grad_evals);
  }
  stats.mean_loss = stats.steps ? total / static_cast<double>(stats.steps) : 0.0;
  return stats;
}

EpochStats adv_train_epoch(ModelParams& model, const Dataset& data, int batch_size,
                           const AttackConfig& attack, const SgdConfig& opt, SgdState& state,
                           std::uint64_t shuffle_seed, std::uint64_t attack_seed) {
  attack.validate();
  EpochStats stats;
  double total = 0.0;
  std::uint64_t batch_index = 0;
  for (Batch& b : batches(data, batch_size, shuffle_seed)) {
    if (attack.steps > 0 || attack.random_start) {
      b.inputs = pgd_attack(model, b, attack, derive_seed(attack_seed, batch_index));
    }
    GradientBundle g = loss_and_gradients(model, b);
    sgd_step(model, g.param_grads, state, opt);
    total += g.loss;
    ++stats.steps;
    ++batch_index;
    stats.grad_evals += static_cast<std::size_t>(attack.steps) + 1;
  }
  stats.mean_loss = stats.steps ? total / static_cast<double>(stats.steps) : 0.0;
  return stats;
}

RobustReport evaluate(const ModelParams& model, const Dataset& data,
                      std::span<const AttackConfig> attacks, std::uint64_t seed) {
  if (data.size() < 1) throw UsageError("evaluate: dataset is empty");
  constexpr Eigen::Index kChunk = 512;
  const Eigen::Index n = data.size();

  RobustReport report;
  report.n_samples = static_cast<std::size_t>(n);
  std::vector<std::size_t> robust_correct(attacks.size(), 0);
  std::size_t natural_correct = 0;

  for (Eigen::Index start = 0; start < n; start += kChunk) {
    const Eigen::Index len = std::min(kChunk, n - start);
    Batch chunk{data.inputs.middleRows(start, len),
                std::vector<int>(data.labels.begin() + start, data.labels.begin() + start + len)};
    const auto clean_pred = predict_classes(model, chunk.inputs);
    natural_correct += count_correct(clean_pred, chunk.labels);
    for (std::size_t k = 0; k < attacks.size(); ++k) {
      const Matrix x_adv = pgd_attack(model, chunk, attacks[k], derive_seed(seed, k),
                                      static_cast<std::size_t>(start));
      const auto adv_pred = predict_classes(model, x_adv);
      for (std::size_t i = 0; i < adv_pred.size(); ++i) {
        robust_correct[k] += clean_pred[i] == chunk.labels[i] && adv_pred[i] == chunk.labels[i];
      }
    }
  }
  const auto total = static_cast<double>(n);
  report.natural_accuracy = static_cast<double>(natural_correct) / total;
  for (std::size_t k = 0; k < attacks.size(); ++k) {
    report.robust.push_back({attacks[k].norm, attacks[k].epsilon,
                             static_cast<double>(robust_correct[k]) / total});
  }
  return report;
}

}  // namespace samrobust
