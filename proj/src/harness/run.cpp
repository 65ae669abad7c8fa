#include <chrono>
#include <string>

#include "samrobust/error.hpp"
#include "samrobust/harness.hpp"
#include "samrobust/rng.hpp"

namespace samrobust {

namespace {

// Stream tags for the phases of one replicate.
constexpr std::uint64_t kDataTag = 1;
constexpr std::uint64_t kInitTag = 2;
constexpr std::uint64_t kEvalTag = 3;
constexpr std::uint64_t kShuffleTag = 0x1000;
constexpr std::uint64_t kAttackTag = 0x2000;

struct ReplicateResult {
  RobustReport eval;
  std::uint64_t grad_evals = 0;
  double wall_time_s = 0.0;
};

// Re-throws with the phase prepended so the caller sees where it failed.
template <class Fn>
auto in_phase(const char* phase, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    const std::string msg = std::string(phase) + ": " + e.what();
    switch (e.kind()) {
      case ErrorKind::config:
        throw ConfigError(msg);
      case ErrorKind::numeric:
        throw NumericError(msg);
      case ErrorKind::domain:
        throw DomainError(msg);
      case ErrorKind::io:
      case ErrorKind::usage:
      case ErrorKind::search_interval:
        throw UsageError(msg);
    }
    throw;
  }
}

ReplicateResult run_replicate(const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();

  SyntheticSpec spec = cfg.data;
  spec.seed = derive_seed(seed, kDataTag);
  const SplitData data = in_phase("data", [&] { return sample(spec); });

  ModelParams model = in_phase("train", [&] {
    std::vector<int> widths;
    widths.push_back(static_cast<int>(data.train.dim()));
    widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
    widths.push_back(2);
    CounterRng init_rng(seed, kInitTag);
    return make_mlp(widths, cfg.activation, init_rng);
  });

  ReplicateResult result;
  in_phase("train", [&] {
    SgdState state;
    AttackConfig train_attack = AttackConfig::pgd(cfg.at_norm, cfg.at_eps, cfg.at_steps);
    train_attack.frozen_prefix = cfg.frozen_prefix;
    const SamConfig sam{cfg.rho, 0.0};
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      SgdConfig opt = cfg.optimizer;
      opt.lr = lr_at(cfg.schedule, epoch);
      const std::uint64_t shuffle = derive_seed(seed, kShuffleTag + static_cast<std::uint64_t>(epoch));
      EpochStats stats;
      switch (cfg.method) {
        case Method::st:
          stats = train_epoch(model, data.train, cfg.batch_size, opt, state, shuffle);
          break;
        case Method::sam:
          stats = sam_train_epoch(model, data.train, cfg.batch_size, sam, opt, state, shuffle);
          break;
        case Method::at:
          stats = adv_train_epoch(model, data.train, cfg.batch_size, train_attack, opt, state,
                                  shuffle,
                                  derive_seed(seed, kAttackTag + static_cast<std::uint64_t>(epoch)));
          break;
      }
      result.grad_evals += stats.grad_evals;
    }
    return 0;
  });

  result.eval = in_phase("eval", [&] {
    return evaluate(model, data.eval, cfg.eval_attacks, derive_seed(seed, kEvalTag));
  });
  if (cfg.record_wall_time) {
    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return result;
}

ReportRow base_row(const ExperimentConfig& cfg) {
  ReportRow row;
  row.method = to_string(cfg.method);
  if (cfg.method == Method::sam) row.rho = cfg.rho;
  if (cfg.method == Method::at) {
    row.at_norm = to_string(cfg.at_norm);
    row.at_eps = cfg.at_eps;
  }
  return row;
}

std::vector<ReportRow> rows_for(const ExperimentConfig& cfg, const ReplicateResult& r,
                                const std::string& seed) {
  std::vector<ReportRow> rows;
  ReportRow row = base_row(cfg);
  row.natural_acc = r.eval.natural_accuracy;
  row.seed = seed;
  row.wall_time_s = r.wall_time_s;
  row.grad_evals = r.grad_evals;
  if (r.eval.robust.empty()) {
    row.robust_acc = r.eval.natural_accuracy;
    rows.push_back(row);
  }
  for (const RobustEntry& e : r.eval.robust) {
    row.eval_norm = to_string(e.norm);
    row.eval_eps = e.epsilon;
    row.robust_acc = e.robust_accuracy;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

RunReport run(const ExperimentConfig& cfg) {
  if (cfg.replicates < 1) throw ConfigError("key 'replicates': must be >= 1");
  for (const auto& a : cfg.eval_attacks) a.validate();

  RunReport report;
  std::vector<ReplicateResult> results;
  for (int r = 0; r < cfg.replicates; ++r) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
    results.push_back(run_replicate(cfg, seed));
    for (auto& row : rows_for(cfg, results.back(), std::to_string(seed))) {
      report.rows.push_back(std::move(row));
    }
  }
  if (cfg.replicates > 1) {
    ReplicateResult mean;
    mean.eval.robust = results.front().eval.robust;
    for (auto& e : mean.eval.robust) e.robust_accuracy = 0.0;
    for (const auto& r : results) {
      mean.eval.natural_accuracy += r.eval.natural_accuracy;
      for (std::size_t k = 0; k < r.eval.robust.size(); ++k) {
        mean.eval.robust[k].robust_accuracy += r.eval.robust[k].robust_accuracy;
      }
      mean.wall_time_s += r.wall_time_s;
    }
    const auto n = static_cast<double>(results.size());
    mean.eval.natural_accuracy /= n;
    for (auto& e : mean.eval.robust) e.robust_accuracy /= n;
    mean.wall_time_s /= n;
    mean.grad_evals = results.front().grad_evals;
    for (auto& row : rows_for(cfg, mean, "mean")) report.rows.push_back(std::move(row));
  }
  return report;
}

RunReport sweep(const ExperimentConfig& cfg) {
  std::vector<ExperimentConfig> runs;
  ExperimentConfig st = cfg;
  st.method = Method::st;
  runs.push_back(st);
  for (double rho : cfg.rho_grid) {
    ExperimentConfig c = cfg;
    c.method = Method::sam;
    c.rho = rho;
    runs.push_back(c);
  }
  for (auto [norm, grid] : {std::pair{Norm::linf, &cfg.at_linf_grid}, std::pair{Norm::l2, &cfg.at_l2_grid}}) {
    for (double eps : *grid) {
      ExperimentConfig c = cfg;
      c.method = Method::at;
      c.at_norm = norm;
      c.at_eps = eps;
      runs.push_back(c);
    }
  }
  RunReport report;
  for (const auto& c : runs) {
    for (auto& row : run(c).rows) report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<ReportRow> averaged_rows(const RunReport& report) {
  std::vector<ReportRow> out;
  for (const auto& row : report.rows) {
    if (row.seed == "mean") out.push_back(row);
  }
  if (out.empty()) out = report.rows;
  return out;
}

}  // namespace samrobust
