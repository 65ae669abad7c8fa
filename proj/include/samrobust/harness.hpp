#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "samrobust/adversarial.hpp"
#include "samrobust/datagen.hpp"
#include "samrobust/optim.hpp"

namespace samrobust {

enum class Method { st, sam, at };
enum class Command { run, sweep };
enum class OutputFormat { csv, json_lines };

const char* to_string(Method m);

struct ExperimentConfig {
  Method method = Method::st;
  double rho = 0.0;  // sam only
  Norm at_norm = Norm::linf;
  double at_eps = 0.0;  // at only
  int at_steps = 10;

  std::vector<int> hidden = {32};
  Activation activation = Activation::relu;

  SyntheticSpec data;  // data.seed is derived per replicate from `seed`
  int epochs = 20;
  int batch_size = 128;
  SgdConfig optimizer;
  LrSchedule schedule;

  std::vector<AttackConfig> eval_attacks;
  /// Leading input columns no attack (training or evaluation) may touch.
  int frozen_prefix = 0;
  std::uint64_t seed = 0;
  int replicates = 3;

  std::string out_path;
  OutputFormat format = OutputFormat::csv;
  bool record_wall_time = false;

  // sweep grids
  std::vector<double> rho_grid;
  std::vector<double> at_linf_grid;
  std::vector<double> at_l2_grid;
};

/// Defaults used when nothing overrides them.
ExperimentConfig default_config();

/// Parses "0.4", "1e-3" or the fraction form "8/255". Throws ConfigError
/// naming `key` on failure.
double parse_real(const std::string& key, const std::string& text);

/// Config file (line-oriented key=value, '#' comments) first, then the
/// command-line flags (--key value or --key=value, dashes or underscores),
/// which override it. `--config <path>` inside args names the file when
/// `file` is empty. Unknown keys, missing required keys, keys foreign to the
/// selected method and malformed values throw ConfigError naming the key.
ExperimentConfig parse_config(std::span<const std::string> args,
                              const std::optional<std::string>& file = std::nullopt,
                              Command command = Command::run);

struct ReportRow {
  std::string method;
  double rho = 0.0;
  std::string at_norm = "none";
  double at_eps = 0.0;
  std::string eval_norm = "none";
  double eval_eps = 0.0;
  double natural_acc = 0.0;
  double robust_acc = 0.0;
  std::string seed;  // replicate seed, or "mean" for the replicate average
  double wall_time_s = 0.0;
  std::uint64_t grad_evals = 0;  // backward passes spent in training
};

struct RunReport {
  std::vector<ReportRow> rows;
};

/// Samples data, trains by the configured method and evaluates every
/// eval attack, once per replicate; then appends replicate-averaged rows.
RunReport run(const ExperimentConfig& cfg);

/// ST, SAM for every rho in rho_grid, AT for every linf and l2 budget.
RunReport sweep(const ExperimentConfig& cfg);

/// Rows with seed == "mean" (or all rows when there is a single replicate).
std::vector<ReportRow> averaged_rows(const RunReport& report);

struct TheoryGrid {
  std::vector<double> p = {0.6, 0.75, 0.9, 0.99};
  std::vector<double> eta = {0.05, 0.1, 0.5, 1.0};
  int d = 50;
  std::vector<double> at_fractions = {0.1, 0.5, 0.9};         // eps_at = f * eta
  std::vector<double> sam_eps = {0.1, 0.5, 1.0};              // ordering check
  std::vector<double> approx_eps = {0.05, 0.1, 0.2, 0.5};     // coefficient check
  std::vector<double> relation_fractions = {0.05, 0.1, 0.2};  // eps_at = f * eta
  double tol = 1e-10;
  bool strict = false;
  std::string out_path;
  OutputFormat format = OutputFormat::csv;
};

TheoryGrid parse_theory_args(std::span<const std::string> args);

inline constexpr double kClosedFormRelTol = 1e-4;
inline constexpr double kSamCoefficient = 2.0 / 3.0;
inline constexpr double kSamCoefficientTol = 0.07;
inline constexpr double kSmallEpsRegime = 0.2;
inline constexpr double kOptimalityIdentityTol = 1e-6;
inline constexpr double kRelationRelTol = 0.05;

struct VerificationRow {
  // st_optimum | at_optimum | sam_above_st | sam_coefficient | sam_balance |
  // sam_at_match | sam_budget_order
  std::string check;
  double p = 0.0;
  double eta = 0.0;
  int d = 0;
  double eps = 0.0;
  double closed_form = 0.0;
  double numerical = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  double metric = 0.0;  // check-specific (coefficient, eps_sam, ...)
  std::string status;   // pass | fail | domain error | outside regime | search error
};

struct VerificationTable {
  std::vector<VerificationRow> rows;

  std::size_t count(const std::string& status) const;
};

VerificationTable theory_verify(const TheoryGrid& grid);

void emit(const RunReport& report, OutputFormat format, const std::string& path);
void emit(const VerificationTable& table, OutputFormat format, const std::string& path);

std::string to_csv(const RunReport& report);
std::string to_json_lines(const RunReport& report);
std::string to_csv(const VerificationTable& table);
std::string to_json_lines(const VerificationTable& table);

OutputFormat parse_format(const std::string& text);

}  // namespace samrobust
