#include "samrobust/samrobust.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "samrobust/error.hpp"
#include "samrobust/harness.hpp"
#include "samrobust/theory.hpp"

struct sr_config {
  samrobust::ExperimentConfig cfg;
};

struct sr_report {
  samrobust::RunReport report;
};

struct sr_theory_grid {
  samrobust::TheoryGrid grid;
};

struct sr_theory_table {
  samrobust::VerificationTable table;
};

namespace {

thread_local std::string g_last_error;

sr_status status_of(samrobust::ErrorKind kind) {
  using samrobust::ErrorKind;
  switch (kind) {
    case ErrorKind::config:
      return SR_ERR_CONFIG;
    case ErrorKind::usage:
      return SR_ERR_USAGE;
    case ErrorKind::numeric:
      return SR_ERR_NUMERIC;
    case ErrorKind::domain:
      return SR_ERR_DOMAIN;
    case ErrorKind::search_interval:
      return SR_ERR_SEARCH;
    case ErrorKind::io:
      return SR_ERR_IO;
  }
  return SR_ERR_INTERNAL;
}

sr_status fail(sr_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <class Fn>
sr_status guard(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return SR_OK;
  } catch (const samrobust::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SR_ERR_INTERNAL, e.what());
  }
}

std::vector<std::string> collect_args(int argc, const char* const* argv) {
  if (argc < 0 || (argc > 0 && argv == nullptr)) throw samrobust::UsageError("invalid argv");
  std::vector<std::string> args;
  args.reserve(static_cast<std::size_t>(argc));
  for (int i = 0; i < argc; ++i) {
    if (argv[i] == nullptr) throw samrobust::UsageError("null entry in argv");
    args.emplace_back(argv[i]);
  }
  return args;
}

template <class T>
void require(const T* p, const char* what) {
  if (p == nullptr) throw samrobust::UsageError(std::string("null ") + what);
}

samrobust::OutputFormat to_format(sr_format f) {
  switch (f) {
    case SR_FORMAT_CSV:
      return samrobust::OutputFormat::csv;
    case SR_FORMAT_JSON_LINES:
      return samrobust::OutputFormat::json_lines;
  }
  throw samrobust::UsageError("unknown output format");
}

sr_format from_format(samrobust::OutputFormat f) {
  return f == samrobust::OutputFormat::csv ? SR_FORMAT_CSV : SR_FORMAT_JSON_LINES;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* sr_last_error(void) { return g_last_error.c_str(); }

const char* sr_status_name(sr_status status) {
  switch (status) {
    case SR_OK:
      return "ok";
    case SR_ERR_CONFIG:
      return "config error";
    case SR_ERR_USAGE:
      return "usage error";
    case SR_ERR_NUMERIC:
      return "numeric error";
    case SR_ERR_DOMAIN:
      return "domain error";
    case SR_ERR_SEARCH:
      return "search interval error";
    case SR_ERR_IO:
      return "io error";
    case SR_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

void sr_string_free(char* s) { std::free(s); }

sr_status sr_config_parse(int argc, const char* const* argv, sr_command command, sr_config** out) {
  return guard([&] {
    require(out, "output pointer");
    *out = nullptr;
    const auto args = collect_args(argc, argv);
    const auto cmd = command == SR_COMMAND_SWEEP ? samrobust::Command::sweep : samrobust::Command::run;
    auto cfg = samrobust::parse_config(args, std::nullopt, cmd);
    *out = new sr_config{std::move(cfg)};
  });
}

void sr_config_free(sr_config* cfg) { delete cfg; }

const char* sr_config_out_path(const sr_config* cfg) {
  return cfg != nullptr ? cfg->cfg.out_path.c_str() : "";
}

sr_format sr_config_format(const sr_config* cfg) {
  return cfg != nullptr ? from_format(cfg->cfg.format) : SR_FORMAT_CSV;
}

sr_status sr_run(const sr_config* cfg, sr_report** out) {
  return guard([&] {
    require(cfg, "config");
    require(out, "output pointer");
    *out = nullptr;
    *out = new sr_report{samrobust::run(cfg->cfg)};
  });
}

sr_status sr_sweep(const sr_config* cfg, sr_report** out) {
  return guard([&] {
    require(cfg, "config");
    require(out, "output pointer");
    *out = nullptr;
    *out = new sr_report{samrobust::sweep(cfg->cfg)};
  });
}

size_t sr_report_row_count(const sr_report* report) {
  return report != nullptr ? report->report.rows.size() : 0;
}

sr_status sr_report_get_row(const sr_report* report, size_t index, sr_report_row* out) {
  return guard([&] {
    require(report, "report");
    require(out, "output row");
    if (index >= report->report.rows.size()) {
      throw samrobust::UsageError("row index " + std::to_string(index) + " out of range");
    }
    const auto& r = report->report.rows[index];
    *out = sr_report_row{r.method.c_str(), r.rho,         r.at_norm.c_str(),
                         r.at_eps,         r.eval_norm.c_str(), r.eval_eps,
                         r.natural_acc,    r.robust_acc,  r.seed.c_str(),
                         r.wall_time_s,    r.grad_evals};
  });
}

sr_status sr_report_render(const sr_report* report, sr_format format, char** out) {
  return guard([&] {
    require(report, "report");
    require(out, "output pointer");
    *out = nullptr;
    const auto f = to_format(format);
    *out = dup_string(f == samrobust::OutputFormat::csv ? samrobust::to_csv(report->report)
                                                        : samrobust::to_json_lines(report->report));
  });
}

sr_status sr_report_emit(const sr_report* report, sr_format format, const char* path) {
  return guard([&] {
    require(report, "report");
    require(path, "path");
    samrobust::emit(report->report, to_format(format), path);
  });
}

void sr_report_free(sr_report* report) { delete report; }

sr_status sr_theory_parse(int argc, const char* const* argv, sr_theory_grid** out) {
  return guard([&] {
    require(out, "output pointer");
    *out = nullptr;
    const auto args = collect_args(argc, argv);
    *out = new sr_theory_grid{samrobust::parse_theory_args(args)};
  });
}

void sr_theory_grid_free(sr_theory_grid* grid) { delete grid; }

int sr_theory_grid_strict(const sr_theory_grid* grid) {
  return grid != nullptr && grid->grid.strict ? 1 : 0;
}

const char* sr_theory_grid_out_path(const sr_theory_grid* grid) {
  return grid != nullptr ? grid->grid.out_path.c_str() : "";
}

sr_format sr_theory_grid_format(const sr_theory_grid* grid) {
  return grid != nullptr ? from_format(grid->grid.format) : SR_FORMAT_CSV;
}

sr_status sr_theory_verify(const sr_theory_grid* grid, sr_theory_table** out) {
  return guard([&] {
    require(grid, "grid");
    require(out, "output pointer");
    *out = nullptr;
    *out = new sr_theory_table{samrobust::theory_verify(grid->grid)};
  });
}

size_t sr_theory_row_count(const sr_theory_table* table) {
  return table != nullptr ? table->table.rows.size() : 0;
}

size_t sr_theory_status_count(const sr_theory_table* table, const char* status) {
  if (table == nullptr || status == nullptr) return 0;
  return table->table.count(status);
}

sr_status sr_theory_render(const sr_theory_table* table, sr_format format, char** out) {
  return guard([&] {
    require(table, "table");
    require(out, "output pointer");
    *out = nullptr;
    const auto f = to_format(format);
    *out = dup_string(f == samrobust::OutputFormat::csv ? samrobust::to_csv(table->table)
                                                        : samrobust::to_json_lines(table->table));
  });
}

sr_status sr_theory_emit(const sr_theory_table* table, sr_format format, const char* path) {
  return guard([&] {
    require(table, "table");
    require(path, "path");
    samrobust::emit(table->table, to_format(format), path);
  });
}

void sr_theory_table_free(sr_theory_table* table) { delete table; }

sr_status sr_w1_star(double p, double eta, double* out) {
  return guard([&] {
    require(out, "output pointer");
    *out = samrobust::w1_star(p, eta);
  });
}

sr_status sr_w1_at(double p, double eta, double eps_at, double* out) {
  return guard([&] {
    require(out, "output pointer");
    *out = samrobust::w1_at(p, eta, eps_at);
  });
}

sr_status sr_w1_sam_approx(double p, double eta, double eps_sam, double* out) {
  return guard([&] {
    require(out, "output pointer");
    *out = samrobust::w1_sam_approx(p, eta, eps_sam);
  });
}

sr_status sr_w1_sam_numeric(double p, double eta, int d, double eps_sam, double tol, double* out) {
  return guard([&] {
    require(out, "output pointer");
    *out = samrobust::w1_sam_numeric(samrobust::TheoryParams{p, eta, d}, eps_sam, tol);
  });
}

sr_status sr_epsilon_sam_from_at(double eta, double eps_at, double* out) {
  return guard([&] {
    require(out, "output pointer");
    *out = samrobust::epsilon_sam_from_at(eta, eps_at);
  });
}

sr_status sr_clean_accuracy(double w1, double p, double eta, int d, double* out) {
  return guard([&] {
    require(out, "output pointer");
    const samrobust::TheoryParams tp{p, eta, d};
    tp.validate();
    *out = samrobust::clean_accuracy(w1, tp);
  });
}

}  // extern "C"
