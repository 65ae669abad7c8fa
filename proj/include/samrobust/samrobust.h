/* C interface to the samrobust library.
 *
 * Every fallible call returns an sr_status. On failure the message is
 * available from sr_last_error() on the same thread until the next call.
 * Objects are opaque and owned by the caller, who releases them with the
 * matching *_free function. Strings handed out by sr_report_row stay valid
 * until the report is freed; strings from *_render must be released with
 * sr_string_free. */
#ifndef SAMROBUST_H
#define SAMROBUST_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SR_API __declspec(dllexport)
#else
#define SR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sr_status {
  SR_OK = 0,
  SR_ERR_CONFIG = 1,  /* bad or missing configuration key */
  SR_ERR_USAGE = 2,   /* API misuse: null handle, index out of range, ... */
  SR_ERR_NUMERIC = 3, /* non-finite loss or gradient */
  SR_ERR_DOMAIN = 4,  /* parameters outside a formula's domain */
  SR_ERR_SEARCH = 5,  /* maximiser search interval exhausted */
  SR_ERR_IO = 6,      /* file could not be read or written */
  SR_ERR_INTERNAL = 7
} sr_status;

typedef enum sr_command { SR_COMMAND_RUN = 0, SR_COMMAND_SWEEP = 1 } sr_command;
typedef enum sr_format { SR_FORMAT_CSV = 0, SR_FORMAT_JSON_LINES = 1 } sr_format;

typedef struct sr_config sr_config;
typedef struct sr_report sr_report;
typedef struct sr_theory_grid sr_theory_grid;
typedef struct sr_theory_table sr_theory_table;

typedef struct sr_report_row {
  const char* method;
  double rho;
  const char* at_norm;
  double at_eps;
  const char* eval_norm;
  double eval_eps;
  double natural_acc;
  double robust_acc;
  const char* seed;
  double wall_time_s;
  uint64_t grad_evals;
} sr_report_row;

SR_API const char* sr_last_error(void);
SR_API const char* sr_status_name(sr_status status);
SR_API void sr_string_free(char* s);

/* Experiment configuration from command-line style arguments (flags and an
 * optional "--config <file>"). */
SR_API sr_status sr_config_parse(int argc, const char* const* argv, sr_command command,
                                 sr_config** out);
SR_API void sr_config_free(sr_config* cfg);
/* Output path ("" when unset) and format chosen by the configuration. */
SR_API const char* sr_config_out_path(const sr_config* cfg);
SR_API sr_format sr_config_format(const sr_config* cfg);

SR_API sr_status sr_run(const sr_config* cfg, sr_report** out);
SR_API sr_status sr_sweep(const sr_config* cfg, sr_report** out);

SR_API size_t sr_report_row_count(const sr_report* report);
SR_API sr_status sr_report_get_row(const sr_report* report, size_t index, sr_report_row* out);
SR_API sr_status sr_report_render(const sr_report* report, sr_format format, char** out);
SR_API sr_status sr_report_emit(const sr_report* report, sr_format format, const char* path);
SR_API void sr_report_free(sr_report* report);

/* Closed-form versus numerical verification of the stylised model. */
SR_API sr_status sr_theory_parse(int argc, const char* const* argv, sr_theory_grid** out);
SR_API void sr_theory_grid_free(sr_theory_grid* grid);
SR_API int sr_theory_grid_strict(const sr_theory_grid* grid);
SR_API const char* sr_theory_grid_out_path(const sr_theory_grid* grid);
SR_API sr_format sr_theory_grid_format(const sr_theory_grid* grid);

SR_API sr_status sr_theory_verify(const sr_theory_grid* grid, sr_theory_table** out);
SR_API size_t sr_theory_row_count(const sr_theory_table* table);
/* Number of rows whose status equals `status` ("pass", "fail", ...). */
SR_API size_t sr_theory_status_count(const sr_theory_table* table, const char* status);
SR_API sr_status sr_theory_render(const sr_theory_table* table, sr_format format, char** out);
SR_API sr_status sr_theory_emit(const sr_theory_table* table, sr_format format, const char* path);
SR_API void sr_theory_table_free(sr_theory_table* table);

/* Stylised-model formulas. */
SR_API sr_status sr_w1_star(double p, double eta, double* out);
SR_API sr_status sr_w1_at(double p, double eta, double eps_at, double* out);
SR_API sr_status sr_w1_sam_approx(double p, double eta, double eps_sam, double* out);
SR_API sr_status sr_w1_sam_numeric(double p, double eta, int d, double eps_sam, double tol,
                                   double* out);
SR_API sr_status sr_epsilon_sam_from_at(double eta, double eps_at, double* out);
SR_API sr_status sr_clean_accuracy(double w1, double p, double eta, int d, double* out);

#ifdef __cplusplus
}
#endif

#endif /* SAMROBUST_H */
