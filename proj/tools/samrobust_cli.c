/* Command-line front end. Links only the C interface. */
#include <stdio.h>
#include <string.h>

#include "samrobust/samrobust.h"

enum { EXIT_OK = 0, EXIT_CONFIG = 1, EXIT_RUNTIME = 2, EXIT_STRICT = 3 };

static const char* kUsage =
    "usage: samrobust <command> [--key value ...]\n"
    "\n"
    "commands:\n"
    "  theory   closed-form vs numerical checks on the stylised model\n"
    "           keys: p eta d at_fractions sam_eps approx_eps relation_fractions\n"
    "                 tol strict out format\n"
    "  run      train one method and report natural/robust accuracy\n"
    "           keys: method rho at_norm at_eps at_steps (plus common keys)\n"
    "  sweep    ST, SAM over rho_grid, AT over at_linf_grid and at_l2_grid\n"
    "\n"
    "common keys: config hidden activation p eta d n_train n_eval epochs\n"
    "             batch_size lr momentum weight_decay milestones lr_decay\n"
    "             eval_norm eval_eps eval_steps frozen_prefix seed replicates\n"
    "             out format wall_time\n"
    "\n"
    "Lists are comma separated; reals accept fractions such as 8/255.\n"
    "Output goes to --out when given, otherwise to stdout.\n"
    "exit codes: 0 ok, 1 configuration error, 2 runtime error,\n"
    "            3 failed checks under theory --strict\n";

static int exit_code(sr_status status) {
  switch (status) {
    case SR_OK:
      return EXIT_OK;
    case SR_ERR_CONFIG:
    case SR_ERR_USAGE:
      return EXIT_CONFIG;
    default:
      return EXIT_RUNTIME;
  }
}

static int report_error(const char* command, sr_status status) {
  fprintf(stderr, "samrobust %s: %s: %s\n", command, sr_status_name(status), sr_last_error());
  return exit_code(status);
}

static int cmd_theory(int argc, const char* const* argv) {
  sr_theory_grid* grid = NULL;
  sr_status st = sr_theory_parse(argc, argv, &grid);
  if (st != SR_OK) return report_error("theory", st);

  sr_theory_table* table = NULL;
  st = sr_theory_verify(grid, &table);
  if (st != SR_OK) {
    sr_theory_grid_free(grid);
    return report_error("theory", st);
  }

  const char* out = sr_theory_grid_out_path(grid);
  const sr_format format = sr_theory_grid_format(grid);
  if (out[0] != '\0') {
    st = sr_theory_emit(table, format, out);
  } else {
    char* text = NULL;
    st = sr_theory_render(table, format, &text);
    if (st == SR_OK) fputs(text, stdout);
    sr_string_free(text);
  }

  int code = EXIT_OK;
  if (st != SR_OK) {
    code = report_error("theory", st);
  } else {
    const size_t fails = sr_theory_status_count(table, "fail");
    const size_t search = sr_theory_status_count(table, "search error");
    fprintf(stderr, "theory: %zu rows, %zu pass, %zu fail, %zu outside regime, %zu domain error, %zu search error\n",
            sr_theory_row_count(table), sr_theory_status_count(table, "pass"), fails,
            sr_theory_status_count(table, "outside regime"),
            sr_theory_status_count(table, "domain error"), search);
    if (sr_theory_grid_strict(grid) && fails + search > 0) code = EXIT_STRICT;
  }
  sr_theory_table_free(table);
  sr_theory_grid_free(grid);
  return code;
}

static int cmd_experiment(const char* name, sr_command command, int argc, const char* const* argv) {
  sr_config* cfg = NULL;
  sr_status st = sr_config_parse(argc, argv, command, &cfg);
  if (st != SR_OK) return report_error(name, st);

  sr_report* report = NULL;
  st = command == SR_COMMAND_SWEEP ? sr_sweep(cfg, &report) : sr_run(cfg, &report);
  if (st != SR_OK) {
    sr_config_free(cfg);
    return report_error(name, st);
  }

  const char* out = sr_config_out_path(cfg);
  const sr_format format = sr_config_format(cfg);
  if (out[0] != '\0') {
    st = sr_report_emit(report, format, out);
  } else {
    char* text = NULL;
    st = sr_report_render(report, format, &text);
    if (st == SR_OK) fputs(text, stdout);
    sr_string_free(text);
  }
  const int code = st == SR_OK ? EXIT_OK : report_error(name, st);
  sr_report_free(report);
  sr_config_free(cfg);
  return code;
}

int main(int argc, char** argv) {
  if (argc < 2 || strcmp(argv[1], "--help") == 0 || strcmp(argv[1], "-h") == 0) {
    fputs(kUsage, argc < 2 ? stderr : stdout);
    return argc < 2 ? EXIT_CONFIG : EXIT_OK;
  }
  const char* command = argv[1];
  const char* const* rest = (const char* const*)(argv + 2);
  const int nrest = argc - 2;
  if (strcmp(command, "theory") == 0) return cmd_theory(nrest, rest);
  if (strcmp(command, "run") == 0) return cmd_experiment("run", SR_COMMAND_RUN, nrest, rest);
  if (strcmp(command, "sweep") == 0) return cmd_experiment("sweep", SR_COMMAND_SWEEP, nrest, rest);
  fprintf(stderr, "samrobust: unknown command '%s'\n%s", command, kUsage);
  return EXIT_CONFIG;
}
