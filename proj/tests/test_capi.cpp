#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include "samrobust/samrobust.h"

namespace {

const char* const kTiny[] = {"--method", "st",      "--d",          "6",   "--eta",      "0.3",
                             "--n-train", "120",    "--n-eval",     "80",  "--epochs",   "2",
                             "--replicates", "1",   "--batch-size", "32",  "--hidden",   "4",
                             "--eval-norm", "linf", "--eval-eps",   "0.1"};
constexpr int kTinyCount = sizeof(kTiny) / sizeof(kTiny[0]);

}  // namespace

TEST_CASE("closed forms through the C interface") {
  double w = 0.0;
  REQUIRE(sr_w1_star(0.9, 0.1, &w) == SR_OK);
  CHECK(w == doctest::Approx(std::log(9.0) / 0.2));
  CHECK(sr_w1_star(0.4, 0.1, &w) == SR_ERR_DOMAIN);
  CHECK(std::string(sr_last_error()).find("p") != std::string::npos);
  CHECK(sr_w1_at(0.9, 0.1, 0.2, &w) == SR_ERR_DOMAIN);
  CHECK(sr_w1_star(0.9, 0.1, nullptr) == SR_ERR_USAGE);

  double numeric = 0.0;
  REQUIRE(sr_w1_at(0.9, 0.1, 0.05, &w) == SR_OK);
  CHECK(w > 0.0);
  REQUIRE(sr_w1_sam_numeric(0.9, 0.1, 50, 0.0, 1e-10, &numeric) == SR_OK);
  REQUIRE(sr_w1_star(0.9, 0.1, &w) == SR_OK);
  CHECK(numeric == doctest::Approx(w).epsilon(1e-6));

  double acc = 0.0;
  REQUIRE(sr_clean_accuracy(0.0, 0.9, 0.1, 50, &acc) == SR_OK);
  CHECK(acc == doctest::Approx(0.5 * std::erfc(-0.1 * std::sqrt(50.0) / std::sqrt(2.0))));
}

TEST_CASE("status names") {
  CHECK(std::strcmp(sr_status_name(SR_OK), "ok") == 0);
  CHECK(std::strcmp(sr_status_name(SR_ERR_CONFIG), "config error") == 0);
  CHECK(std::strlen(sr_status_name(static_cast<sr_status>(99))) > 0);
}

TEST_CASE("config, run and report handles") {
  sr_config* cfg = nullptr;
  const char* bad[] = {"--method", "sam"};
  CHECK(sr_config_parse(2, bad, SR_COMMAND_RUN, &cfg) == SR_ERR_CONFIG);
  CHECK(cfg == nullptr);
  CHECK(std::string(sr_last_error()).find("rho") != std::string::npos);

  REQUIRE(sr_config_parse(kTinyCount, kTiny, SR_COMMAND_RUN, &cfg) == SR_OK);
  CHECK(std::strcmp(sr_config_out_path(cfg), "") == 0);
  CHECK(sr_config_format(cfg) == SR_FORMAT_CSV);

  sr_report* report = nullptr;
  REQUIRE(sr_run(cfg, &report) == SR_OK);
  // A single replicate has no averaged rows.
  REQUIRE(sr_report_row_count(report) == 1);
  sr_report_row row{};
  REQUIRE(sr_report_get_row(report, 0, &row) == SR_OK);
  CHECK(std::strcmp(row.method, "st") == 0);
  CHECK(std::strcmp(row.eval_norm, "linf") == 0);
  CHECK(row.grad_evals == 8);
  CHECK(row.robust_acc <= row.natural_acc);
  CHECK(sr_report_get_row(report, 1, &row) == SR_ERR_USAGE);

  char* text = nullptr;
  REQUIRE(sr_report_render(report, SR_FORMAT_CSV, &text) == SR_OK);
  CHECK(std::string(text).rfind("method,rho,", 0) == 0);
  sr_string_free(text);
  REQUIRE(sr_report_render(report, SR_FORMAT_JSON_LINES, &text) == SR_OK);
  CHECK(text[0] == '{');
  sr_string_free(text);
  CHECK(sr_report_emit(report, SR_FORMAT_CSV, "/nonexistent/dir/x.csv") == SR_ERR_IO);

  sr_report* sweep_report = nullptr;
  CHECK(sr_sweep(nullptr, &sweep_report) == SR_ERR_USAGE);
  CHECK(sweep_report == nullptr);

  sr_report_free(report);
  sr_config_free(cfg);
  sr_report_free(nullptr);
  sr_config_free(nullptr);
  CHECK(sr_run(nullptr, &report) == SR_ERR_USAGE);
}

TEST_CASE("theory handles") {
  const char* args[] = {"--p", "0.9", "--eta", "0.1", "--strict"};
  sr_theory_grid* grid = nullptr;
  REQUIRE(sr_theory_parse(5, args, &grid) == SR_OK);
  CHECK(sr_theory_grid_strict(grid) == 1);
  CHECK(sr_theory_grid_format(grid) == SR_FORMAT_CSV);

  sr_theory_table* table = nullptr;
  REQUIRE(sr_theory_verify(grid, &table) == SR_OK);
  const std::size_t total = sr_theory_row_count(table);
  CHECK(total > 0);
  std::size_t sum = 0;
  for (const char* s : {"pass", "fail", "outside regime", "domain error", "search error"}) {
    sum += sr_theory_status_count(table, s);
  }
  CHECK(sum == total);

  char* text = nullptr;
  REQUIRE(sr_theory_render(table, SR_FORMAT_CSV, &text) == SR_OK);
  CHECK(std::string(text).rfind("check,p,eta,d,eps,", 0) == 0);
  sr_string_free(text);

  sr_theory_table_free(table);
  sr_theory_grid_free(grid);

  const char* bad[] = {"--nope", "1"};
  CHECK(sr_theory_parse(2, bad, &grid) == SR_ERR_CONFIG);
}
