#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "samrobust/error.hpp"
#include "samrobust/harness.hpp"

namespace samrobust {

namespace {

// A column value: already-formatted number token or a string.
struct Cell {
  std::string text;
  bool is_string = false;
};

Cell fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return {buf, false};
}

Cell sci6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return {buf, false};
}

Cell integer(std::uint64_t v) { return {std::to_string(v), false}; }
Cell text(const std::string& s) { return {s, true}; }

using Record = std::vector<Cell>;

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render_csv(const std::vector<std::string>& header, const std::vector<Record>& records) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (const auto& rec : records) {
    for (std::size_t i = 0; i < rec.size(); ++i) {
      if (i) out += ',';
      out += rec[i].is_string ? csv_escape(rec[i].text) : rec[i].text;
    }
    out += '\n';
  }
  return out;
}

std::string render_json_lines(const std::vector<std::string>& header,
                              const std::vector<Record>& records) {
  std::string out;
  for (const auto& rec : records) {
    out += '{';
    for (std::size_t i = 0; i < rec.size(); ++i) {
      if (i) out += ',';
      out += nlohmann::json(header[i]).dump() + ':';
      out += rec[i].is_string ? nlohmann::json(rec[i].text).dump() : rec[i].text;
    }
    out += "}\n";
  }
  return out;
}

const std::vector<std::string> kReportHeader = {
    "method",     "rho",         "at_norm",    "at_eps", "eval_norm",   "eval_eps",
    "natural_acc", "robust_acc", "seed",       "wall_time_s", "grad_evals"};

const std::vector<std::string> kTheoryHeader = {"check",   "p",         "eta",      "d",
                                                "eps",     "closed_form", "numerical", "abs_err",
                                                "rel_err", "metric",    "status"};

std::vector<Record> report_records(const RunReport& report) {
  std::vector<Record> out;
  for (const auto& r : report.rows) {
    // Replicate seeds are integers; the averaged rows carry "mean".
    const bool numeric_seed = !r.seed.empty() && r.seed.find_first_not_of("0123456789") == std::string::npos;
    out.push_back({text(r.method), fixed6(r.rho), text(r.at_norm), fixed6(r.at_eps),
                   text(r.eval_norm), fixed6(r.eval_eps), fixed6(r.natural_acc),
                   fixed6(r.robust_acc), Cell{r.seed, !numeric_seed}, fixed6(r.wall_time_s),
                   integer(r.grad_evals)});
  }
  return out;
}

std::vector<Record> theory_records(const VerificationTable& table) {
  std::vector<Record> out;
  for (const auto& r : table.rows) {
    out.push_back({text(r.check), fixed6(r.p), fixed6(r.eta), integer(static_cast<std::uint64_t>(r.d)),
                   fixed6(r.eps), sci6(r.closed_form), sci6(r.numerical), sci6(r.abs_err),
                   sci6(r.rel_err), sci6(r.metric), text(r.status)});
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open output file", path);
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing output file", path);
}

}  // namespace

std::string to_csv(const RunReport& report) {
  return render_csv(kReportHeader, report_records(report));
}

std::string to_json_lines(const RunReport& report) {
  return render_json_lines(kReportHeader, report_records(report));
}

std::string to_csv(const VerificationTable& table) {
  return render_csv(kTheoryHeader, theory_records(table));
}

std::string to_json_lines(const VerificationTable& table) {
  return render_json_lines(kTheoryHeader, theory_records(table));
}

void emit(const RunReport& report, OutputFormat format, const std::string& path) {
  write_file(path, format == OutputFormat::csv ? to_csv(report) : to_json_lines(report));
}

void emit(const VerificationTable& table, OutputFormat format, const std::string& path) {
  write_file(path, format == OutputFormat::csv ? to_csv(table) : to_json_lines(table));
}

}  // namespace samrobust
