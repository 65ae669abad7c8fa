#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "samrobust/error.hpp"
#include "samrobust/harness.hpp"

namespace samrobust {

namespace {

struct Entry {
  std::string key;
  std::string value;
  std::string origin;
};

const std::set<std::string> kCommonKeys = {
    "hidden",   "activation", "p",           "eta",          "d",         "n_train",
    "n_eval",   "epochs",     "batch_size",  "lr",           "momentum",  "weight_decay",
    "milestones", "lr_decay", "eval_norm",   "eval_eps",     "eval_steps", "frozen_prefix",
    "seed",     "replicates", "out",         "format",       "wall_time",
};
const std::set<std::string> kRunOnlyKeys = {"method", "rho", "at_norm", "at_eps", "at_steps"};
const std::set<std::string> kSweepOnlyKeys = {"rho_grid", "at_linf_grid", "at_l2_grid",
                                              "at_steps"};
const std::set<std::string> kBoolKeys = {"wall_time", "strict"};

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

std::vector<Entry> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::vector<Entry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value, got '" +
                        line + "'");
    }
    entries.push_back({normalize_key(trim(line.substr(0, eq))), trim(line.substr(eq + 1)),
                       path + ":" + std::to_string(line_no)});
  }
  return entries;
}

std::vector<Entry> read_flags(std::span<const std::string> args, std::optional<std::string>& file) {
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& tok = args[i];
    if (tok.rfind("--", 0) != 0 || tok.size() < 3) {
      throw ConfigError("unexpected argument '" + tok + "' (flags look like --key value)");
    }
    std::string body = tok.substr(2);
    std::string key;
    std::string value;
    if (const auto eq = body.find('='); eq != std::string::npos) {
      key = normalize_key(body.substr(0, eq));
      value = body.substr(eq + 1);
    } else {
      key = normalize_key(body);
      if (kBoolKeys.count(key)) {
        value = "true";
      } else {
        if (i + 1 >= args.size()) throw ConfigError("flag --" + body + " expects a value");
        value = args[++i];
      }
    }
    if (key == "config") {
      if (file) throw ConfigError("config: given more than once");
      file = value;
      continue;
    }
    entries.push_back({key, value, "flag --" + body});
  }
  return entries;
}

int parse_int(const std::string& key, const std::string& text, int min_value) {
  const std::string t = trim(text);
  int v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + text + "'");
  }
  if (v < min_value) {
    throw ConfigError("key '" + key + "': must be >= " + std::to_string(min_value) + ", got " +
                      std::to_string(v));
  }
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError("key '" + key + "': expected an unsigned 64-bit integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + text + "'");
}

double parse_nonneg(const std::string& key, const std::string& text) {
  const double v = parse_real(key, text);
  if (v < 0.0) throw ConfigError("key '" + key + "': must be >= 0, got '" + text + "'");
  return v;
}

std::vector<double> parse_real_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_nonneg(key, item));
  return out;
}

Norm parse_norm(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "linf" || t == "inf") return Norm::linf;
  if (t == "l2") return Norm::l2;
  throw ConfigError("key '" + key + "': expected linf or l2, got '" + text + "'");
}

Method parse_method(const std::string& text) {
  const std::string t = trim(text);
  if (t == "st") return Method::st;
  if (t == "sam") return Method::sam;
  if (t == "at") return Method::at;
  throw ConfigError("key 'method': expected st, sam or at, got '" + text + "'");
}

std::vector<int> default_milestones(int epochs) {
  std::vector<int> out;
  for (double frac : {0.75, 0.9}) {
    const int m = static_cast<int>(std::lround(frac * epochs));
    if (m < epochs && (out.empty() || m > out.back())) out.push_back(m);
  }
  return out;
}

void apply_scalar(ExperimentConfig& cfg, const Entry& e, bool& milestones_set) {
  const std::string& k = e.key;
  const std::string& v = e.value;
  if (k == "method") {
    cfg.method = parse_method(v);
  } else if (k == "rho") {
    cfg.rho = parse_nonneg(k, v);
  } else if (k == "at_norm") {
    cfg.at_norm = parse_norm(k, v);
  } else if (k == "at_eps") {
    cfg.at_eps = parse_nonneg(k, v);
  } else if (k == "at_steps") {
    cfg.at_steps = parse_int(k, v, 0);
  } else if (k == "hidden") {
    cfg.hidden.clear();
    const std::string t = trim(v);
    if (!t.empty() && t != "none") {
      for (const auto& item : split_list(t)) cfg.hidden.push_back(parse_int(k, item, 1));
    }
  } else if (k == "activation") {
    const std::string t = trim(v);
    if (t == "relu") {
      cfg.activation = Activation::relu;
    } else if (t == "identity") {
      cfg.activation = Activation::identity;
    } else {
      throw ConfigError("key 'activation': expected relu or identity, got '" + v + "'");
    }
  } else if (k == "p") {
    cfg.data.tp.p = parse_real(k, v);
    if (!(cfg.data.tp.p > 0.5 && cfg.data.tp.p < 1.0)) {
      throw ConfigError("key 'p': must lie in (0.5, 1), got '" + v + "'");
    }
  } else if (k == "eta") {
    cfg.data.tp.eta = parse_nonneg(k, v);
  } else if (k == "d") {
    cfg.data.tp.d = parse_int(k, v, 1);
  } else if (k == "n_train") {
    cfg.data.n_train = parse_int(k, v, 1);
  } else if (k == "n_eval") {
    cfg.data.n_eval = parse_int(k, v, 1);
  } else if (k == "epochs") {
    cfg.epochs = parse_int(k, v, 1);
  } else if (k == "batch_size") {
    cfg.batch_size = parse_int(k, v, 1);
  } else if (k == "lr") {
    const double lr = parse_real(k, v);
    if (!(lr > 0.0)) throw ConfigError("key 'lr': must be > 0, got '" + v + "'");
    cfg.optimizer.lr = lr;
    cfg.schedule.base_lr = lr;
  } else if (k == "momentum") {
    const double m = parse_real(k, v);
    if (!(m >= 0.0 && m < 1.0)) throw ConfigError("key 'momentum': must lie in [0, 1)");
    cfg.optimizer.momentum = m;
  } else if (k == "weight_decay") {
    cfg.optimizer.weight_decay = parse_nonneg(k, v);
  } else if (k == "milestones") {
    cfg.schedule.milestones.clear();
    const std::string t = trim(v);
    if (!t.empty() && t != "none") {
      for (const auto& item : split_list(t)) cfg.schedule.milestones.push_back(parse_int(k, item, 0));
    }
    milestones_set = true;
  } else if (k == "lr_decay") {
    cfg.schedule.decay_factor = parse_real(k, v);
  } else if (k == "eval_steps") {
    const int steps = parse_int(k, v, 0);
    for (auto& a : cfg.eval_attacks) a = AttackConfig::pgd(a.norm, a.epsilon, steps);
  } else if (k == "frozen_prefix") {
    const int f = parse_int(k, v, 0);
    cfg.frozen_prefix = f;
    for (auto& a : cfg.eval_attacks) a.frozen_prefix = f;
  } else if (k == "seed") {
    cfg.seed = parse_u64(k, v);
  } else if (k == "replicates") {
    cfg.replicates = parse_int(k, v, 1);
  } else if (k == "out") {
    cfg.out_path = trim(v);
  } else if (k == "format") {
    cfg.format = parse_format(v);
  } else if (k == "wall_time") {
    cfg.record_wall_time = parse_bool(k, v);
  } else if (k == "rho_grid") {
    cfg.rho_grid = parse_real_list(k, v);
  } else if (k == "at_linf_grid") {
    cfg.at_linf_grid = parse_real_list(k, v);
  } else if (k == "at_l2_grid") {
    cfg.at_l2_grid = parse_real_list(k, v);
  }
}

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::st:
      return "st";
    case Method::sam:
      return "sam";
    case Method::at:
      return "at";
  }
  return "?";
}

OutputFormat parse_format(const std::string& text) {
  const std::string t = trim(text);
  if (t == "csv") return OutputFormat::csv;
  if (t == "jsonl" || t == "json-lines" || t == "json_lines") return OutputFormat::json_lines;
  throw ConfigError("key 'format': expected csv or json-lines, got '" + text + "'");
}

double parse_real(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  auto parse_plain = [&](const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
      throw ConfigError("key '" + key + "': expected a real number (e.g. 0.4 or 8/255), got '" +
                        text + "'");
    }
    return v;
  };
  if (const auto slash = t.find('/'); slash != std::string::npos) {
    const double num = parse_plain(trim(t.substr(0, slash)));
    const double den = parse_plain(trim(t.substr(slash + 1)));
    if (den == 0.0) throw ConfigError("key '" + key + "': zero denominator in '" + text + "'");
    return num / den;
  }
  return parse_plain(t);
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.data.tp = TheoryParams{0.9, 0.15, 50};
  cfg.data.n_train = 5000;
  cfg.data.n_eval = 2000;
  cfg.optimizer = SgdConfig{0.1, 0.9, 5e-4};
  cfg.schedule = LrSchedule{0.1, default_milestones(cfg.epochs), 0.1};
  // The robust coordinate x1 is left unattacked so the setting matches the
  // analytic model, where only the non-robust block can be perturbed.
  cfg.frozen_prefix = 1;
  cfg.eval_attacks = {AttackConfig::pgd(Norm::linf, 16.0 / 255), AttackConfig::pgd(Norm::linf, 32.0 / 255),
                      AttackConfig::pgd(Norm::l2, 128.0 / 255), AttackConfig::pgd(Norm::l2, 256.0 / 255)};
  cfg.rho_grid = {0.1, 0.2, 0.4};
  cfg.at_linf_grid = {8.0 / 255, 16.0 / 255, 32.0 / 255};
  cfg.at_l2_grid = {64.0 / 255, 128.0 / 255, 256.0 / 255};
  return cfg;
}

ExperimentConfig parse_config(std::span<const std::string> args,
                              const std::optional<std::string>& file, Command command) {
  std::optional<std::string> config_path = file;
  std::optional<std::string> flag_path;
  const std::vector<Entry> flag_entries = read_flags(args, flag_path);
  if (flag_path) {
    if (config_path) throw ConfigError("config: given both as argument and as --config");
    config_path = flag_path;
  }
  const std::vector<Entry> file_entries = config_path ? read_file(*config_path) : std::vector<Entry>{};

  const auto& extra = command == Command::run ? kRunOnlyKeys : kSweepOnlyKeys;
  const auto& other = command == Command::run ? kSweepOnlyKeys : kRunOnlyKeys;
  std::set<std::string> present;
  for (const auto* list : {&file_entries, &flag_entries}) {
    for (const Entry& e : *list) {
      if (!kCommonKeys.count(e.key) && !extra.count(e.key)) {
        if (other.count(e.key)) {
          throw ConfigError("key '" + e.key + "' (" + e.origin + ") is not accepted by the " +
                            (command == Command::run ? "run" : "sweep") + " command");
        }
        throw ConfigError("unknown key '" + e.key + "' (" + e.origin + ")");
      }
      present.insert(e.key);
    }
  }

  ExperimentConfig cfg = default_config();
  bool milestones_set = false;

  // Eval attacks: an eval_eps entry attaches to the latest eval_norm before
  // it. Flags replace the file's list as a whole.
  auto has_eval = [](const std::vector<Entry>& v) {
    return std::any_of(v.begin(), v.end(),
                       [](const Entry& e) { return e.key == "eval_norm" || e.key == "eval_eps"; });
  };
  const std::vector<Entry>& eval_source = has_eval(flag_entries) ? flag_entries : file_entries;
  if (has_eval(eval_source)) {
    cfg.eval_attacks.clear();
    Norm current = Norm::linf;
    for (const Entry& e : eval_source) {
      if (e.key == "eval_norm") current = parse_norm(e.key, e.value);
      if (e.key == "eval_eps") {
        for (const auto& item : split_list(e.value)) {
          cfg.eval_attacks.push_back(AttackConfig::pgd(current, parse_nonneg(e.key, item)));
        }
      }
    }
  }

  for (const auto* list : {&file_entries, &flag_entries}) {
    for (const Entry& e : *list) {
      if (e.key == "eval_norm" || e.key == "eval_eps" || e.key == "eval_steps" ||
          e.key == "frozen_prefix" || e.key == "epochs") {
        continue;
      }
      apply_scalar(cfg, e, milestones_set);
    }
  }
  // Order-sensitive keys, applied once the final values are known.
  for (const std::string key : {"epochs", "eval_steps", "frozen_prefix"}) {
    const Entry* last = nullptr;
    for (const auto* list : {&file_entries, &flag_entries}) {
      for (const Entry& e : *list) {
        if (e.key == key) last = &e;
      }
    }
    if (last) apply_scalar(cfg, *last, milestones_set);
  }
  for (auto& a : cfg.eval_attacks) a.frozen_prefix = cfg.frozen_prefix;
  if (!milestones_set) cfg.schedule.milestones = default_milestones(cfg.epochs);
  cfg.schedule.base_lr = cfg.optimizer.lr;
  try {
    cfg.schedule.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("key 'milestones'/'lr_decay': ") + e.what());
  }

  if (command == Command::run) {
    if (!present.count("method")) throw ConfigError("missing required key 'method' (st, sam or at)");
    auto require = [&](const char* key) {
      if (!present.count(key)) {
        throw ConfigError(std::string("method=") + to_string(cfg.method) +
                          " requires key '" + key + "'");
      }
    };
    auto reject = [&](const char* key) {
      if (present.count(key)) {
        throw ConfigError(std::string("key '") + key + "' does not apply to method=" +
                          to_string(cfg.method));
      }
    };
    switch (cfg.method) {
      case Method::st:
        reject("rho");
        reject("at_norm");
        reject("at_eps");
        reject("at_steps");
        break;
      case Method::sam:
        require("rho");
        reject("at_norm");
        reject("at_eps");
        reject("at_steps");
        break;
      case Method::at:
        require("at_norm");
        require("at_eps");
        reject("rho");
        break;
    }
  }
  return cfg;
}

TheoryGrid parse_theory_args(std::span<const std::string> args) {
  std::optional<std::string> file;
  const auto entries = read_flags(args, file);
  TheoryGrid grid;
  if (file) throw ConfigError("the theory command takes no config file");
  for (const Entry& e : entries) {
    const std::string& k = e.key;
    if (k == "p") {
      grid.p = parse_real_list(k, e.value);
    } else if (k == "eta") {
      grid.eta = parse_real_list(k, e.value);
    } else if (k == "d") {
      grid.d = parse_int(k, e.value, 1);
    } else if (k == "at_fractions") {
      grid.at_fractions = parse_real_list(k, e.value);
    } else if (k == "sam_eps") {
      grid.sam_eps = parse_real_list(k, e.value);
    } else if (k == "approx_eps") {
      grid.approx_eps = parse_real_list(k, e.value);
    } else if (k == "relation_fractions") {
      grid.relation_fractions = parse_real_list(k, e.value);
    } else if (k == "tol") {
      grid.tol = parse_real(k, e.value);
      if (!(grid.tol > 0.0)) throw ConfigError("key 'tol': must be > 0");
    } else if (k == "strict") {
      grid.strict = parse_bool(k, e.value);
    } else if (k == "out") {
      grid.out_path = trim(e.value);
    } else if (k == "format") {
      grid.format = parse_format(e.value);
    } else {
      throw ConfigError("unknown key '" + k + "' (" + e.origin + ")");
    }
  }
  if (grid.p.empty() || grid.eta.empty()) throw ConfigError("theory grid needs at least one p and eta");
  return grid;
}

}  // namespace samrobust
