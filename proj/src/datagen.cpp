#include "samrobust/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "samrobust/error.hpp"
#include "samrobust/rng.hpp"

namespace samrobust {

namespace {

constexpr std::uint64_t kTrainStream = 0x7472'6169'6eULL;  // "train"
constexpr std::uint64_t kEvalStream = 0x6576'616cULL;      // "eval"

Dataset draw(const SyntheticSpec& spec, int n, std::uint64_t stream) {
  const TheoryParams& tp = spec.tp;
  Dataset ds;
  ds.inputs.resize(n, tp.d + 1);
  ds.labels.resize(static_cast<std::size_t>(n));
  ds.provenance = spec;
  const std::uint64_t split_seed = derive_seed(spec.seed, stream);
  for (int i = 0; i < n; ++i) {
    CounterRng rng(split_seed, static_cast<std::uint64_t>(i));
    const int y = rng.uniform() < 0.5 ? -1 : 1;
    const bool agrees = rng.uniform() < tp.p;
    ds.inputs(i, 0) = agrees ? y : -y;
    for (int j = 1; j <= tp.d; ++j) ds.inputs(i, j) = tp.eta * y + rng.normal();
    ds.labels[static_cast<std::size_t>(i)] = label_to_class(y);
  }
  return ds;
}

}  // namespace

void SyntheticSpec::validate() const {
  // eta = 0 is allowed here (degenerate but well defined sampling).
  if (!(tp.p > 0.5 && tp.p < 1.0)) throw ConfigError("data: p must lie in (0.5, 1)");
  if (!(tp.eta >= 0.0)) throw ConfigError("data: eta must be >= 0");
  if (tp.d < 1) throw ConfigError("data: d must be >= 1");
  if (n_train < 1) throw ConfigError("data: n_train must be >= 1");
  if (n_eval < 1) throw ConfigError("data: n_eval must be >= 1");
}

SplitData sample(const SyntheticSpec& spec) {
  spec.validate();
  return {draw(spec, spec.n_train, kTrainStream), draw(spec, spec.n_eval, kEvalStream)};
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t shuffle_seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  CounterRng rng(shuffle_seed, 0);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(idx[i - 1], idx[rng.below(i)]);
  }
  return idx;
}

std::vector<Batch> batches(const Dataset& ds, int batch_size, std::uint64_t shuffle_seed) {
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  const auto n = static_cast<std::size_t>(ds.size());
  const auto order = shuffled_indices(n, shuffle_seed);
  const auto bs = static_cast<std::size_t>(batch_size);
  std::vector<Batch> out;
  out.reserve((n + bs - 1) / bs);
  for (std::size_t start = 0; start < n; start += bs) {
    const std::size_t len = std::min(bs, n - start);
    Batch b{Matrix(static_cast<Eigen::Index>(len), ds.dim()), std::vector<int>(len)};
    for (std::size_t r = 0; r < len; ++r) {
      const std::size_t src = order[start + r];
      b.inputs.row(static_cast<Eigen::Index>(r)) = ds.inputs.row(static_cast<Eigen::Index>(src));
      b.labels[r] = ds.labels[src];
    }
    out.push_back(std::move(b));
  }
  return out;
}

Dataset load_delimited(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset", path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": missing header row");
  const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (columns < 2) throw ConfigError(path + ": need at least one feature and a label column");

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      while (first < last && *first == ' ') ++first;
      while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
      if (col + 1 < columns) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last) {
          throw ConfigError(path + ":" + std::to_string(line_no) + ": column " +
                            std::to_string(col + 1) + " is not a number");
        }
        values.push_back(v);
      } else {
        int y = 0;
        auto [ptr, ec] = std::from_chars(first, last, y);
        if (ec != std::errc() || ptr != last || y < 0) {
          throw ConfigError(path + ":" + std::to_string(line_no) +
                            ": label must be a non-negative integer");
        }
        labels.push_back(y);
      }
      ++col;
    }
    if (col != columns) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(columns) + " columns, found " + std::to_string(col));
    }
  }
  if (labels.empty()) throw ConfigError(path + ": no data rows");

  Dataset ds;
  const auto d = static_cast<Eigen::Index>(columns - 1);
  ds.inputs.resize(static_cast<Eigen::Index>(labels.size()), d);
  for (std::size_t r = 0; r < labels.size(); ++r)
    for (Eigen::Index c = 0; c < d; ++c)
      ds.inputs(static_cast<Eigen::Index>(r), c) = values[r * static_cast<std::size_t>(d) + static_cast<std::size_t>(c)];
  ds.labels = std::move(labels);
  return ds;
}

}  // namespace samrobust
