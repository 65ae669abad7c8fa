#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "samrobust/diffcore.hpp"
#include "samrobust/theory.hpp"

namespace samrobust {

struct SyntheticSpec {
  TheoryParams tp;
  int n_train = 5000;
  int n_eval = 2000;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Samples with labels stored as class indices (y = -1 -> 0, y = +1 -> 1).
/// Column 0 is the robust feature, columns 1..d the non-robust ones.
struct Dataset {
  Matrix inputs;
  std::vector<int> labels;
  std::optional<SyntheticSpec> provenance;  // empty for loaded files

  Eigen::Index size() const { return inputs.rows(); }
  Eigen::Index dim() const { return inputs.cols(); }
  Batch as_batch() const { return Batch{inputs, labels}; }
};

struct SplitData {
  Dataset train;
  Dataset eval;
};

/// Train and eval come from disjoint sub-streams of spec.seed; every sample
/// has its own counter-based stream, so the result is bit-reproducible.
SplitData sample(const SyntheticSpec& spec);

/// Shuffled partition into batches of batch_size (the last may be short).
std::vector<Batch> batches(const Dataset& ds, int batch_size, std::uint64_t shuffle_seed);

/// The permutation batches() applies.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t shuffle_seed);

/// Comma-separated file with a header row, numeric feature columns and a
/// final integer label column. Throws IoError / ConfigError.
Dataset load_delimited(const std::string& path);

inline int label_to_class(int y) { return y > 0 ? 1 : 0; }
inline int class_to_label(int c) { return c == 1 ? 1 : -1; }

}  // namespace samrobust
