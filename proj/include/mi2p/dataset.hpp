#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mi2p/vec.hpp"

namespace mi2p {

struct Dataset {
  std::vector<double> features;  // n x d, row major
  std::vector<double> labels;    // +-1
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<std::string> feature_names;
};

// CSV with a header row, one "label" column holding +-1 (0/1 is accepted and
// mapped to -1/+1 with a warning on stderr), remaining numeric columns as
// features. Throws DataError with row/column diagnostics.
Dataset load_csv_dataset(const std::string& path, bool standardize);

// Two Gaussian class clusters; default shape n=455, d=30.
Dataset synthetic_two_clusters(std::size_t n, std::size_t d,
                               std::uint64_t seed, bool standardize = true);

// In-place zero-mean / unit-variance per feature column (constant columns are
// left centered).
void standardize_features(Dataset& data);

}  // namespace mi2p
