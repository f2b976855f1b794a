#include "mi2p/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mi2p/errors.hpp"
#include "mi2p/rng.hpp"

namespace mi2p {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // Trim surrounding whitespace and CR.
    std::size_t a = field.find_first_not_of(" \t\r");
    std::size_t b = field.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? std::string()
                                         : field.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void standardize_features(Dataset& data) {
  for (std::size_t j = 0; j < data.d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) mean += data.features[i * data.d + j];
    mean /= static_cast<double>(data.n);
    double var = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
      const double c = data.features[i * data.d + j] - mean;
      var += c * c;
    }
    var /= static_cast<double>(data.n);
    const double inv_sd = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    for (std::size_t i = 0; i < data.n; ++i) {
      double& v = data.features[i * data.d + j];
      v = (v - mean) * inv_sd;
    }
  }
}

Dataset load_csv_dataset(const std::string& path, bool standardize) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("dataset '" + path + "' is empty");
  const std::vector<std::string> header = split_csv_line(line);
  std::size_t label_col = header.size();
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == "label") label_col = j;
  }
  if (label_col == header.size()) {
    throw DataError("dataset '" + path + "' has no 'label' column");
  }
  const std::size_t d = header.size() - 1;
  if (d == 0) throw DataError("dataset '" + path + "' has no feature columns");

  Dataset data;
  data.d = d;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j != label_col) data.feature_names.push_back(header[j]);
  }

  bool warned_01 = false;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataError("dataset '" + path + "' row " + std::to_string(row) +
                      ": expected " + std::to_string(header.size()) +
                      " columns, got " + std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      double value = 0.0;
      try {
        value = std::stod(fields[j]);
      } catch (const std::exception&) {
        throw DataError("dataset '" + path + "' row " + std::to_string(row) +
                        " column " + std::to_string(j + 1) +
                        ": not numeric ('" + fields[j] + "')");
      }
      if (j == label_col) {
        if (value == 0.0 || (value == 1.0 && !warned_01)) {
          // Peek: 0/1 labels are remapped below; warn once if a 0 shows up.
        }
        data.labels.push_back(value);
      } else {
        data.features.push_back(value);
      }
    }
  }
  data.n = data.labels.size();
  if (data.n == 0) throw DataError("dataset '" + path + "' has no data rows");

  bool has_zero = false, ok_pm1 = true;
  for (double y : data.labels) {
    if (y == 0.0) has_zero = true;
    if (y != 1.0 && y != -1.0) ok_pm1 = false;
  }
  if (!ok_pm1) {
    if (has_zero) {
      // 0/1 convention: map 0 -> -1, 1 -> +1.
      for (double& y : data.labels) {
        if (y == 0.0) {
          y = -1.0;
        } else if (y != 1.0) {
          throw DataError("dataset '" + path +
                          "': labels are neither +-1 nor 0/1");
        }
      }
      if (!warned_01) {
        std::fprintf(stderr,
                     "warning: dataset '%s' uses 0/1 labels; mapped to -1/+1\n",
                     path.c_str());
        warned_01 = true;
      }
    } else {
      throw DataError("dataset '" + path + "': labels must be +-1 (or 0/1)");
    }
  }
  if (standardize) standardize_features(data);
  return data;
}

Dataset synthetic_two_clusters(std::size_t n, std::size_t d,
                               std::uint64_t seed, bool standardize) {
  if (n == 0 || d == 0) throw ConfigError("synthetic dataset: n, d >= 1");
  Dataset data;
  data.n = n;
  data.d = d;
  data.features.assign(n * d, 0.0);
  data.labels.assign(n, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    data.feature_names.push_back("f" + std::to_string(j));
  }
  RngStream rng = RngStream::derive(seed, 0, 0, StreamPurpose::Dataset);
  // Two Gaussian clusters with correlated within-class covariance (a few
  // strong common factors) and a nearly separating mean direction orthogonal
  // to them. This mirrors the geometry of standardized medical tabular data:
  // an ill-conditioned covariance plus a far-away logistic optimum.
  const std::size_t n_factors = std::min<std::size_t>(5, d);
  const double amplitudes[5] = {8.0, 5.0, 3.0, 2.0, 1.5};
  std::vector<Point> factors;
  for (std::size_t k = 0; k < n_factors; ++k) {
    Point w(d, 0.0);
    for (double& v : w) v = rng.normal();
    for (const Point& prev : factors) {
      axpy(-dot(w, prev), prev, w);
    }
    const double wn = norm2(w);
    scale(1.0 / (wn > 0 ? wn : 1.0), w);
    factors.push_back(std::move(w));
  }
  Point center(d, 0.0);
  for (double& v : center) v = rng.normal();
  for (const Point& w : factors) axpy(-dot(center, w), w, center);
  const double cn = norm2(center);
  scale(5.0 / (cn > 0 ? cn : 1.0), center);

  for (std::size_t i = 0; i < n; ++i) {
    const double y = (i % 2 == 0) ? 1.0 : -1.0;
    data.labels[i] = y;
    double* row = data.features.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) row[j] = y * center[j] + rng.normal();
    for (std::size_t k = 0; k < n_factors; ++k) {
      const double load = amplitudes[k] * rng.normal();
      for (std::size_t j = 0; j < d; ++j) row[j] += load * factors[k][j];
    }
  }
  if (standardize) standardize_features(data);
  return data;
}

}  // namespace mi2p
