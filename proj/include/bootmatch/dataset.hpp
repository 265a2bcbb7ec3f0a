#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bootmatch {

// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols, cols};
  }

  bool operator==(const Matrix&) const = default;
};

// Balanced panel: one row per subject, responses observed over T periods of
// which the first pre_periods precede the treatment. group is 1 for treated.
struct PanelDataset {
  Matrix features;                       // (m+n) x k
  std::vector<std::uint8_t> group;       // (m+n), values 0/1
  Matrix responses;                      // (m+n) x T
  std::size_t pre_periods = 0;           // t, 1 <= t < T
  std::vector<std::string> subject_ids;  // optional; empty means absent

  std::size_t n_subjects() const { return group.size(); }
  std::size_t n_features() const { return features.cols; }
  std::size_t n_periods() const { return responses.cols; }
  std::size_t treated_count() const;
  std::size_t control_count() const { return n_subjects() - treated_count(); }

  bool operator==(const PanelDataset&) const = default;
};

// Throws Error with the first violated invariant (RowCountMismatch,
// NonFiniteValue, DegeneratePeriods, SingleArmOnly, ...).
void validate(const PanelDataset& dataset);

// Row gather; duplicate indices are allowed and produce duplicated rows.
PanelDataset subset(const PanelDataset& dataset, std::span<const std::size_t> indices);

double pre_period_mean(const PanelDataset& dataset, std::size_t row);
double post_period_mean(const PanelDataset& dataset, std::size_t row);

// FNV-1a content digest over dimensions, group, features, responses and ids.
std::uint64_t dataset_fingerprint(const PanelDataset& dataset);

}  // namespace bootmatch
