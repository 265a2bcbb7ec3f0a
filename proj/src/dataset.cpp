#include "bootmatch/dataset.hpp"

#include <cmath>
#include <cstring>

#include "bootmatch/errors.hpp"

namespace bootmatch {

namespace {

void check_matrix_finite(const Matrix& m, const char* name) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (!std::isfinite(m(r, c))) {
        throw Error(ErrorCode::NonFiniteValue,
                    std::string(name) + " has a non-finite entry at row " +
                        std::to_string(r) + ", column " + std::to_string(c));
      }
    }
  }
}

}  // namespace

std::size_t PanelDataset::treated_count() const {
  std::size_t n = 0;
  for (auto g : group) n += g;
  return n;
}

void validate(const PanelDataset& dataset) {
  const std::size_t n = dataset.group.size();
  if (dataset.features.rows != n || dataset.responses.rows != n) {
    throw Error(ErrorCode::RowCountMismatch,
                "features/group/responses row counts differ (" +
                    std::to_string(dataset.features.rows) + "/" + std::to_string(n) +
                    "/" + std::to_string(dataset.responses.rows) + ")");
  }
  if (!dataset.subject_ids.empty() && dataset.subject_ids.size() != n) {
    throw Error(ErrorCode::RowCountMismatch,
                "subject_ids count " + std::to_string(dataset.subject_ids.size()) +
                    " differs from row count " + std::to_string(n));
  }
  if (dataset.features.cols < 1) {
    throw Error(ErrorCode::DimensionMismatch, "at least one feature column required");
  }
  if (dataset.pre_periods < 1 || dataset.pre_periods >= dataset.responses.cols) {
    throw Error(ErrorCode::DegeneratePeriods,
                "pre_periods must satisfy 1 <= t < T, got t=" +
                    std::to_string(dataset.pre_periods) + " T=" +
                    std::to_string(dataset.responses.cols));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (dataset.group[i] > 1) {
      throw Error(ErrorCode::NonFiniteValue,
                  "group indicator must be 0 or 1 at row " + std::to_string(i));
    }
  }
  const std::size_t treated = dataset.treated_count();
  if (treated == 0 || treated == n) {
    throw Error(ErrorCode::SingleArmOnly,
                treated == 0 ? "no treated subjects" : "no control subjects");
  }
  check_matrix_finite(dataset.features, "features");
  check_matrix_finite(dataset.responses, "responses");
}

PanelDataset subset(const PanelDataset& dataset, std::span<const std::size_t> indices) {
  const std::size_t n = dataset.n_subjects();
  PanelDataset out;
  out.pre_periods = dataset.pre_periods;
  out.features = Matrix(indices.size(), dataset.features.cols);
  out.responses = Matrix(indices.size(), dataset.responses.cols);
  out.group.resize(indices.size());
  const bool has_ids = !dataset.subject_ids.empty();
  if (has_ids) out.subject_ids.resize(indices.size());

  for (std::size_t j = 0; j < indices.size(); ++j) {
    const std::size_t src = indices[j];
    if (src >= n) {
      throw Error(ErrorCode::IndexOutOfBounds,
                  "row index " + std::to_string(src) + " out of bounds (" +
                      std::to_string(n) + " rows)");
    }
    std::memcpy(&out.features.values[j * out.features.cols],
                &dataset.features.values[src * dataset.features.cols],
                dataset.features.cols * sizeof(double));
    std::memcpy(&out.responses.values[j * out.responses.cols],
                &dataset.responses.values[src * dataset.responses.cols],
                dataset.responses.cols * sizeof(double));
    out.group[j] = dataset.group[src];
    if (has_ids) out.subject_ids[j] = dataset.subject_ids[src];
  }
  return out;
}

namespace {

double row_range_mean(const PanelDataset& dataset, std::size_t row,
                      std::size_t first, std::size_t last) {
  if (row >= dataset.n_subjects()) {
    throw Error(ErrorCode::IndexOutOfBounds, "row " + std::to_string(row) + " out of bounds");
  }
  double total = 0.0;
  for (std::size_t c = first; c < last; ++c) total += dataset.responses(row, c);
  return total / static_cast<double>(last - first);
}

}  // namespace

double pre_period_mean(const PanelDataset& dataset, std::size_t row) {
  return row_range_mean(dataset, row, 0, dataset.pre_periods);
}

double post_period_mean(const PanelDataset& dataset, std::size_t row) {
  return row_range_mean(dataset, row, dataset.pre_periods, dataset.responses.cols);
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

void fnv_u64(std::uint64_t& h, std::uint64_t v) { fnv_bytes(h, &v, sizeof v); }

}  // namespace

std::uint64_t dataset_fingerprint(const PanelDataset& dataset) {
  std::uint64_t h = kFnvOffset;
  fnv_u64(h, dataset.n_subjects());
  fnv_u64(h, dataset.features.cols);
  fnv_u64(h, dataset.responses.cols);
  fnv_u64(h, dataset.pre_periods);
  fnv_bytes(h, dataset.group.data(), dataset.group.size());
  fnv_bytes(h, dataset.features.values.data(), dataset.features.values.size() * sizeof(double));
  fnv_bytes(h, dataset.responses.values.data(), dataset.responses.values.size() * sizeof(double));
  fnv_u64(h, dataset.subject_ids.size());
  for (const auto& id : dataset.subject_ids) {
    fnv_u64(h, id.size());
    fnv_bytes(h, id.data(), id.size());
  }
  return h;
}

}  // namespace bootmatch
