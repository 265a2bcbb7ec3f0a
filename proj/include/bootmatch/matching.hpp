#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bootmatch/dataset.hpp"
#include "bootmatch/stats.hpp"

namespace bootmatch::matching {

// 1:1 matching without replacement on the propensity-logit scale.
struct MatchedSample {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (treated_row, control_row)
  std::size_t unmatched_treated = 0;
  std::optional<double> caliper_logit;
  double max_pair_distance = 0.0;

  std::size_t n_pairs() const { return pairs.size(); }
};

struct CaliperPolicy {
  enum class Mode { none, sd_multiple, fixed };
  Mode mode = Mode::sd_multiple;
  double value = 0.2;  // multiplier for sd_multiple, logit width for fixed

  bool operator==(const CaliperPolicy&) const = default;
};

double logit(double p);

std::optional<double> resolve_caliper(std::span<const double> scores,
                                      const CaliperPolicy& policy);

// Greedy 1:1 nearest-neighbor matching. Treated subjects are processed in
// descending logit order (ties by ascending row); each takes the unused
// control with the smallest |logit difference| (ties by ascending control
// row). A treated subject whose nearest unused control lies beyond the
// caliper is left unmatched.
MatchedSample nearest_neighbor_match(std::span<const double> scores,
                                     std::span<const std::uint8_t> groups,
                                     std::optional<double> caliper_logit);

// Welch test on pre-period means of matched treated vs matched control rows.
stats::TestResult balance_test(const PanelDataset& dataset, const MatchedSample& matched);

// Per-period mean response for two row sets: (treated_means, control_means).
std::pair<std::vector<double>, std::vector<double>> daily_group_means(
    const PanelDataset& dataset, std::span<const std::size_t> rows_t,
    std::span<const std::size_t> rows_c);

// Matched treated mean minus matched control mean for each pre period.
std::vector<double> matched_pre_period_differences(const PanelDataset& dataset,
                                                   const MatchedSample& matched);

}  // namespace bootmatch::matching
