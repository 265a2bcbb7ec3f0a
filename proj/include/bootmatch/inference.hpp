#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bootmatch/dataset.hpp"
#include "bootmatch/matching.hpp"
#include "bootmatch/stats.hpp"

namespace bootmatch::inference {

enum class Estimator { did, post_only };

const char* estimator_name(Estimator e);

struct EffectEstimate {
  double effect = 0.0;
  stats::TestResult test;
};

// Matched difference-in-differences: per pair, (post - pre) change of the
// treated subject minus that of its control; paired t-test on the pair
// differences.
EffectEstimate estimate_effect_did(const PanelDataset& dataset,
                                   const matching::MatchedSample& matched);

// Post-period-only contrast of matched groups with a Welch test.
EffectEstimate estimate_effect_post(const PanelDataset& dataset,
                                    const matching::MatchedSample& matched);

// One bootstrap replicate's outcome.
struct ReplicateResult {
  std::size_t replicate_index = 0;
  double effect = 0.0;
  double p_value = 1.0;
  double z_value = 0.0;
  double pre_balance_p = 1.0;
  std::size_t n_pairs = 0;
  std::uint64_t replicate_seed = 0;
  bool ok = false;
  std::string failure_reason;            // empty when ok
  std::vector<double> pre_daily_diff;    // matched treated-control mean, pre periods

  bool operator==(const ReplicateResult&) const = default;
};

}  // namespace bootmatch::inference
