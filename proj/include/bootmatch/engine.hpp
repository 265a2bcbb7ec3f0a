#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bootmatch/dataset.hpp"
#include "bootmatch/inference.hpp"
#include "bootmatch/matching.hpp"
#include "bootmatch/multiplicity.hpp"
#include "bootmatch/propensity.hpp"

namespace bootmatch::engine {

struct BootstrapConfig {
  std::size_t replicates = 300;                  // N
  double ratio = 0.025;                          // q, subsample fraction
  bool with_replacement = false;
  std::uint64_t master_seed = 0;
  std::size_t workers = 0;                       // 0 = auto-detect
  double min_success_fraction = 0.9;
  inference::Estimator estimator = inference::Estimator::did;
  propensity::DesignSpec design_spec{};
  matching::CaliperPolicy caliper{};
  double storey_lambda = multiplicity::kDefaultStoreyLambda;

  bool operator==(const BootstrapConfig&) const = default;
};

struct AggregateResult {
  double effect = 0.0;      // mean effect over ok replicates, index order
  double effect_sd = 0.0;   // sample sd over ok replicates
  double final_p = 1.0;
  multiplicity::MultiplicitySummary multiplicity;
  std::vector<inference::ReplicateResult> replicates;
  std::size_t failed_count = 0;
  BootstrapConfig config_echo;
  std::uint64_t dataset_fingerprint = 0;
  std::vector<std::string> warnings;

  bool operator==(const AggregateResult&) const = default;
};

inline constexpr std::size_t kMinSubsampleSize = 4;

// floor(total * q) indices; without replacement draws a uniform subset via a
// partial Fisher-Yates shuffle, with replacement draws independently.
// Deterministic given the seed.
std::vector<std::size_t> subsample_indices(std::size_t total, double q,
                                           bool with_replacement, std::uint64_t seed);

// Subsample -> propensity fit -> matching -> balance -> effect estimate.
// Never throws: any failure is captured in the result's status.
inference::ReplicateResult run_replicate(const PanelDataset& dataset,
                                         const BootstrapConfig& config,
                                         std::size_t replicate_index);

// Runs all replicates (concurrently up to config.workers) and aggregates in
// ascending replicate order, so the output is independent of scheduling.
AggregateResult run(const PanelDataset& dataset, const BootstrapConfig& config);

}  // namespace bootmatch::engine
