#include "bootmatch/engine.hpp"

#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "bootmatch/errors.hpp"
#include "bootmatch/rng.hpp"

namespace bootmatch::engine {

namespace {

void check_config(const BootstrapConfig& config, std::size_t total) {
  if (config.replicates < 1) {
    throw Error(ErrorCode::ConfigInvalid, "need at least one replicate");
  }
  if (!(config.ratio > 0.0 && config.ratio <= 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, "ratio must lie in (0,1]");
  }
  if (!(config.min_success_fraction > 0.0 && config.min_success_fraction <= 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, "min_success_fraction must lie in (0,1]");
  }
  const auto size =
      static_cast<std::size_t>(std::floor(static_cast<double>(total) * config.ratio));
  if (size < kMinSubsampleSize) {
    throw Error(ErrorCode::SampleTooSmall,
                "subsample size " + std::to_string(size) + " below minimum " +
                    std::to_string(kMinSubsampleSize));
  }
}

}  // namespace

std::vector<std::size_t> subsample_indices(std::size_t total, double q,
                                           bool with_replacement, std::uint64_t seed) {
  const auto size =
      static_cast<std::size_t>(std::floor(static_cast<double>(total) * q));
  if (size < kMinSubsampleSize) {
    throw Error(ErrorCode::SampleTooSmall,
                "subsample size " + std::to_string(size) + " below minimum " +
                    std::to_string(kMinSubsampleSize));
  }
  auto engine = make_engine(seed);
  std::vector<std::size_t> indices;
  if (with_replacement) {
    indices.resize(size);
    std::uniform_int_distribution<std::size_t> pick(0, total - 1);
    for (auto& idx : indices) idx = pick(engine);
  } else {
    indices.resize(total);
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    for (std::size_t i = 0; i < size; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, total - 1);
      std::swap(indices[i], indices[pick(engine)]);
    }
    indices.resize(size);
  }
  return indices;
}

inference::ReplicateResult run_replicate(const PanelDataset& dataset,
                                         const BootstrapConfig& config,
                                         std::size_t replicate_index) {
  inference::ReplicateResult result;
  result.replicate_index = replicate_index;
  result.replicate_seed = mix_seed(config.master_seed, replicate_index);
  try {
    const std::vector<std::size_t> indices = subsample_indices(
        dataset.n_subjects(), config.ratio, config.with_replacement,
        result.replicate_seed);
    const PanelDataset sample = subset(dataset, indices);

    const propensity::Design design =
        propensity::build_design(sample, config.design_spec);
    const propensity::PropensityModel model =
        propensity::fit_propensity(design, sample.group);
    const std::vector<double> scores = propensity::predict_propensity(model, design);

    const auto caliper = matching::resolve_caliper(scores, config.caliper);
    const matching::MatchedSample matched =
        matching::nearest_neighbor_match(scores, sample.group, caliper);

    const stats::TestResult balance = matching::balance_test(sample, matched);

    const inference::EffectEstimate estimate =
        config.estimator == inference::Estimator::did
            ? inference::estimate_effect_did(sample, matched)
            : inference::estimate_effect_post(sample, matched);

    result.effect = estimate.effect;
    result.p_value = estimate.test.p_value;
    result.z_value = stats::signed_z_value(estimate.effect, estimate.test.p_value);
    result.pre_balance_p = balance.p_value;
    result.n_pairs = matched.n_pairs();
    result.pre_daily_diff = matching::matched_pre_period_differences(sample, matched);
    result.ok = true;
  } catch (const Error& e) {
    result.ok = false;
    result.failure_reason = std::string(error_code_name(e.code()));
  } catch (const std::exception& e) {
    result.ok = false;
    result.failure_reason = std::string("Unexpected: ") + e.what();
  }
  return result;
}

AggregateResult run(const PanelDataset& dataset, const BootstrapConfig& config) {
  validate(dataset);
  check_config(config, dataset.n_subjects());

  const std::size_t n = config.replicates;
  std::vector<inference::ReplicateResult> results(n);

  std::size_t workers = config.workers;
  if (workers == 0) {
    workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  }
  workers = std::min(workers, n);

  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) results[i] = run_replicate(dataset, config, i);
  } else {
    std::atomic<std::size_t> next{0};
    auto drain = [&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= n) break;
        results[i] = run_replicate(dataset, config, i);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(drain);
    for (auto& t : pool) t.join();
  }

  AggregateResult aggregate;
  aggregate.config_echo = config;
  aggregate.dataset_fingerprint = dataset_fingerprint(dataset);
  aggregate.replicates = std::move(results);

  std::vector<double> effects;
  std::vector<double> pvals;
  effects.reserve(n);
  pvals.reserve(n);
  for (const auto& r : aggregate.replicates) {
    if (r.ok) {
      effects.push_back(r.effect);
      pvals.push_back(r.p_value);
    } else {
      ++aggregate.failed_count;
      aggregate.warnings.push_back("replicate " + std::to_string(r.replicate_index) +
                                   " failed(" + r.failure_reason + ")");
    }
  }

  const double ok_fraction =
      static_cast<double>(effects.size()) / static_cast<double>(n);
  if (ok_fraction < config.min_success_fraction) {
    throw Error(ErrorCode::TooManyFailures,
                std::to_string(aggregate.failed_count) + " of " + std::to_string(n) +
                    " replicates failed (min success fraction " +
                    std::to_string(config.min_success_fraction) + ")");
  }

  aggregate.effect = stats::mean(effects);
  aggregate.effect_sd = std::sqrt(stats::sample_variance(effects));
  aggregate.multiplicity =
      multiplicity::summarize(pvals, effects, config.storey_lambda);
  aggregate.final_p = aggregate.multiplicity.final_p;
  for (auto& w : aggregate.multiplicity.warnings) {
    aggregate.warnings.push_back(std::move(w));
  }
  aggregate.multiplicity.warnings.clear();
  return aggregate;
}

}  // namespace bootmatch::engine
