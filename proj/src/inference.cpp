#include "bootmatch/inference.hpp"

#include "bootmatch/errors.hpp"

namespace bootmatch::inference {

const char* estimator_name(Estimator e) {
  return e == Estimator::did ? "did" : "post_only";
}

EffectEstimate estimate_effect_did(const PanelDataset& dataset,
                                   const matching::MatchedSample& matched) {
  if (matched.pairs.size() < 2) {
    throw Error(ErrorCode::DegenerateSample, "DID needs at least 2 matched pairs");
  }
  std::vector<double> diffs;
  diffs.reserve(matched.pairs.size());
  for (const auto& [t_row, c_row] : matched.pairs) {
    const double change_t = post_period_mean(dataset, t_row) - pre_period_mean(dataset, t_row);
    const double change_c = post_period_mean(dataset, c_row) - pre_period_mean(dataset, c_row);
    diffs.push_back(change_t - change_c);
  }
  EffectEstimate out;
  out.effect = stats::mean(diffs);
  out.test = stats::paired_t_test(diffs);
  return out;
}

EffectEstimate estimate_effect_post(const PanelDataset& dataset,
                                    const matching::MatchedSample& matched) {
  if (matched.pairs.size() < 2) {
    throw Error(ErrorCode::DegenerateSample, "post-only contrast needs at least 2 matched pairs");
  }
  std::vector<double> post_t;
  std::vector<double> post_c;
  post_t.reserve(matched.pairs.size());
  post_c.reserve(matched.pairs.size());
  for (const auto& [t_row, c_row] : matched.pairs) {
    post_t.push_back(post_period_mean(dataset, t_row));
    post_c.push_back(post_period_mean(dataset, c_row));
  }
  EffectEstimate out;
  out.effect = stats::mean(post_t) - stats::mean(post_c);
  out.test = stats::welch_t_test(post_t, post_c);
  return out;
}

}  // namespace bootmatch::inference
