#include "bootmatch/multiplicity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bootmatch/errors.hpp"
#include "bootmatch/stats.hpp"

namespace bootmatch::multiplicity {

namespace {

void check_pvalues(std::span<const double> pvals) {
  if (pvals.empty()) {
    throw Error(ErrorCode::InsufficientData, "need at least one p-value");
  }
  for (std::size_t i = 0; i < pvals.size(); ++i) {
    if (!(pvals[i] >= 0.0 && pvals[i] <= 1.0)) {
      throw Error(ErrorCode::OutOfRangeP,
                  "p-value at position " + std::to_string(i) + " outside [0,1]");
    }
  }
}

}  // namespace

std::vector<double> bonferroni(std::span<const double> pvals) {
  check_pvalues(pvals);
  const double n = static_cast<double>(pvals.size());
  std::vector<double> adjusted(pvals.size());
  for (std::size_t i = 0; i < pvals.size(); ++i) {
    adjusted[i] = std::min(1.0, pvals[i] * n);
  }
  return adjusted;
}

std::vector<double> bh_adjust(std::span<const double> pvals) {
  check_pvalues(pvals);
  const std::size_t n = pvals.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });

  // Step-up pass: q at rank i is the minimum of p * N / rank over ranks >= i.
  std::vector<double> qvalues(n);
  double running = 1.0;
  for (std::size_t r = n; r-- > 0;) {
    const double raw = pvals[order[r]] * static_cast<double>(n) / static_cast<double>(r + 1);
    running = std::min(running, raw);
    qvalues[order[r]] = std::min(1.0, running);
  }
  return qvalues;
}

StoreyResult storey(std::span<const double> pvals, double lambda) {
  check_pvalues(pvals);
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw Error(ErrorCode::DomainError, "storey lambda must lie in (0,1)");
  }
  const std::size_t n = pvals.size();
  std::size_t above = 0;
  for (double p : pvals) {
    if (p > lambda) ++above;
  }
  StoreyResult result;
  if (above == 0) {
    result.pi0 = 1.0 / static_cast<double>(n);
    result.pi0_floored = true;
  } else {
    result.pi0 = std::min(
        1.0, static_cast<double>(above) / ((1.0 - lambda) * static_cast<double>(n)));
  }
  result.qvalues = bh_adjust(pvals);
  for (double& q : result.qvalues) q = std::min(1.0, result.pi0 * q);
  return result;
}

std::vector<double> lfdr_estimate(std::span<const double> zvals, double pi0) {
  if (zvals.size() < kLfdrMinReplicates) {
    throw Error(ErrorCode::InsufficientData,
                "local FDR estimation needs at least " +
                    std::to_string(kLfdrMinReplicates) + " z-values");
  }
  if (!(pi0 > 0.0 && pi0 <= 1.0)) {
    throw Error(ErrorCode::DomainError, "pi0 must lie in (0,1]");
  }
  const std::vector<double> density = stats::gaussian_kde(zvals, zvals);
  std::vector<double> lfdr(zvals.size());
  for (std::size_t i = 0; i < zvals.size(); ++i) {
    const double fhat = std::max(density[i], kLfdrDensityFloor);
    lfdr[i] = std::min(1.0, pi0 * stats::normal_pdf(zvals[i]) / fhat);
  }
  return lfdr;
}

MultiplicitySummary summarize(std::span<const double> pvals,
                              std::span<const double> effects,
                              double storey_lambda) {
  if (pvals.size() != effects.size()) {
    throw Error(ErrorCode::DimensionMismatch, "p-values and effects differ in length");
  }
  check_pvalues(pvals);

  MultiplicitySummary summary;
  summary.storey_lambda = storey_lambda;

  const std::vector<double> bonf = bonferroni(pvals);
  summary.bonferroni_min = *std::min_element(bonf.begin(), bonf.end());
  summary.bh_qvalues = bh_adjust(pvals);

  const StoreyResult st = storey(pvals, storey_lambda);
  summary.storey_pi0 = st.pi0;
  summary.storey_qvalues = st.qvalues;
  if (st.pi0_floored) {
    summary.warnings.push_back("storey: no p-value exceeded lambda; pi0 floored at 1/N");
  }

  std::vector<double> zvals(pvals.size());
  for (std::size_t i = 0; i < pvals.size(); ++i) {
    if (pvals[i] < stats::kZTransformClamp || pvals[i] > 1.0 - stats::kZTransformClamp) {
      summary.warnings.push_back("z-transform: p-value clamped at position " +
                                 std::to_string(i));
    }
    zvals[i] = stats::signed_z_value(effects[i], pvals[i]);
  }

  if (pvals.size() >= kLfdrMinReplicates) {
    summary.lfdr_values = lfdr_estimate(zvals, summary.storey_pi0);
    double total = 0.0;
    for (double v : summary.lfdr_values) total += v;
    summary.final_p = total / static_cast<double>(summary.lfdr_values.size());
    summary.warnings.push_back(
        "final_p is the mean local FDR of z-transformed replicate p-values "
        "(theoretical N(0,1) null)");
  } else {
    summary.lfdr_fallback = true;
    summary.final_p =
        *std::min_element(summary.bh_qvalues.begin(), summary.bh_qvalues.end());
    summary.warnings.push_back(
        "fewer than " + std::to_string(kLfdrMinReplicates) +
        " replicates: final_p falls back to the minimum BH q-value");
  }
  return summary;
}

}  // namespace bootmatch::multiplicity
