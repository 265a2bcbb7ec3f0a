#pragma once

#include <span>
#include <string>
#include <vector>

namespace bootmatch::multiplicity {

struct MultiplicitySummary {
  double bonferroni_min = 1.0;
  std::vector<double> bh_qvalues;
  double storey_pi0 = 1.0;
  double storey_lambda = 0.5;
  std::vector<double> storey_qvalues;
  std::vector<double> lfdr_values;     // empty when the small-N fallback fires
  double final_p = 1.0;                // mean local FDR, or min BH q under fallback
  bool lfdr_fallback = false;
  std::vector<std::string> warnings;

  bool operator==(const MultiplicitySummary&) const = default;
};

// adjusted_i = min(1, p_i * N)
std::vector<double> bonferroni(std::span<const double> pvals);

// Benjamini-Hochberg step-up q-values, mapped back to input order.
std::vector<double> bh_adjust(std::span<const double> pvals);

struct StoreyResult {
  double pi0 = 1.0;
  std::vector<double> qvalues;
  bool pi0_floored = false;  // no p-value exceeded lambda; pi0 floored at 1/N
};

// pi0 = min(1, #{p > lambda} / ((1 - lambda) * N)); q-values = pi0 * BH q.
StoreyResult storey(std::span<const double> pvals, double lambda);

// lfdr_i = min(1, pi0 * phi(z_i) / fhat(z_i)) with a Gaussian KDE density
// estimate fhat over all z-values (floored at 1e-12). Needs N >= 8.
std::vector<double> lfdr_estimate(std::span<const double> zvals, double pi0);

inline constexpr std::size_t kLfdrMinReplicates = 8;
inline constexpr double kLfdrDensityFloor = 1e-12;
inline constexpr double kDefaultStoreyLambda = 0.5;

// Runs every correction; z-values are derived from (effect sign, p-value).
MultiplicitySummary summarize(std::span<const double> pvals,
                              std::span<const double> effects,
                              double storey_lambda = kDefaultStoreyLambda);

}  // namespace bootmatch::multiplicity
