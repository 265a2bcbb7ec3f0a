#pragma once

#include <optional>
#include <span>
#include <vector>

namespace bootmatch::stats {

// Outcome of a two-sided test. df is +infinity for z-based statistics.
struct TestResult {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;

  bool operator==(const TestResult&) const = default;
};

double mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);  // n-1 denominator

double normal_pdf(double x);
double normal_cdf(double x);

// Inverse of normal_cdf on (0,1). Acklam's rational approximation with one
// Halley refinement; round-trip error is below 1e-9 across (1e-12, 1-1e-12).
double normal_quantile(double p);

// Regularized incomplete beta I_x(a, b) via Lentz continued fraction,
// absolute tolerance 1e-12, at most 300 terms.
double regularized_incomplete_beta(double a, double b, double x);

double student_t_cdf(double x, double df);

TestResult welch_t_test(std::span<const double> a, std::span<const double> b);
TestResult paired_t_test(std::span<const double> diffs);

double silverman_bandwidth(std::span<const double> points);

// Gaussian kernel density estimate at each eval point. bandwidth omitted or
// <= 0 selects Silverman's rule. Contributions are accumulated over a sorted
// copy of the points, so the result does not depend on input order.
std::vector<double> gaussian_kde(std::span<const double> points,
                                 std::span<const double> eval_at,
                                 std::optional<double> bandwidth = std::nullopt);

// Signed z transform of a two-sided p-value: sign(effect) * Phi^-1(1 - p/2),
// with p clamped to [1e-15, 1-1e-15] first.
double signed_z_value(double effect, double p_value);

inline constexpr double kZTransformClamp = 1e-15;

}  // namespace bootmatch::stats
