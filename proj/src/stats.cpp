#include "bootmatch/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bootmatch/errors.hpp"

namespace bootmatch::stats {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt2Pi = 2.5066282746310002;

// Lentz evaluation of the incomplete beta continued fraction.
double incomplete_beta_cf(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kTol = 1e-12;
  constexpr int kMaxIter = 300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;

  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;

  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kTol) break;
  }
  return h;
}

// Acklam's rational approximation to the standard normal quantile.
double normal_quantile_approx(double p) {
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double two_sided_p(double statistic, double df) {
  return 2.0 * student_t_cdf(-std::fabs(statistic), df);
}

}  // namespace

double mean(std::span<const double> xs) {
  double total = 0.0;
  for (double x : xs) total += x;
  return total / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) {
    const double d = x - m;
    ss += d * d;
  }
  return ss / static_cast<double>(n - 1);
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::DomainError, "normal_quantile requires 0 < p < 1");
  }
  double x = normal_quantile_approx(p);
  // One Halley step against the erfc-based CDF; skipped where exp(x^2/2)
  // would overflow (the raw approximation is already ~1e-9 there).
  if (0.5 * x * x < 700.0) {
    const double e = normal_cdf(x) - p;
    const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
    if (std::isfinite(u)) {
      x -= u / (1.0 + 0.5 * x * u);
    }
  }
  return x;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw Error(ErrorCode::DomainError, "incomplete beta requires a > 0, b > 0");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;

  const double log_prefactor = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                               a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(log_prefactor);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * incomplete_beta_cf(a, b, x) / a;
  }
  return 1.0 - bt * incomplete_beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double x, double df) {
  if (!(df > 0.0)) {
    throw Error(ErrorCode::DomainError, "student_t_cdf requires df > 0");
  }
  if (x == 0.0) return 0.5;
  const double tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, df / (df + x * x));
  return x > 0.0 ? 1.0 - tail : tail;
}

TestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  if (na < 2 || nb < 2) {
    throw Error(ErrorCode::DegenerateSample, "welch_t_test needs two samples of size >= 2");
  }
  const double ma = mean(a);
  const double mb = mean(b);
  const double va = sample_variance(a);
  const double vb = sample_variance(b);
  if (va == 0.0 && vb == 0.0) {
    if (ma == mb) {
      return {0.0, static_cast<double>(na + nb - 2), 1.0};
    }
    throw Error(ErrorCode::DegenerateSample,
                "both samples have zero variance with differing means (p would be 0)");
  }
  const double va_n = va / static_cast<double>(na);
  const double vb_n = vb / static_cast<double>(nb);
  const double se = std::sqrt(va_n + vb_n);
  const double statistic = (ma - mb) / se;
  const double df = (va_n + vb_n) * (va_n + vb_n) /
                    (va_n * va_n / static_cast<double>(na - 1) +
                     vb_n * vb_n / static_cast<double>(nb - 1));
  return {statistic, df, two_sided_p(statistic, df)};
}

TestResult paired_t_test(std::span<const double> diffs) {
  const std::size_t n = diffs.size();
  if (n < 2) {
    throw Error(ErrorCode::DegenerateSample, "paired_t_test needs at least 2 differences");
  }
  const double m = mean(diffs);
  const double v = sample_variance(diffs);
  const double df = static_cast<double>(n - 1);
  if (v == 0.0) {
    if (m == 0.0) {
      return {0.0, df, 1.0};
    }
    throw Error(ErrorCode::DegenerateSample,
                "zero-variance differences with nonzero mean (p would be 0)");
  }
  const double statistic = m / std::sqrt(v / static_cast<double>(n));
  return {statistic, df, two_sided_p(statistic, df)};
}

double silverman_bandwidth(std::span<const double> points) {
  if (points.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "bandwidth selection needs >= 2 points");
  }
  double spread = std::sqrt(sample_variance(points));
  if (spread == 0.0) {
    // All points coincide; fall back to a scale the kernel can work with.
    const double center = std::fabs(mean(points));
    spread = center > 0.0 ? center : 1.0;
  }
  return 1.06 * spread * std::pow(static_cast<double>(points.size()), -0.2);
}

std::vector<double> gaussian_kde(std::span<const double> points,
                                 std::span<const double> eval_at,
                                 std::optional<double> bandwidth) {
  if (points.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "gaussian_kde needs >= 2 points");
  }
  double h = bandwidth.value_or(0.0);
  if (h <= 0.0) h = silverman_bandwidth(points);

  std::vector<double> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end());

  const double scale = 1.0 / (static_cast<double>(sorted.size()) * h);
  std::vector<double> density(eval_at.size(), 0.0);
  for (std::size_t i = 0; i < eval_at.size(); ++i) {
    double total = 0.0;
    for (double p : sorted) {
      total += normal_pdf((eval_at[i] - p) / h);
    }
    density[i] = total * scale;
  }
  return density;
}

double signed_z_value(double effect, double p_value) {
  const double clamped =
      std::clamp(p_value, kZTransformClamp, 1.0 - kZTransformClamp);
  const double z = normal_quantile(1.0 - 0.5 * clamped);
  return effect < 0.0 ? -z : z;
}

}  // namespace bootmatch::stats
