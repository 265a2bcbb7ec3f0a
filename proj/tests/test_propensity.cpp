#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"

#include "bootmatch/propensity.hpp"

using namespace bootmatch;
using test_support::expect_error;
using test_support::make_panel;

namespace {

// x=1: 8 treated / 2 control; x=0: 2 treated / 8 control. The saturated logit
// has intercept log(2/8) and slope log(8/2) - log(2/8).
propensity::Design saturated_design(std::vector<std::uint8_t>& labels) {
  propensity::Design design;
  design.matrix = Matrix(20, 2);
  labels.clear();
  std::size_t row = 0;
  auto add = [&](double x, std::uint8_t y, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i, ++row) {
      design.matrix(row, 0) = 1.0;
      design.matrix(row, 1) = x;
      labels.push_back(y);
    }
  };
  add(1.0, 1, 8);
  add(1.0, 0, 2);
  add(0.0, 1, 2);
  add(0.0, 0, 8);
  return design;
}

struct RandomProblem {
  propensity::Design design;
  std::vector<std::uint8_t> labels;
};

RandomProblem random_problem(std::mt19937_64& engine, std::size_t n, std::size_t p) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  RandomProblem prob;
  prob.design.matrix = Matrix(n, p + 1);
  std::vector<double> truth(p + 1);
  for (double& b : truth) b = normal(engine) * 0.8;
  for (std::size_t i = 0; i < n; ++i) {
    prob.design.matrix(i, 0) = 1.0;
    double eta = truth[0];
    for (std::size_t j = 1; j <= p; ++j) {
      const double x = normal(engine);
      prob.design.matrix(i, j) = x;
      eta += truth[j] * x;
    }
    prob.labels.push_back(unif(engine) < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0);
  }
  std::size_t ones = 0;
  for (auto y : prob.labels) ones += y;
  if (ones == 0 || ones == n) return random_problem(engine, n, p);  // resample
  return prob;
}

std::vector<double> fd_gradient(const Matrix& design,
                                const std::vector<std::uint8_t>& labels,
                                const std::vector<double>& beta, double ridge) {
  const double h = 1e-5;
  std::vector<double> grad(beta.size());
  for (std::size_t j = 0; j < beta.size(); ++j) {
    std::vector<double> hi = beta;
    std::vector<double> lo = beta;
    hi[j] += h;
    lo[j] -= h;
    grad[j] = (propensity::penalized_loglik(design, labels, hi, ridge) -
               propensity::penalized_loglik(design, labels, lo, ridge)) /
              (2.0 * h);
  }
  return grad;
}

}  // namespace

TEST_SUITE_BEGIN("propensity");

TEST_CASE("build_design shapes and standardization") {
  std::vector<std::vector<double>> features;
  std::vector<std::uint8_t> group;
  std::vector<std::vector<double>> responses;
  for (std::size_t i = 0; i < 8; ++i) {
    features.push_back({static_cast<double>(i), 3.0});  // second column constant
    group.push_back(i % 2 == 0 ? 1 : 0);
    std::vector<double> row(12);
    for (std::size_t l = 0; l < 12; ++l) row[l] = static_cast<double>(i) + 0.1 * l;
    responses.push_back(row);
  }
  const PanelDataset ds = make_panel(features, group, responses, 6);

  propensity::DesignSpec features_only{true, false, false};
  CHECK(propensity::build_design(ds, features_only).matrix.cols == 3);

  propensity::DesignSpec both{true, true, false};
  CHECK(propensity::build_design(ds, both).matrix.cols == 9);

  propensity::DesignSpec standardized{true, true, true};
  const propensity::Design design = propensity::build_design(ds, standardized);
  CHECK(design.scaling.size() == 8);
  CHECK(design.scaling[1].degenerate);  // the constant feature column
  for (std::size_t i = 0; i < ds.n_subjects(); ++i) {
    CHECK(design.matrix(i, 2) == 0.0);
  }
  // Non-degenerate columns end up with mean ~0 and unit spread.
  double total = 0.0;
  for (std::size_t i = 0; i < ds.n_subjects(); ++i) total += design.matrix(i, 1);
  CHECK(std::fabs(total) < 1e-12);

  expect_error(ErrorCode::EmptyDesign, [&] {
    propensity::build_design(ds, propensity::DesignSpec{false, false, true});
  });
}

TEST_CASE("fit recovers the saturated 2x2 closed form") {
  std::vector<std::uint8_t> labels;
  const propensity::Design design = saturated_design(labels);
  const auto model = propensity::fit_propensity(design, labels, 0.0);
  CHECK(model.converged);
  CHECK(model.coefficients[0] == doctest::Approx(-1.38629436).epsilon(1e-5));
  CHECK(model.coefficients[1] == doctest::Approx(2.77258872).epsilon(1e-5));

  const auto scores = propensity::predict_propensity(model, design);
  CHECK(scores[0] == doctest::Approx(0.8).epsilon(1e-5));   // x = 1 row
  CHECK(scores[19] == doctest::Approx(0.2).epsilon(1e-5));  // x = 0 row
}

TEST_CASE("noise covariate slope shrinks to zero") {
  std::mt19937_64 engine(99);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const std::size_t n = 5000;
  propensity::Design design;
  design.matrix = Matrix(n, 2);
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    design.matrix(i, 0) = 1.0;
    design.matrix(i, 1) = normal(engine);
    labels[i] = unif(engine) < 0.4 ? 1 : 0;
  }
  const auto model = propensity::fit_propensity(design, labels, 0.0);
  // se(slope) ~ 1 / sqrt(n * p(1-p) * var(x)).
  const double se = 1.0 / std::sqrt(n * 0.4 * 0.6);
  CHECK(std::fabs(model.coefficients[1]) < 3.0 * se);
}

TEST_CASE("ridge keeps separated data finite") {
  propensity::Design design;
  design.matrix = Matrix(12, 2);
  std::vector<std::uint8_t> labels(12);
  for (std::size_t i = 0; i < 12; ++i) {
    design.matrix(i, 0) = 1.0;
    design.matrix(i, 1) = static_cast<double>(i) - 5.5;
    labels[i] = i >= 6 ? 1 : 0;
  }
  const auto model = propensity::fit_propensity(design, labels, 1e-4, 200);
  CHECK(model.converged);
  for (double b : model.coefficients) CHECK(std::isfinite(b));
  CHECK(model.coefficients[1] > 0.0);
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937_64 engine(512);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto prob = random_problem(engine, 60 + trial, 2 + trial % 3);
    const double ridge = (trial % 2 == 0) ? 0.0 : 0.05;

    // At the optimum: absolute agreement where the gradient is near zero.
    const auto model = propensity::fit_propensity(prob.design, prob.labels, ridge);
    const auto analytic = propensity::penalized_gradient(prob.design.matrix, prob.labels,
                                                         model.std_coefficients, ridge);
    const auto numeric = fd_gradient(prob.design.matrix, prob.labels,
                                     model.std_coefficients, ridge);
    for (std::size_t j = 0; j < analytic.size(); ++j) {
      const double scale = std::max({1.0, std::fabs(analytic[j]), std::fabs(numeric[j])});
      CHECK(std::fabs(analytic[j] - numeric[j]) / scale < 1e-4);
    }

    // At a random point: strict relative agreement.
    std::vector<double> beta(model.std_coefficients.size());
    for (double& b : beta) b = 0.5 * normal(engine);
    const auto g1 = propensity::penalized_gradient(prob.design.matrix, prob.labels, beta, ridge);
    const auto g2 = fd_gradient(prob.design.matrix, prob.labels, beta, ridge);
    for (std::size_t j = 0; j < g1.size(); ++j) {
      CHECK(std::fabs(g1[j] - g2[j]) <=
            1e-4 * std::max({1e-3, std::fabs(g1[j]), std::fabs(g2[j])}));
    }
  }
}

TEST_CASE("penalized log-likelihood is nondecreasing over IRLS steps") {
  std::mt19937_64 engine(77);
  for (int trial = 0; trial < 10; ++trial) {
    auto prob = random_problem(engine, 150, 4);
    const auto model = propensity::fit_propensity(prob.design, prob.labels, 1e-6);
    REQUIRE(model.loglik_path.size() >= 2);
    for (std::size_t i = 1; i < model.loglik_path.size(); ++i) {
      CHECK(model.loglik_path[i] >= model.loglik_path[i - 1] - 1e-10);
    }
  }
}

TEST_CASE("standardized and raw fits agree when ridge is zero") {
  std::mt19937_64 engine(1234);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<double>> features;
  std::vector<std::uint8_t> group;
  std::vector<std::vector<double>> responses;
  for (std::size_t i = 0; i < 300; ++i) {
    const double u = normal(engine);
    features.push_back({5.0 + 2.0 * u + 0.3 * normal(engine), -3.0 + 0.1 * normal(engine)});
    group.push_back(unif(engine) < 1.0 / (1.0 + std::exp(-u)) ? 1 : 0);
    responses.push_back({u + normal(engine), u + normal(engine), normal(engine)});
  }
  const PanelDataset ds = make_panel(features, group, responses, 2);

  const auto design_std =
      propensity::build_design(ds, propensity::DesignSpec{true, true, true});
  const auto design_raw =
      propensity::build_design(ds, propensity::DesignSpec{true, true, false});
  const auto model_std = propensity::fit_propensity(design_std, ds.group, 0.0);
  const auto model_raw = propensity::fit_propensity(design_raw, ds.group, 0.0);

  for (std::size_t j = 0; j < model_std.coefficients.size(); ++j) {
    CHECK(model_std.coefficients[j] ==
          doctest::Approx(model_raw.coefficients[j]).epsilon(1e-6));
  }
  const auto scores_std = propensity::predict_propensity(model_std, design_std);
  const auto scores_raw = propensity::predict_propensity(model_raw, design_raw);
  double treated_fraction = 0.0;
  for (auto g : ds.group) treated_fraction += g;
  treated_fraction /= static_cast<double>(ds.n_subjects());
  double mean_score = 0.0;
  for (std::size_t i = 0; i < scores_std.size(); ++i) {
    CHECK(std::fabs(scores_std[i] - scores_raw[i]) < 1e-8);
    mean_score += scores_std[i];
  }
  mean_score /= static_cast<double>(scores_std.size());
  // Score equation of the intercept at ridge = 0.
  CHECK(std::fabs(mean_score - treated_fraction) < 1e-6);
}

TEST_CASE("predict handles edge inputs") {
  propensity::PropensityModel model;
  model.std_coefficients = {0.0, 0.0};
  model.coefficients = model.std_coefficients;
  propensity::Design design;
  design.matrix = Matrix(3, 2, 1.0);
  const auto half = propensity::predict_propensity(model, design);
  for (double s : half) CHECK(s == 0.5);

  model.std_coefficients = {1000.0, 1000.0};
  const auto clamped = propensity::predict_propensity(model, design);
  for (double s : clamped) CHECK(s == 1.0 - 1e-12);

  model.std_coefficients = {0.0, 0.0, 0.0};
  expect_error(ErrorCode::DimensionMismatch,
               [&] { propensity::predict_propensity(model, design); });
}

TEST_CASE("single-class labels are rejected") {
  propensity::Design design;
  design.matrix = Matrix(4, 2, 1.0);
  expect_error(ErrorCode::SingleClass, [&] {
    propensity::fit_propensity(design, std::vector<std::uint8_t>{1, 1, 1, 1});
  });
}

TEST_SUITE_END();
