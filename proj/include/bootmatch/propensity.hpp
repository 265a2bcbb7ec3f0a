#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bootmatch/dataset.hpp"

namespace bootmatch::propensity {

// Which covariates enter the treatment-assignment model.
struct DesignSpec {
  bool use_features = true;
  bool use_pre_period_responses = true;
  bool standardize = true;

  bool operator==(const DesignSpec&) const = default;
};

// Centering/scaling applied to one covariate column. A degenerate column
// (zero spread) is centered with a unit divisor and flagged.
struct ColumnScaling {
  double mean = 0.0;
  double sd = 1.0;
  bool degenerate = false;

  bool operator==(const ColumnScaling&) const = default;
};

struct Design {
  Matrix matrix;                      // intercept column first
  std::vector<ColumnScaling> scaling; // one entry per covariate column
  DesignSpec spec;
};

struct PropensityModel {
  std::vector<double> coefficients;      // original covariate scale, intercept first
  std::vector<double> std_coefficients;  // fitting (standardized) scale
  DesignSpec spec;
  std::vector<ColumnScaling> scaling;
  bool converged = false;
  std::size_t iterations = 0;
  double final_penalized_loglik = 0.0;
  double ridge = 0.0;
  std::vector<double> loglik_path;  // penalized log-likelihood per accepted step
};

inline constexpr double kDefaultRidge = 1e-6;
inline constexpr std::size_t kDefaultMaxIter = 50;
inline constexpr double kDefaultTol = 1e-8;

Design build_design(const PanelDataset& dataset, const DesignSpec& spec);

// Ridge-penalized logistic fit by iteratively reweighted least squares with
// step halving. Non-convergence within max_iter is reported through
// PropensityModel::converged, not an error.
PropensityModel fit_propensity(const Design& design,
                               std::span<const std::uint8_t> labels,
                               double ridge = kDefaultRidge,
                               std::size_t max_iter = kDefaultMaxIter,
                               double tol = kDefaultTol);

// Scores for rows of a design built the same way as the fitting design.
// Clamped to [1e-12, 1 - 1e-12].
std::vector<double> predict_propensity(const PropensityModel& model, const Design& design);

// log-likelihood - (ridge/2) * ||beta without intercept||^2, evaluated on the
// given design matrix. Exposed for gradient checking.
double penalized_loglik(const Matrix& design, std::span<const std::uint8_t> labels,
                        std::span<const double> beta, double ridge);

std::vector<double> penalized_gradient(const Matrix& design,
                                       std::span<const std::uint8_t> labels,
                                       std::span<const double> beta, double ridge);

inline constexpr double kScoreClamp = 1e-12;

}  // namespace bootmatch::propensity
