#include "bootmatch/propensity.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "bootmatch/errors.hpp"

namespace bootmatch::propensity {

namespace {

double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

// log(1 + exp(eta)) without overflow.
double softplus(double eta) {
  if (eta > 0.0) return eta + std::log1p(std::exp(-eta));
  return std::log1p(std::exp(eta));
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

Design build_design(const PanelDataset& dataset, const DesignSpec& spec) {
  if (!spec.use_features && !spec.use_pre_period_responses) {
    throw Error(ErrorCode::EmptyDesign, "design spec selects no covariates");
  }
  const std::size_t n = dataset.n_subjects();
  const std::size_t k = spec.use_features ? dataset.n_features() : 0;
  const std::size_t t = spec.use_pre_period_responses ? dataset.pre_periods : 0;

  Design design;
  design.spec = spec;
  design.matrix = Matrix(n, 1 + k + t);
  for (std::size_t i = 0; i < n; ++i) {
    design.matrix(i, 0) = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
      design.matrix(i, 1 + j) = dataset.features(i, j);
    }
    for (std::size_t l = 0; l < t; ++l) {
      design.matrix(i, 1 + k + l) = dataset.responses(i, l);
    }
  }

  design.scaling.assign(k + t, ColumnScaling{});
  if (spec.standardize) {
    for (std::size_t c = 1; c < design.matrix.cols; ++c) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += design.matrix(i, c);
      const double mu = total / static_cast<double>(n);
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = design.matrix(i, c) - mu;
        ss += d * d;
      }
      const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
      ColumnScaling& sc = design.scaling[c - 1];
      sc.mean = mu;
      if (sd > 0.0) {
        sc.sd = sd;
        for (std::size_t i = 0; i < n; ++i) {
          design.matrix(i, c) = (design.matrix(i, c) - mu) / sd;
        }
      } else {
        sc.sd = 1.0;
        sc.degenerate = true;
        for (std::size_t i = 0; i < n; ++i) design.matrix(i, c) -= mu;
      }
    }
  }
  return design;
}

double penalized_loglik(const Matrix& design, std::span<const std::uint8_t> labels,
                        std::span<const double> beta, double ridge) {
  double ll = 0.0;
  for (std::size_t i = 0; i < design.rows; ++i) {
    double eta = 0.0;
    for (std::size_t j = 0; j < design.cols; ++j) eta += design(i, j) * beta[j];
    ll += labels[i] * eta - softplus(eta);
  }
  double penalty = 0.0;
  for (std::size_t j = 1; j < beta.size(); ++j) penalty += beta[j] * beta[j];
  return ll - 0.5 * ridge * penalty;
}

std::vector<double> penalized_gradient(const Matrix& design,
                                       std::span<const std::uint8_t> labels,
                                       std::span<const double> beta, double ridge) {
  std::vector<double> grad(beta.size(), 0.0);
  for (std::size_t i = 0; i < design.rows; ++i) {
    double eta = 0.0;
    for (std::size_t j = 0; j < design.cols; ++j) eta += design(i, j) * beta[j];
    const double resid = labels[i] - sigmoid(eta);
    for (std::size_t j = 0; j < design.cols; ++j) grad[j] += design(i, j) * resid;
  }
  for (std::size_t j = 1; j < beta.size(); ++j) grad[j] -= ridge * beta[j];
  return grad;
}

PropensityModel fit_propensity(const Design& design,
                               std::span<const std::uint8_t> labels,
                               double ridge, std::size_t max_iter, double tol) {
  const std::size_t n = design.matrix.rows;
  const std::size_t p1 = design.matrix.cols;
  if (labels.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "label count differs from design rows");
  }
  if (ridge < 0.0) {
    throw Error(ErrorCode::DomainError, "ridge must be >= 0");
  }
  std::size_t ones = 0;
  for (auto y : labels) ones += y;
  if (ones == 0 || ones == n) {
    throw Error(ErrorCode::SingleClass, "labels contain a single class");
  }

  // Degenerate (zero-spread) covariates are excluded from the solve and get
  // coefficient 0.
  std::vector<std::size_t> active;
  active.push_back(0);
  for (std::size_t c = 1; c < p1; ++c) {
    if (design.scaling.empty() || !design.scaling[c - 1].degenerate) active.push_back(c);
  }
  const std::size_t pa = active.size();

  Eigen::Map<const RowMatrix> full(design.matrix.values.data(),
                                   static_cast<Eigen::Index>(n),
                                   static_cast<Eigen::Index>(p1));
  RowMatrix x(n, pa);
  for (std::size_t j = 0; j < pa; ++j) {
    x.col(static_cast<Eigen::Index>(j)) = full.col(static_cast<Eigen::Index>(active[j]));
  }
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) y(static_cast<Eigen::Index>(i)) = labels[i];

  auto eval_ll = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = x * b;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      ll += y(i) * eta(i) - softplus(eta(i));
    }
    double penalty = 0.0;
    for (std::size_t j = 1; j < pa; ++j) {
      penalty += b(static_cast<Eigen::Index>(j)) * b(static_cast<Eigen::Index>(j));
    }
    return ll - 0.5 * ridge * penalty;
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pa));
  double ll_cur = eval_ll(beta);

  PropensityModel model;
  model.spec = design.spec;
  model.scaling = design.scaling;
  model.ridge = ridge;
  model.loglik_path.push_back(ll_cur);

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd mu(eta.size());
    Eigen::VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      mu(i) = sigmoid(eta(i));
      w(i) = std::max(mu(i) * (1.0 - mu(i)), 1e-10);
    }

    Eigen::VectorXd grad = x.transpose() * (y - mu);
    for (std::size_t j = 1; j < pa; ++j) {
      grad(static_cast<Eigen::Index>(j)) -= ridge * beta(static_cast<Eigen::Index>(j));
    }

    Eigen::MatrixXd hess = x.transpose() * w.asDiagonal() * x;
    for (std::size_t j = 1; j < pa; ++j) {
      hess(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) += ridge;
    }

    Eigen::VectorXd delta = hess.ldlt().solve(grad);
    if (!delta.allFinite()) {
      throw Error(ErrorCode::SingularDesign, "IRLS system is singular");
    }

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd candidate;
    double ll_next = ll_cur;
    for (int halving = 0; halving < 30; ++halving) {
      candidate = beta + step * delta;
      ll_next = eval_ll(candidate);
      if (ll_next >= ll_cur - 1e-10) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // stalled at a step-halving floor; keep the last iterate

    const double applied = step * delta.cwiseAbs().maxCoeff();
    beta = candidate;
    ll_cur = ll_next;
    model.loglik_path.push_back(ll_cur);
    model.iterations = iter + 1;
    if (applied < tol) {
      model.converged = true;
      break;
    }
  }

  model.final_penalized_loglik = ll_cur;
  model.std_coefficients.assign(p1, 0.0);
  for (std::size_t j = 0; j < pa; ++j) {
    model.std_coefficients[active[j]] = beta(static_cast<Eigen::Index>(j));
  }

  // Coefficients on the original covariate scale.
  model.coefficients = model.std_coefficients;
  if (!design.scaling.empty()) {
    double intercept = model.std_coefficients[0];
    for (std::size_t c = 1; c < p1; ++c) {
      const ColumnScaling& sc = design.scaling[c - 1];
      model.coefficients[c] = model.std_coefficients[c] / sc.sd;
      intercept -= model.std_coefficients[c] * sc.mean / sc.sd;
    }
    model.coefficients[0] = intercept;
  }

  for (double b : model.coefficients) {
    if (!std::isfinite(b)) {
      throw Error(ErrorCode::SingularDesign, "fit produced non-finite coefficients");
    }
  }
  return model;
}

std::vector<double> predict_propensity(const PropensityModel& model, const Design& design) {
  if (model.std_coefficients.size() != design.matrix.cols) {
    throw Error(ErrorCode::DimensionMismatch,
                "design has " + std::to_string(design.matrix.cols) +
                    " columns, model expects " +
                    std::to_string(model.std_coefficients.size()));
  }
  std::vector<double> scores(design.matrix.rows);
  for (std::size_t i = 0; i < design.matrix.rows; ++i) {
    double eta = 0.0;
    for (std::size_t j = 0; j < design.matrix.cols; ++j) {
      eta += design.matrix(i, j) * model.std_coefficients[j];
    }
    scores[i] = std::clamp(sigmoid(eta), kScoreClamp, 1.0 - kScoreClamp);
  }
  return scores;
}

}  // namespace bootmatch::propensity
