#pragma once

#include "fcls/edge_vector.hpp"
#include "fcls/loss.hpp"
#include "fcls/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace fcls {

enum class ThresholdKind { Hard, Soft };

/// Entrywise generalized thresholding: |T(z)| <= |z|, T(z) = 0 for |z| <= gamma,
/// |T(z) - z| <= gamma.
inline double generalized_threshold(double z, double gamma, ThresholdKind kind) {
  if (gamma < 0) throw std::invalid_argument("generalized_threshold: gamma must be >= 0");
  switch (kind) {
    case ThresholdKind::Hard: return std::abs(z) <= gamma ? 0.0 : z;
    case ThresholdKind::Soft: return soft_threshold(z, gamma);
  }
  return 0.0;
}

inline Eigen::VectorXd generalized_threshold(const Eigen::VectorXd& z, double gamma,
                                             ThresholdKind kind) {
  Eigen::VectorXd out(z.size());
  for (Index l = 0; l < z.size(); ++l) out(l) = generalized_threshold(z(l), gamma, kind);
  return out;
}

/// Deterministic permutation-based equal split into folds.
inline std::vector<int> cv_fold_assignment(Index n, int folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("cv_fold_assignment: folds must be >= 2");
  if (n < folds) throw std::invalid_argument("cv_fold_assignment: fewer samples than folds");
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed);
  // Fisher-Yates with our own RNG so the split is stable across platforms
  for (Index i = n - 1; i > 0; --i) {
    Index j = Index(rng.uniform_int(std::uint64_t(i + 1)));
    std::swap(perm[i], perm[j]);
  }
  std::vector<int> assign(n);
  for (Index i = 0; i < n; ++i) assign[perm[i]] = int(i % folds);
  return assign;
}

/// Default log-spaced threshold grid from max |b_ok| down 3 decades, plus 0.
inline std::vector<double> default_threshold_grid(double max_abs, int n_points = 30) {
  std::vector<double> grid;
  if (max_abs > 0)
    for (int k = 0; k < n_points; ++k)
      grid.push_back(max_abs * std::pow(10.0, -3.0 * k / (n_points - 1)));
  grid.push_back(0.0);
  return grid;
}

struct CvSelection {
  double gamma_star = 0;
  Eigen::VectorXd init;
};

/// CV-tuned threshold for shrinkage/sequence data: samples are n rows of
/// edge-vector observations; the train-fold mean is thresholded and scored
/// against the held-out fold mean in squared error. Ties break toward larger
/// gamma (sparser init).
inline CvSelection cv_select_threshold(const Eigen::MatrixXd& samples, ThresholdKind kind,
                                       int folds, std::vector<double> grid, std::uint64_t seed) {
  const Index n = samples.rows();
  if (grid.empty()) throw std::invalid_argument("cv_select_threshold: empty grid");
  std::vector<int> assign = cv_fold_assignment(n, folds, seed);
  std::sort(grid.begin(), grid.end(), std::greater<double>());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  double best_err = std::numeric_limits<double>::infinity();
  double best_gamma = grid.front();
  for (double gamma : grid) {
    double err = 0;
    for (int f = 0; f < folds; ++f) {
      Eigen::VectorXd train_mean = Eigen::VectorXd::Zero(samples.cols());
      Eigen::VectorXd test_mean = Eigen::VectorXd::Zero(samples.cols());
      Index n_train = 0, n_test = 0;
      for (Index i = 0; i < n; ++i) {
        if (assign[i] == f) {
          test_mean += samples.row(i);
          ++n_test;
        } else {
          train_mean += samples.row(i);
          ++n_train;
        }
      }
      train_mean /= double(n_train);
      test_mean /= double(n_test);
      err += (generalized_threshold(train_mean, gamma, kind) - test_mean).squaredNorm();
    }
    err /= folds;
    if (err < best_err - 1e-15) {  // grid is descending, so ties keep larger gamma
      best_err = err;
      best_gamma = gamma;
    }
  }
  Eigen::VectorXd full_mean = samples.colwise().mean();
  return {best_gamma, generalized_threshold(full_mean, best_gamma, kind)};
}

/// CV-tuned Lasso initializer for linear / logistic models: gamma_star
/// minimizes fold-averaged predictive loss; the init is the full-data Lasso at
/// gamma_star, i.e. weighted_lasso with uniform weights 2*gamma.
inline CvSelection cv_select_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Index d,
                                   bool logistic, double ridge, int folds,
                                   std::vector<double> grid, std::uint64_t seed,
                                   const SolverOptions& opts = {}) {
  if (grid.empty()) throw std::invalid_argument("cv_select_lasso: empty grid");
  const Index n = X.rows();
  std::vector<int> assign = cv_fold_assignment(n, folds, seed);
  std::sort(grid.begin(), grid.end(), std::greater<double>());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  auto make_model = [&](const Eigen::MatrixXd& Xm,
                        const Eigen::VectorXd& ym) -> std::unique_ptr<LossModel> {
    if (logistic) return std::make_unique<LogisticModel>(Xm, ym, d, ridge);
    return std::make_unique<LinearModel>(Xm, ym, d);
  };

  std::vector<double> fold_err(grid.size(), 0.0);
  for (int f = 0; f < folds; ++f) {
    std::vector<Index> train, test;
    for (Index i = 0; i < n; ++i) (assign[i] == f ? test : train).push_back(i);
    Eigen::MatrixXd Xtr(Index(train.size()), X.cols()), Xte(Index(test.size()), X.cols());
    Eigen::VectorXd ytr(Index(train.size())), yte(Index(test.size()));
    for (size_t i = 0; i < train.size(); ++i) {
      Xtr.row(Index(i)) = X.row(train[i]);
      ytr(Index(i)) = y(train[i]);
    }
    for (size_t i = 0; i < test.size(); ++i) {
      Xte.row(Index(i)) = X.row(test[i]);
      yte(Index(i)) = y(test[i]);
    }
    auto model = make_model(Xtr, ytr);
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(X.cols());
    for (size_t k = 0; k < grid.size(); ++k) {
      Eigen::VectorXd w = Eigen::VectorXd::Constant(X.cols(), 2 * grid[k]);
      Eigen::VectorXd beta = model->weighted_lasso(w, warm, opts);
      warm = beta;  // path continuation down the descending grid
      Eigen::VectorXd eta = Xte * beta;
      double err = 0;
      if (logistic) {
        for (Index i = 0; i < eta.size(); ++i)
          err += -yte(i) * eta(i) + LogisticModel::log1pexp(eta(i));  // deviance / 2
      } else {
        err = (yte - eta).squaredNorm();
      }
      fold_err[k] += err / double(test.size());
    }
  }
  size_t best = 0;
  for (size_t k = 1; k < grid.size(); ++k)
    if (fold_err[k] < fold_err[best] - 1e-15) best = k;

  auto model = make_model(X, y);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(X.cols(), 2 * grid[best]);
  return {grid[best], model->weighted_lasso(w, std::nullopt, opts)};
}

}  // namespace fcls
