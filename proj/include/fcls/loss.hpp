#pragma once

#include "fcls/edge_vector.hpp"
#include "fcls/graph.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

namespace fcls {

struct SolverError : std::runtime_error {
  double kkt_residual;
  SolverError(const std::string& what, double kkt) : std::runtime_error(what), kkt_residual(kkt) {}
};

struct RankDeficiencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  double kkt_tol = 1e-8;
  int max_sweeps = 10000;      // coordinate-descent sweeps
  int max_newton_iters = 100;  // proximal / damped Newton outer iterations
};

/// Convex loss over an edge vector of dimension D. Implementations provide
/// analytic value/gradient, a weighted-Lasso minimizer
///   argmin l(b) + (1/2) sum_l M_l |b_l|,
/// the killer-Lasso bound ||grad l(0)||_max, and minimization restricted to a
/// support mask (used by block oracles).
class LossModel {
 public:
  virtual ~LossModel() = default;

  virtual Index dim() const = 0;
  virtual Index nodes() const = 0;
  virtual double value(const Eigen::VectorXd& beta) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& beta) const = 0;

  virtual Eigen::VectorXd weighted_lasso(const Eigen::VectorXd& weights,
                                         std::optional<Eigen::VectorXd> warm_start = std::nullopt,
                                         const SolverOptions& opts = {}) const = 0;

  /// ||grad l(0)||_max; any uniform Lasso weight >= 2x this kills the solution.
  virtual double killer_lasso_bound() const = 0;

  /// Minimize l over {beta : beta_l = 0 off support} with an optional
  /// weighted-Lasso penalty on the support coordinates.
  virtual Eigen::VectorXd restricted_minimize(const std::vector<bool>& support,
                                              const Eigen::VectorXd* weights_on_support = nullptr,
                                              const SolverOptions& opts = {}) const = 0;

  EdgeVectord as_edge_vector(const Eigen::VectorXd& beta) const {
    return EdgeVectord(nodes(), beta);
  }
};

/// Max KKT violation of the weighted-Lasso first-order conditions at beta.
inline double kkt_residual(const LossModel& model, const Eigen::VectorXd& weights,
                           const Eigen::VectorXd& beta) {
  Eigen::VectorXd g = model.gradient(beta);
  double r = 0;
  for (Index l = 0; l < beta.size(); ++l) {
    double half_w = weights(l) / 2;
    if (beta(l) != 0)
      r = std::max(r, std::abs(g(l) + half_w * (beta(l) > 0 ? 1.0 : -1.0)));
    else
      r = std::max(r, std::max(std::abs(g(l)) - half_w, 0.0));
  }
  return r;
}

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

/// Frobenius shrinkage loss (1/2)||b_ok - beta||_2^2 towards an "ok" estimate.
class ShrinkageModel : public LossModel {
 public:
  explicit ShrinkageModel(EdgeVectord b_ok) : b_ok_(std::move(b_ok)) {}

  Index dim() const override { return b_ok_.size(); }
  Index nodes() const override { return b_ok_.d; }
  const EdgeVectord& b_ok() const { return b_ok_; }

  double value(const Eigen::VectorXd& beta) const override {
    return 0.5 * (b_ok_.values - beta).squaredNorm();
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& beta) const override {
    return beta - b_ok_.values;
  }

  Eigen::VectorXd weighted_lasso(const Eigen::VectorXd& weights,
                                 std::optional<Eigen::VectorXd> /*warm*/ = std::nullopt,
                                 const SolverOptions& /*opts*/ = {}) const override {
    Eigen::VectorXd out(dim());
    for (Index l = 0; l < dim(); ++l) out(l) = soft_threshold(b_ok_.values(l), weights(l) / 2);
    return out;
  }

  double killer_lasso_bound() const override { return b_ok_.values.cwiseAbs().maxCoeff(); }

  Eigen::VectorXd restricted_minimize(const std::vector<bool>& support,
                                      const Eigen::VectorXd* weights = nullptr,
                                      const SolverOptions& /*opts*/ = {}) const override {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim());
    for (Index l = 0; l < dim(); ++l)
      if (support[l])
        out(l) = weights ? soft_threshold(b_ok_.values(l), (*weights)(l) / 2) : b_ok_.values(l);
    return out;
  }

 private:
  EdgeVectord b_ok_;
};

namespace detail {

/// Cyclic coordinate descent for quadratic losses of the form
///   l(b) = (1/2) b^T H b - c^T b + const,
/// with penalty (1/2) sum M_l |b_l|. Coordinates off the mask (when given)
/// stay at zero. Converges on the KKT residual of the quadratic problem.
inline Eigen::VectorXd quadratic_weighted_lasso(const Eigen::MatrixXd& H, const Eigen::VectorXd& c,
                                                const Eigen::VectorXd& weights,
                                                Eigen::VectorXd beta,
                                                const std::vector<bool>* mask,
                                                const SolverOptions& opts) {
  const Index D = c.size();
  Eigen::VectorXd grad = H * beta - c;  // maintained incrementally
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    for (Index j = 0; j < D; ++j) {
      if (mask && !(*mask)[j]) continue;
      const double hjj = H(j, j);
      if (hjj <= 0) continue;
      double rho = hjj * beta(j) - grad(j);
      double next = soft_threshold(rho, weights(j) / 2) / hjj;
      double delta = next - beta(j);
      if (delta != 0) {
        grad += delta * H.col(j);
        beta(j) = next;
      }
    }
    double r = 0;
    for (Index j = 0; j < D; ++j) {
      if (mask && !(*mask)[j]) continue;
      double half_w = weights(j) / 2;
      if (beta(j) != 0)
        r = std::max(r, std::abs(grad(j) + half_w * (beta(j) > 0 ? 1.0 : -1.0)));
      else
        r = std::max(r, std::max(std::abs(grad(j)) - half_w, 0.0));
    }
    if (r <= opts.kkt_tol) return beta;
  }
  double r = 0;
  for (Index j = 0; j < D; ++j) {
    if (mask && !(*mask)[j]) continue;
    double half_w = weights(j) / 2;
    if (beta(j) != 0)
      r = std::max(r, std::abs(grad(j) + half_w * (beta(j) > 0 ? 1.0 : -1.0)));
    else
      r = std::max(r, std::max(std::abs(grad(j)) - half_w, 0.0));
  }
  throw SolverError("quadratic_weighted_lasso: sweep cap exceeded", r);
}

}  // namespace detail

/// Least-squares loss (1/2n)||y - X beta||_2^2.
class LinearModel : public LossModel {
 public:
  LinearModel(Eigen::MatrixXd X, Eigen::VectorXd y, Index d)
      : X_(std::move(X)), y_(std::move(y)), d_(d) {
    if (X_.cols() != num_edges(d_)) throw std::invalid_argument("LinearModel: X has wrong width");
    if (X_.rows() != y_.size()) throw std::invalid_argument("LinearModel: X rows != y length");
    n_ = X_.rows();
    gram_ = (X_.transpose() * X_) / double(n_);
    xty_ = X_.transpose() * y_ / double(n_);
  }

  Index dim() const override { return X_.cols(); }
  Index nodes() const override { return d_; }
  Index samples() const { return n_; }
  const Eigen::MatrixXd& X() const { return X_; }
  const Eigen::VectorXd& y() const { return y_; }

  double value(const Eigen::VectorXd& beta) const override {
    return (y_ - X_ * beta).squaredNorm() / (2.0 * n_);
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& beta) const override {
    return gram_ * beta - xty_;
  }

  Eigen::VectorXd weighted_lasso(const Eigen::VectorXd& weights,
                                 std::optional<Eigen::VectorXd> warm = std::nullopt,
                                 const SolverOptions& opts = {}) const override {
    Eigen::VectorXd init = warm ? *warm : Eigen::VectorXd::Zero(dim());
    return detail::quadratic_weighted_lasso(gram_, xty_, weights, std::move(init), nullptr, opts);
  }

  double killer_lasso_bound() const override { return xty_.cwiseAbs().maxCoeff(); }

  Eigen::VectorXd restricted_minimize(const std::vector<bool>& support,
                                      const Eigen::VectorXd* weights = nullptr,
                                      const SolverOptions& opts = {}) const override {
    std::vector<Index> idx;
    for (Index l = 0; l < dim(); ++l)
      if (support[l]) idx.push_back(l);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim());
    if (idx.empty()) return out;
    if (weights) {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(dim());
      for (Index l = 0; l < dim(); ++l)
        if (support[l]) w(l) = (*weights)(l);
      return detail::quadratic_weighted_lasso(gram_, xty_, w, Eigen::VectorXd::Zero(dim()),
                                              &support, opts);
    }
    Eigen::MatrixXd Xs(n_, Index(idx.size()));
    for (size_t k = 0; k < idx.size(); ++k) Xs.col(Index(k)) = X_.col(idx[k]);
    Eigen::MatrixXd gs = Xs.transpose() * Xs;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gs);
    if (!lu.isInvertible())
      throw RankDeficiencyError("restricted_minimize: X_S^T X_S is singular");
    Eigen::VectorXd bs = lu.solve(Xs.transpose() * y_);
    for (size_t k = 0; k < idx.size(); ++k) out(idx[k]) = bs(Index(k));
    return out;
  }

 private:
  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
  Index d_, n_;
  Eigen::MatrixXd gram_;  // X^T X / n
  Eigen::VectorXd xty_;   // X^T y / n
};

/// Logistic loss (1/n) sum(-y_i x_i^T b + log(1 + exp(x_i^T b)))
/// plus an optional ridge term (ridge/2)||b||_2^2.
class LogisticModel : public LossModel {
 public:
  LogisticModel(Eigen::MatrixXd X, Eigen::VectorXd y, Index d, double ridge = 0.0)
      : X_(std::move(X)), y_(std::move(y)), d_(d), ridge_(ridge) {
    if (X_.cols() != num_edges(d_)) throw std::invalid_argument("LogisticModel: X has wrong width");
    if (X_.rows() != y_.size()) throw std::invalid_argument("LogisticModel: X rows != y length");
    if (ridge_ < 0) throw std::invalid_argument("LogisticModel: ridge must be >= 0");
    n_ = X_.rows();
  }

  Index dim() const override { return X_.cols(); }
  Index nodes() const override { return d_; }
  Index samples() const { return n_; }
  double ridge() const { return ridge_; }
  const Eigen::MatrixXd& X() const { return X_; }
  const Eigen::VectorXd& y() const { return y_; }

  static double log1pexp(double t) {
    // overflow-safe log(1 + e^t)
    return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
  }
  static double sigmoid(double t) {
    return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
  }

  double value(const Eigen::VectorXd& beta) const override {
    Eigen::VectorXd eta = X_ * beta;
    double total = 0;
    for (Index i = 0; i < n_; ++i) total += -y_(i) * eta(i) + log1pexp(eta(i));
    return total / n_ + 0.5 * ridge_ * beta.squaredNorm();
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& beta) const override {
    Eigen::VectorXd eta = X_ * beta;
    Eigen::VectorXd mu(n_);
    for (Index i = 0; i < n_; ++i) mu(i) = sigmoid(eta(i));
    return X_.transpose() * (mu - y_) / double(n_) + ridge_ * beta;
  }

  Eigen::VectorXd weighted_lasso(const Eigen::VectorXd& weights,
                                 std::optional<Eigen::VectorXd> warm = std::nullopt,
                                 const SolverOptions& opts = {}) const override {
    return prox_newton(weights, warm ? *warm : Eigen::VectorXd::Zero(dim()), nullptr, opts);
  }

  double killer_lasso_bound() const override {
    Eigen::VectorXd half = Eigen::VectorXd::Constant(n_, 0.5);
    return ((X_.transpose() * (half - y_)) / double(n_)).cwiseAbs().maxCoeff();
  }

  Eigen::VectorXd restricted_minimize(const std::vector<bool>& support,
                                      const Eigen::VectorXd* weights = nullptr,
                                      const SolverOptions& opts = {}) const override {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(dim());
    if (weights)
      for (Index l = 0; l < dim(); ++l)
        if (support[l]) w(l) = (*weights)(l);
    return prox_newton(w, Eigen::VectorXd::Zero(dim()), &support, opts);
  }

 private:
  Eigen::VectorXd prox_newton(const Eigen::VectorXd& weights, Eigen::VectorXd beta,
                              const std::vector<bool>* mask, const SolverOptions& opts) const {
    auto penalized = [&](const Eigen::VectorXd& b) {
      return value(b) + 0.5 * weights.dot(b.cwiseAbs());
    };
    if (mask)
      for (Index l = 0; l < dim(); ++l)
        if (!(*mask)[l]) beta(l) = 0;
    double obj = penalized(beta);
    for (int it = 0; it < opts.max_newton_iters; ++it) {
      Eigen::VectorXd eta = X_ * beta;
      Eigen::VectorXd mu(n_), var(n_);
      for (Index i = 0; i < n_; ++i) {
        mu(i) = sigmoid(eta(i));
        var(i) = std::max(mu(i) * (1 - mu(i)), 1e-10);
      }
      Eigen::VectorXd grad = X_.transpose() * (mu - y_) / double(n_) + ridge_ * beta;
      Eigen::MatrixXd H = X_.transpose() * var.asDiagonal() * X_ / double(n_);
      H.diagonal().array() += ridge_;
      // local quadratic model: (1/2)(b-beta)^T H (b-beta) + grad^T (b-beta)
      Eigen::VectorXd c = H * beta - grad;
      SolverOptions inner = opts;
      inner.kkt_tol = std::max(opts.kkt_tol * 0.1, 1e-12);
      Eigen::VectorXd cand =
          detail::quadratic_weighted_lasso(H, c, weights, beta, mask, inner);
      // step halving on the penalized objective
      double step = 1.0;
      Eigen::VectorXd next = cand;
      double next_obj = penalized(next);
      int halvings = 0;
      while (next_obj > obj + 1e-14 && halvings < 50) {
        step /= 2;
        next = beta + step * (cand - beta);
        next_obj = penalized(next);
        ++halvings;
      }
      double move = (next - beta).cwiseAbs().maxCoeff();
      beta = next;
      obj = next_obj;
      double r = kkt_residual(*this, effective_weights(weights, mask), beta);
      if (r <= opts.kkt_tol || (move <= 1e-14 && it > 0)) {
        if (r <= opts.kkt_tol) return beta;
        if (move <= 1e-14) break;
      }
    }
    double r = kkt_residual(*this, effective_weights(weights, mask), beta);
    if (r <= opts.kkt_tol * 10) return beta;  // accept a near miss at the cap
    throw SolverError("LogisticModel::prox_newton: iteration cap exceeded", r);
  }

  // off-mask coordinates are pinned at 0; treat them as infinitely penalized
  Eigen::VectorXd effective_weights(const Eigen::VectorXd& weights,
                                    const std::vector<bool>* mask) const {
    if (!mask) return weights;
    Eigen::VectorXd w = weights;
    for (Index l = 0; l < dim(); ++l)
      if (!(*mask)[l]) w(l) = std::numeric_limits<double>::infinity();
    return w;
  }

  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
  Index d_, n_;
  double ridge_;
};

/// Minimizer of the loss constrained to zero off the block support.
inline Eigen::VectorXd block_oracle(const LossModel& model, const BlockSupport& support,
                                    const SolverOptions& opts = {}) {
  if (Index(support.membership.size()) != model.dim())
    throw std::invalid_argument("block_oracle: support dimension mismatch");
  return model.restricted_minimize(support.membership, nullptr, opts);
}

}  // namespace fcls
