#pragma once

#include "fcls/graph.hpp"
#include "fcls/loss.hpp"
#include "fcls/penalty.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace fcls {

/// Laplacian coefficient M(V, w): M_(ij) = ||V(i,:) - V(j,:)||^2 weighted by w.
/// This is the gradient of sum_k w_k-weighted spectral sums of L(.) and gives
/// the weighted-Lasso surrogate weights of the LLA algorithm.
inline Eigen::VectorXd laplacian_coefficient(const Eigen::MatrixXd& V, const Eigen::VectorXd& w) {
  if (V.cols() != w.size())
    throw std::invalid_argument("laplacian_coefficient: V columns != weight length");
  const Index d = V.rows();
  Eigen::VectorXd m(num_edges(d));
  Index e = 0;
  for (Index i = 0; i < d; ++i) {
    for (Index j = i + 1; j < d; ++j, ++e) {
      double total = 0;
      for (Index k = 0; k < w.size(); ++k) {
        double diff = V(i, k) - V(j, k);
        total += w(k) * diff * diff;
      }
      m(e) = total;
    }
  }
  return m;
}

inline constexpr double kWeightDropTol = 1e-14;

/// Surrogate weights M = M(V^{|beta|}, g'(lambda^{|beta|})) of the LLA step.
/// Eigenpairs with g'(lambda) <= 1e-14 are dropped before the pairwise sums.
template <typename Scalar>
Eigen::VectorXd surrogate_weights(const EdgeVector<Scalar>& beta, const PenaltySpec& spec,
                                  Eigen::VectorXd* eigenvalues_out = nullptr) {
  SpectralSummary sp = spectral_summary(beta);
  if (eigenvalues_out) *eigenvalues_out = sp.eigenvalues;
  std::vector<Index> keep;
  for (Index k = 0; k < sp.eigenvalues.size(); ++k)
    if (g_prime(spec, std::max(sp.eigenvalues(k), 0.0)) > kWeightDropTol) keep.push_back(k);
  Eigen::MatrixXd V(beta.d, Index(keep.size()));
  Eigen::VectorXd w(Index(keep.size()));
  for (size_t k = 0; k < keep.size(); ++k) {
    V.col(Index(k)) = sp.eigenvectors.col(keep[k]);
    w(Index(k)) = g_prime(spec, std::max(sp.eigenvalues(keep[k]), 0.0));
  }
  return laplacian_coefficient(V, w);
}

enum class LlaMode { TwoStep, ToConvergence };

/// Record of an LLA run: beta^(0), ..., beta^(s) plus per-step weights and
/// eigenvalues.
struct LlaTrace {
  std::vector<Eigen::VectorXd> iterates;           // length steps_taken + 1
  std::vector<Eigen::VectorXd> weights_per_step;   // length steps_taken
  std::vector<Eigen::VectorXd> eigenvalues_per_step;
  bool converged = false;
  int steps_taken = 0;
  double fixed_point_tol = 1e-8;

  const Eigen::VectorXd& final_iterate() const { return iterates.back(); }
};

/// One LLA step: weighted Lasso with surrogate weights computed at beta.
inline Eigen::VectorXd lla_step(const LossModel& loss, const PenaltySpec& spec,
                                const Eigen::VectorXd& beta, const SolverOptions& opts = {}) {
  Eigen::VectorXd m = surrogate_weights(EdgeVectord(loss.nodes(), beta), spec);
  return loss.weighted_lasso(m, beta, opts);
}

/// LLA driver. TwoStep performs exactly 2 weighted-Lasso solves
/// (3 when init is identically zero); ToConvergence stops once successive
/// iterates agree to fixed_point_tol in max-norm.
inline LlaTrace lla_run(const LossModel& loss, const PenaltySpec& spec,
                        const Eigen::VectorXd& init, int max_steps = 100,
                        double fixed_point_tol = 1e-8, LlaMode mode = LlaMode::ToConvergence,
                        const SolverOptions& opts = {}) {
  if (max_steps < 1) throw std::invalid_argument("lla_run: max_steps must be >= 1");
  LlaTrace trace;
  trace.fixed_point_tol = fixed_point_tol;
  trace.iterates.push_back(init);

  int steps = max_steps;
  if (mode == LlaMode::TwoStep) steps = init.isZero(0) ? 3 : 2;

  Eigen::VectorXd beta = init;
  for (int s = 0; s < steps; ++s) {
    Eigen::VectorXd eigs;
    Eigen::VectorXd m = surrogate_weights(EdgeVectord(loss.nodes(), beta), spec, &eigs);
    Eigen::VectorXd next = loss.weighted_lasso(m, beta, opts);
    trace.weights_per_step.push_back(m);
    trace.eigenvalues_per_step.push_back(eigs);
    trace.iterates.push_back(next);
    ++trace.steps_taken;
    double move = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    if (mode == LlaMode::ToConvergence && move <= fixed_point_tol) {
      trace.converged = true;
      break;
    }
  }
  if (mode == LlaMode::TwoStep) {
    double move = (trace.iterates.back() - trace.iterates[trace.iterates.size() - 2])
                      .cwiseAbs()
                      .maxCoeff();
    trace.converged = move <= fixed_point_tol;
  }
  return trace;
}

/// Largest useful tuning parameter: for tau >= tau_max one LLA step from the
/// initializer lands on 0 (killer-Lasso bound).
inline double tau_max(const LossModel& loss, const PenaltySpec& spec,
                      const Eigen::VectorXd& init) {
  if (!spec.scad_like())
    throw std::invalid_argument("tau_max: requires a SCAD-like penalty (finite b1, b2)");
  double lam_max = 0;
  if (!init.isZero(0)) {
    EdgeVectord b(loss.nodes(), init);
    SpectralSummary sp = spectral_summary(b);
    lam_max = sp.eigenvalues(sp.eigenvalues.size() - 1);
  }
  return std::max(lam_max / spec.b1, loss.killer_lasso_bound() / spec.a1);
}

/// Log-spaced descending grid from tau_max over the given number of decades.
inline std::vector<double> tau_grid(double tau_max_value, int n_points, double decades) {
  if (tau_max_value <= 0) throw std::invalid_argument("tau_grid: tau_max must be > 0");
  if (n_points < 2) throw std::invalid_argument("tau_grid: need n_points >= 2");
  if (decades <= 0) throw std::invalid_argument("tau_grid: need decades > 0");
  std::vector<double> grid(n_points);
  for (int k = 0; k < n_points; ++k)
    grid[k] = tau_max_value * std::pow(10.0, -decades * k / (n_points - 1));
  return grid;
}

}  // namespace fcls
