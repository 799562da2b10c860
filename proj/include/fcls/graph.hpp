#pragma once

#include "fcls/edge_vector.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace fcls {

inline constexpr double kSupportZeroTol = 1e-10;
inline constexpr double kEigZeroTol = 1e-8;

/// Hollow symmetric adjacency matrix A(beta).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> adjacency(
    const EdgeVector<Scalar>& beta, bool absolute = false) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix a = Matrix::Zero(beta.d, beta.d);
  Index e = 0;
  for (Index i = 0; i < beta.d; ++i) {
    for (Index j = i + 1; j < beta.d; ++j, ++e) {
      Scalar v = absolute ? std::abs(beta.values(e)) : beta.values(e);
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  return a;
}

/// Graph Laplacian L(A) = diag(A 1) - A.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> laplacian(
    const EdgeVector<Scalar>& beta, bool absolute = false) {
  auto a = adjacency(beta, absolute);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> deg = a.rowwise().sum();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> l = -a;
  l.diagonal() += deg;
  return l;
}

/// Connected-component structure of the thresholded support graph.
struct ComponentLabeling {
  std::vector<Index> labels;   // per-node component id in [0, K)
  Index K = 0;                 // component count
  std::vector<Index> sizes;    // per-component node counts
  Index d_max = 0;             // largest non-singleton component size (0 if none)
  Index d_min = 0;             // smallest non-singleton component size (0 if none)
  Index K_nonzero = 0;         // components with >= 2 nodes
  Index n_noniso = 0;          // non-isolated nodes
  Index max_degree = 0;        // largest degree of the binary support graph
};

namespace detail {

struct UnionFind {
  std::vector<Index> parent;
  explicit UnionFind(Index n) : parent(n) { std::iota(parent.begin(), parent.end(), Index{0}); }
  Index find(Index x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace detail

template <typename Scalar>
ComponentLabeling connected_components(const EdgeVector<Scalar>& beta,
                                       double zero_tol = kSupportZeroTol) {
  if (zero_tol < 0) throw std::invalid_argument("connected_components: zero_tol < 0");
  const Index d = beta.d;
  detail::UnionFind uf(d);
  std::vector<Index> degree(d, 0);
  Index e = 0;
  for (Index i = 0; i < d; ++i) {
    for (Index j = i + 1; j < d; ++j, ++e) {
      if (std::abs(beta.values(e)) > zero_tol) {
        uf.unite(i, j);
        ++degree[i];
        ++degree[j];
      }
    }
  }
  ComponentLabeling out;
  out.labels.assign(d, -1);
  std::vector<Index> root_label(d, -1);
  for (Index v = 0; v < d; ++v) {
    Index r = uf.find(v);
    if (root_label[r] < 0) {
      root_label[r] = out.K++;
      out.sizes.push_back(0);
    }
    out.labels[v] = root_label[r];
    ++out.sizes[root_label[r]];
  }
  for (Index s : out.sizes) {
    if (s >= 2) {
      ++out.K_nonzero;
      out.n_noniso += s;
      out.d_max = std::max(out.d_max, s);
      out.d_min = (out.d_min == 0) ? s : std::min(out.d_min, s);
    }
  }
  out.max_degree = d == 0 ? 0 : *std::max_element(degree.begin(), degree.end());
  return out;
}

/// Edge mask of the transitively closed (block) support: edge (i,j) is a
/// member iff i and j share a connected component.
struct BlockSupport {
  Index d = 0;
  std::vector<bool> membership;  // length D, edge-index order

  Index count() const { return std::count(membership.begin(), membership.end(), true); }
};

template <typename Scalar>
BlockSupport block_support(const EdgeVector<Scalar>& beta, double zero_tol = kSupportZeroTol) {
  ComponentLabeling cc = connected_components(beta, zero_tol);
  BlockSupport bs;
  bs.d = beta.d;
  bs.membership.assign(num_edges(beta.d), false);
  Index e = 0;
  for (Index i = 0; i < beta.d; ++i)
    for (Index j = i + 1; j < beta.d; ++j, ++e)
      bs.membership[e] = cc.labels[i] == cc.labels[j];
  return bs;
}

/// Ascending eigendecomposition of L(|beta|).
struct SpectralSummary {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // column k pairs with eigenvalue k
};

struct EigenSolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
SpectralSummary spectral_summary(const EdgeVector<Scalar>& beta) {
  Eigen::MatrixXd l = laplacian(beta, /*absolute=*/true).template cast<double>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l);
  if (es.info() != Eigen::Success)
    throw EigenSolverError("spectral_summary: eigensolver failed to converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

/// (K+1)-th smallest Laplacian eigenvalue of L(|beta|), the spectral gap of a
/// graph with K connected components.
template <typename Scalar>
double spectral_gap(const EdgeVector<Scalar>& beta, Index K) {
  if (K < 1 || K >= beta.d) throw std::invalid_argument("spectral_gap: need 1 <= K < d");
  return spectral_summary(beta).eigenvalues(K);
}

/// Norm diagnostics for L(r) and A(r).
struct LaplacianNorms {
  double lap_entry_l1 = 0;  // sum of |entries| of L(r)
  double lap_frob = 0;
  double lap_op = 0;        // spectral norm
  double lap_op_one = 0;    // max absolute column sum
  double adj_entry_l1 = 0;
  double adj_frob = 0;
  double adj_op = 0;
  double adj_op_one = 0;
  double max_row_sum = 0;   // ||A(r) 1||_max
};

template <typename Scalar>
LaplacianNorms laplacian_norms(const EdgeVector<Scalar>& r) {
  Eigen::MatrixXd a = adjacency(r).template cast<double>();
  Eigen::MatrixXd l = laplacian(r).template cast<double>();
  LaplacianNorms out;
  out.lap_entry_l1 = l.cwiseAbs().sum();
  out.lap_frob = l.norm();
  out.lap_op = l.template selfadjointView<Eigen::Lower>().operatorNorm();
  out.lap_op_one = l.cwiseAbs().colwise().sum().maxCoeff();
  out.adj_entry_l1 = a.cwiseAbs().sum();
  out.adj_frob = a.norm();
  out.adj_op = a.template selfadjointView<Eigen::Lower>().operatorNorm();
  out.adj_op_one = a.cwiseAbs().colwise().sum().maxCoeff();
  out.max_row_sum = a.rowwise().sum().cwiseAbs().maxCoeff();
  return out;
}

}  // namespace fcls
