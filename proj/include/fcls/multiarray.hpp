#pragma once

#include "fcls/edge_vector.hpp"
#include "fcls/graph.hpp"
#include "fcls/lla.hpp"
#include "fcls/penalty.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace fcls {

/// Parameter viewed as a rectangular R x C matrix.
struct RectParam {
  Eigen::MatrixXd values;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
};

/// Dense multi-array parameter with axis lengths dims[0..V-1]; values stored
/// flat in row-major order (last axis fastest).
struct MultiArrayParam {
  std::vector<Index> dims;
  Eigen::VectorXd values;

  MultiArrayParam(std::vector<Index> dims_, Eigen::VectorXd values_)
      : dims(std::move(dims_)), values(std::move(values_)) {
    if (dims.size() < 2) throw std::invalid_argument("MultiArrayParam: need V >= 2 axes");
    Index p = 1;
    for (Index dk : dims) {
      if (dk < 1) throw std::invalid_argument("MultiArrayParam: axis length must be >= 1");
      p *= dk;
    }
    if (values.size() != p)
      throw std::invalid_argument("MultiArrayParam: value count != product of dims");
  }

  Index axes() const { return Index(dims.size()); }
  Index vertex_count() const { return std::accumulate(dims.begin(), dims.end(), Index{0}); }
  Index vertex(Index axis, Index k) const {
    Index off = 0;
    for (Index v = 0; v < axis; ++v) off += dims[v];
    return off + k;
  }

  Index flat_index(const std::vector<Index>& idx) const {
    Index f = 0;
    for (size_t v = 0; v < dims.size(); ++v) f = f * dims[v] + idx[v];
    return f;
  }
  std::vector<Index> multi_index(Index flat) const {
    std::vector<Index> idx(dims.size());
    for (size_t v = dims.size(); v-- > 0;) {
      idx[v] = flat % dims[v];
      flat /= dims[v];
    }
    return idx;
  }
};

/// Bipartite embedding of a rectangular matrix: rows and columns become the
/// d = R + C vertices, entry (i, j) becomes the weight of edge (i, R + j).
inline EdgeVectord bipartite_embed(const RectParam& m) {
  const Index R = m.rows(), C = m.cols(), d = R + C;
  EdgeVectord beta = EdgeVectord::Zero(d);
  for (Index i = 0; i < R; ++i)
    for (Index j = 0; j < C; ++j) beta(i, R + j) = m.values(i, j);
  return beta;
}

/// Hypergraph adjacency over the s = sum(dims) axis-index vertices: the edge
/// weight between (axis a, index ka) and (axis b, index kb) is the sum of
/// |A| over the slice fixing those two coordinates.
inline Eigen::MatrixXd hypergraph_adjacency(const MultiArrayParam& a) {
  const Index s = a.vertex_count();
  const Index V = a.axes();
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(s, s);
  for (Index flat = 0; flat < a.values.size(); ++flat) {
    double w = std::abs(a.values(flat));
    if (w == 0) continue;
    std::vector<Index> idx = a.multi_index(flat);
    for (Index u = 0; u < V; ++u) {
      for (Index v = u + 1; v < V; ++v) {
        Index r = a.vertex(u, idx[u]);
        Index c = a.vertex(v, idx[v]);
        adj(r, c) += w;
        adj(c, r) += w;
      }
    }
  }
  return adj;
}

inline EdgeVectord edge_vector_from_adjacency(const Eigen::MatrixXd& adj) {
  const Index d = adj.rows();
  EdgeVectord beta = EdgeVectord::Zero(d);
  for (Index i = 0; i < d; ++i)
    for (Index j = i + 1; j < d; ++j) beta(i, j) = adj(i, j);
  return beta;
}

/// Connected components of the axis-index vertices under the hypergraph
/// adjacency; by the component correspondence these are the blocks of the
/// multi-array.
inline ComponentLabeling multiarray_blocks(const MultiArrayParam& a,
                                           double zero_tol = kSupportZeroTol) {
  return connected_components(edge_vector_from_adjacency(hypergraph_adjacency(a)), zero_tol);
}

/// Surrogate weights of the embedded edge vector mapped back to the entries
/// of a rectangular matrix.
inline Eigen::MatrixXd embedded_surrogate_weights(const RectParam& m, const PenaltySpec& spec) {
  EdgeVectord beta = bipartite_embed(m);
  Eigen::VectorXd edge_w = surrogate_weights(beta, spec);
  const Index R = m.rows();
  Eigen::MatrixXd out(R, m.cols());
  for (Index i = 0; i < R; ++i)
    for (Index j = 0; j < m.cols(); ++j)
      out(i, j) = edge_w(edge_index(i, R + j, beta.d));
  return out;
}

/// Surrogate weights for a multi-array: each entry's effective weight is the
/// sum over the V*(V-1)/2 vertex-pair edges its hyperedge induces, since the
/// entry enters those adjacency entries linearly.
inline Eigen::VectorXd embedded_surrogate_weights(const MultiArrayParam& a,
                                                  const PenaltySpec& spec) {
  EdgeVectord beta = edge_vector_from_adjacency(hypergraph_adjacency(a));
  Eigen::VectorXd edge_w = surrogate_weights(beta, spec);
  const Index V = a.axes();
  Eigen::VectorXd out(a.values.size());
  for (Index flat = 0; flat < a.values.size(); ++flat) {
    std::vector<Index> idx = a.multi_index(flat);
    double total = 0;
    for (Index u = 0; u < V; ++u)
      for (Index v = u + 1; v < V; ++v)
        total += edge_w(edge_index(a.vertex(u, idx[u]), a.vertex(v, idx[v]), beta.d));
    out(flat) = total;
  }
  return out;
}

}  // namespace fcls
