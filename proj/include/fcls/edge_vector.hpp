#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <utility>

namespace fcls {

using Index = Eigen::Index;

/// Number of unordered node pairs on d nodes.
inline Index num_edges(Index d) { return d * (d - 1) / 2; }

/// Lexicographic edge id of the pair (i, j), 0 <= i < j < d.
inline Index edge_index(Index i, Index j, Index d) {
  if (i < 0 || i >= j || j >= d)
    throw std::invalid_argument("edge_index: need 0 <= i < j < d");
  // edges (0,1), (0,2), ..., (0,d-1), (1,2), ...
  return i * d - i * (i + 1) / 2 + (j - i - 1);
}

/// Inverse of edge_index.
inline std::pair<Index, Index> edge_pair(Index e, Index d) {
  if (e < 0 || e >= num_edges(d))
    throw std::invalid_argument("edge_pair: edge id out of range");
  Index i = 0;
  Index row_len = d - 1;
  while (e >= row_len) {
    e -= row_len;
    --row_len;
    ++i;
  }
  return {i, i + 1 + e};
}

/// Model parameter viewed as the weighted edges of a graph on d nodes.
/// values(edge_index(i,j,d)) is the weight of edge (i,j).
template <typename Scalar>
struct EdgeVector {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Index d = 0;
  Vector values;

  EdgeVector() = default;
  EdgeVector(Index d_, Vector values_) : d(d_), values(std::move(values_)) {
    if (values.size() != num_edges(d))
      throw std::invalid_argument("EdgeVector: length must be d*(d-1)/2");
  }

  static EdgeVector Zero(Index d) { return EdgeVector(d, Vector::Zero(num_edges(d))); }

  Index size() const { return values.size(); }
  Scalar& operator()(Index i, Index j) { return values(edge_index(i, j, d)); }
  Scalar operator()(Index i, Index j) const { return values(edge_index(i, j, d)); }
};

using EdgeVectord = EdgeVector<double>;

}  // namespace fcls
