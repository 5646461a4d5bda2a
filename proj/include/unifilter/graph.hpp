#pragma once

#include <span>
#include <utility>
#include <vector>

#include "unifilter/types.hpp"

namespace unifilter {

using Edge = std::pair<Index, Index>;

/// Immutable undirected simple graph in compressed row form. Each undirected
/// edge is stored in both directions; neighbor lists are sorted.
class Graph {
 public:
  Graph() = default;

  /// Builds from an arbitrary edge list: symmetrized, deduplicated, and with
  /// self-loops removed. Indices must lie in [0, n).
  static Graph from_edges(Index n, std::span<const Edge> edges);

  Index num_nodes() const noexcept { return n_; }
  Index num_edges() const noexcept { return m_; }

  std::span<const Index> neighbors(Index u) const {
    return {adjacency_.data() + offsets_[u], adjacency_.data() + offsets_[u + 1]};
  }
  Index degree(Index u) const { return degrees_[u]; }
  std::span<const Index> degrees() const noexcept { return degrees_; }
  std::span<const Index> offsets() const noexcept { return offsets_; }
  std::span<const Index> adjacency() const noexcept { return adjacency_; }

  /// Undirected edges with u < v, in row order.
  std::vector<Edge> edge_list() const;

  bool is_connected() const;
  bool is_bipartite() const;
  /// First node with degree 0, or -1.
  Index first_isolated_node() const;

 private:
  Index n_ = 0;
  Index m_ = 0;
  std::vector<Index> offsets_{0};
  std::vector<Index> adjacency_;
  std::vector<Index> degrees_;
};

enum class PropagationKind { NoSelfLoops, SelfLoops };

/// P = I - L = D^{-1/2} A D^{-1/2}, or with self loops D~^{-1/2} (A+I) D~^{-1/2}.
/// Applied sparsely; holds a reference to the graph, which must outlive it.
class PropagationOperator {
 public:
  PropagationOperator(const Graph& g, PropagationKind kind = PropagationKind::NoSelfLoops);

  const Graph& graph() const noexcept { return *graph_; }
  PropagationKind kind() const noexcept { return kind_; }
  Index size() const noexcept { return graph_->num_nodes(); }
  std::span<const double> inv_sqrt_degrees() const noexcept { return inv_sqrt_deg_; }

  /// y = P x. x and y must not alias.
  void apply(std::span<const double> x, std::span<double> y) const;
  Vector apply(const Vector& x) const;
  /// Column-by-column product P X.
  Matrix apply(const Matrix& x) const;

 private:
  const Graph* graph_;
  PropagationKind kind_;
  std::vector<double> inv_sqrt_deg_;
};

/// Fraction of undirected edges whose endpoints share a label.
double homophily_ratio(const Graph& g, std::span<const Index> labels);

struct HomophilyEstimate {
  double value = 0.5;
  Index qualifying_edges = 0;
  bool fallback = false;
};

/// Edge homophily over the edges whose endpoints are both in `train_nodes`.
/// Falls back to 0.5 (with a warning) when no such edge exists.
HomophilyEstimate estimate_homophily(const Graph& g, std::span<const Index> labels,
                                     std::span<const Index> train_nodes);

}  // namespace unifilter
