#include "unifilter/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include <fmt/format.h>

#include "unifilter/log.hpp"

namespace unifilter {

Graph Graph::from_edges(Index n, std::span<const Edge> edges) {
  if (n < 0) throw Error("node count must be non-negative");
  std::vector<Edge> directed;
  directed.reserve(edges.size() * 2);
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw Error(fmt::format("edge ({}, {}) out of range for n={}", u, v, n));
    if (u == v) continue;
    directed.emplace_back(u, v);
    directed.emplace_back(v, u);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  Graph g;
  g.n_ = n;
  g.m_ = static_cast<Index>(directed.size() / 2);
  g.offsets_.assign(n + 1, 0);
  g.degrees_.assign(n, 0);
  g.adjacency_.reserve(directed.size());
  for (auto [u, v] : directed) {
    ++g.degrees_[u];
    g.adjacency_.push_back(v);
  }
  for (Index u = 0; u < n; ++u) g.offsets_[u + 1] = g.offsets_[u] + g.degrees_[u];
  return g;
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(m_);
  for (Index u = 0; u < n_; ++u)
    for (Index v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

bool Graph::is_connected() const {
  if (n_ == 0) return true;
  std::vector<char> seen(n_, 0);
  std::queue<Index> q;
  q.push(0);
  seen[0] = 1;
  Index count = 1;
  while (!q.empty()) {
    Index u = q.front();
    q.pop();
    for (Index v : neighbors(u))
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        q.push(v);
      }
  }
  return count == n_;
}

bool Graph::is_bipartite() const {
  std::vector<int> side(n_, -1);
  for (Index s = 0; s < n_; ++s) {
    if (side[s] >= 0) continue;
    side[s] = 0;
    std::queue<Index> q;
    q.push(s);
    while (!q.empty()) {
      Index u = q.front();
      q.pop();
      for (Index v : neighbors(u)) {
        if (side[v] < 0) {
          side[v] = 1 - side[u];
          q.push(v);
        } else if (side[v] == side[u]) {
          return false;
        }
      }
    }
  }
  return true;
}

Index Graph::first_isolated_node() const {
  for (Index u = 0; u < n_; ++u)
    if (degrees_[u] == 0) return u;
  return -1;
}

PropagationOperator::PropagationOperator(const Graph& g, PropagationKind kind)
    : graph_(&g), kind_(kind), inv_sqrt_deg_(g.num_nodes()) {
  const Index shift = kind == PropagationKind::SelfLoops ? 1 : 0;
  for (Index u = 0; u < g.num_nodes(); ++u) {
    const Index d = g.degree(u) + shift;
    if (d == 0)
      throw Error(fmt::format(
          "node {} is isolated; D^-1/2 is undefined without self-loops", u));
    inv_sqrt_deg_[u] = 1.0 / std::sqrt(static_cast<double>(d));
  }
}

void PropagationOperator::apply(std::span<const double> x, std::span<double> y) const {
  const Index n = size();
  if (static_cast<Index>(x.size()) != n || static_cast<Index>(y.size()) != n)
    throw ShapeError(fmt::format("propagation expects length {}, got x={} y={}", n,
                                 x.size(), y.size()));
  const auto offsets = graph_->offsets();
  const auto adj = graph_->adjacency();
  const double* isd = inv_sqrt_deg_.data();
  const bool loops = kind_ == PropagationKind::SelfLoops;
  for (Index u = 0; u < n; ++u) {
    double acc = loops ? isd[u] * x[u] : 0.0;
    for (Index e = offsets[u]; e < offsets[u + 1]; ++e) {
      const Index v = adj[e];
      acc += isd[v] * x[v];
    }
    y[u] = isd[u] * acc;
  }
}

Vector PropagationOperator::apply(const Vector& x) const {
  Vector y(x.size());
  apply(std::span<const double>(x.data(), x.size()), std::span<double>(y.data(), y.size()));
  return y;
}

Matrix PropagationOperator::apply(const Matrix& x) const {
  Matrix y(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j)
    apply(std::span<const double>(x.col(j).data(), x.rows()),
          std::span<double>(y.col(j).data(), y.rows()));
  return y;
}

namespace {

void check_labels(const Graph& g, std::span<const Index> labels) {
  if (static_cast<Index>(labels.size()) != g.num_nodes())
    throw ShapeError(fmt::format("expected {} labels, got {}", g.num_nodes(), labels.size()));
}

}  // namespace

double homophily_ratio(const Graph& g, std::span<const Index> labels) {
  check_labels(g, labels);
  if (g.num_edges() == 0) throw Error("empty edge set");
  Index same = 0;
  for (Index u = 0; u < g.num_nodes(); ++u)
    for (Index v : g.neighbors(u))
      if (u < v && labels[u] == labels[v]) ++same;
  return static_cast<double>(same) / static_cast<double>(g.num_edges());
}

HomophilyEstimate estimate_homophily(const Graph& g, std::span<const Index> labels,
                                     std::span<const Index> train_nodes) {
  check_labels(g, labels);
  if (train_nodes.empty()) throw Error("training set is empty");
  std::vector<char> in_train(g.num_nodes(), 0);
  for (Index u : train_nodes) {
    if (u < 0 || u >= g.num_nodes())
      throw Error(fmt::format("training node {} out of range", u));
    in_train[u] = 1;
  }
  Index total = 0;
  Index same = 0;
  for (Index u = 0; u < g.num_nodes(); ++u) {
    if (!in_train[u]) continue;
    for (Index v : g.neighbors(u)) {
      if (u < v && in_train[v]) {
        ++total;
        if (labels[u] == labels[v]) ++same;
      }
    }
  }
  HomophilyEstimate est;
  est.qualifying_edges = total;
  if (total == 0) {
    est.fallback = true;
    est.value = 0.5;
    warn("no edge has both endpoints in the training set; using h_hat = 0.5");
    return est;
  }
  est.value = static_cast<double>(same) / static_cast<double>(total);
  return est;
}

}  // namespace unifilter
