#include "unifilter/random_graphs.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

namespace unifilter {
namespace {

Edge ordered(Index u, Index v) { return u < v ? Edge{u, v} : Edge{v, u}; }

}  // namespace

Graph random_connected_graph(Index n, Index extra_edges, Rng& rng) {
  if (n < 1) throw Error("random graph needs n >= 1");
  const Index max_edges = n * (n - 1) / 2;
  if (n - 1 + extra_edges > max_edges) throw Error("too many edges requested");
  auto order = rng.permutation(n);
  std::set<Edge> edges;
  for (Index i = 1; i < n; ++i) {
    Index parent = order[rng.below(static_cast<std::uint64_t>(i))];
    edges.insert(ordered(order[i], parent));
  }
  const std::size_t target = static_cast<std::size_t>(n - 1 + extra_edges);
  while (edges.size() < target) {
    Index u = static_cast<Index>(rng.below(n));
    Index v = static_cast<Index>(rng.below(n));
    if (u != v) edges.insert(ordered(u, v));
  }
  std::vector<Edge> list(edges.begin(), edges.end());
  return Graph::from_edges(n, list);
}

Graph random_connected_nonbipartite_graph(Index n, Index extra_edges, Rng& rng) {
  if (n < 3) throw Error("a non-bipartite graph needs n >= 3");
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Graph g = random_connected_graph(n, extra_edges, rng);
    if (!g.is_bipartite()) return g;
  }
  throw Error("failed to sample a non-bipartite graph; add more edges");
}

Graph random_regular_graph(Index n, Index degree, Rng& rng) {
  if (degree < 0 || degree >= n || (n * degree) % 2 != 0)
    throw Error(fmt::format("no simple {}-regular graph on {} nodes", degree, n));
  std::vector<Index> stubs(static_cast<std::size_t>(n * degree));
  for (Index u = 0; u < n; ++u)
    for (Index k = 0; k < degree; ++k) stubs[u * degree + k] = u;
  std::vector<Edge> edges;
  edges.reserve(stubs.size() / 2);
  // Adjacency bitmap; only the cells set by an attempt are cleared afterwards.
  std::vector<unsigned char> used(static_cast<std::size_t>(n * n), 0);
  for (;;) {
    for (auto [u, v] : edges) used[static_cast<std::size_t>(u * n + v)] = 0;
    edges.clear();
    bool ok = true;
    // Sequential uniform pairing; abandon on the first loop or repeated pair.
    for (std::size_t remaining = stubs.size(); remaining > 0; remaining -= 2) {
      std::size_t i = rng.below(remaining);
      std::swap(stubs[i], stubs[remaining - 1]);
      std::size_t j = rng.below(remaining - 1);
      std::swap(stubs[j], stubs[remaining - 2]);
      const Edge e = ordered(stubs[remaining - 1], stubs[remaining - 2]);
      auto& cell = used[static_cast<std::size_t>(e.first * n + e.second)];
      if (e.first == e.second || cell) {
        ok = false;
        break;
      }
      cell = 1;
      edges.push_back(e);
    }
    if (ok) return Graph::from_edges(n, edges);
  }
}

Graph complete_binary_tree(int depth) {
  if (depth < 1 || depth > 30) throw Error("tree depth must be in [1, 30]");
  const Index n = (Index{1} << depth) - 1;
  std::vector<Edge> edges;
  for (Index u = 1; u < n; ++u) edges.emplace_back((u - 1) / 2, u);
  return Graph::from_edges(n, edges);
}

PlantedPartition planted_partition_graph(Index n, Index classes, Index m, double h, Rng& rng) {
  if (classes < 1 || n < classes * 2) throw Error("need at least two nodes per class");
  PlantedPartition out;
  out.labels.resize(n);
  auto order = rng.permutation(n);
  std::vector<std::vector<Index>> members(classes);
  for (Index i = 0; i < n; ++i) {
    const Index c = i % classes;
    out.labels[order[i]] = c;
    members[c].push_back(order[i]);
  }

  Index intra_pairs = 0;
  for (const auto& mem : members) {
    const Index s = static_cast<Index>(mem.size());
    intra_pairs += s * (s - 1) / 2;
  }
  const Index inter_pairs = n * (n - 1) / 2 - intra_pairs;
  const Index intra_target = static_cast<Index>(std::llround(h * static_cast<double>(m)));
  const Index inter_target = m - intra_target;
  if (intra_target < n - classes || inter_target < classes - 1 || intra_target > intra_pairs ||
      inter_target > inter_pairs)
    throw Error(fmt::format("cannot realise h={} with m={} on n={}, {} classes", h, m, n, classes));

  std::set<Edge> intra;
  std::set<Edge> inter;
  for (const auto& mem : members)
    for (std::size_t i = 1; i < mem.size(); ++i)
      intra.insert(ordered(mem[i], mem[rng.below(i)]));
  for (Index c = 1; c < classes; ++c) {
    const auto& a = members[c - 1];
    const auto& b = members[c];
    inter.insert(ordered(a[rng.below(a.size())], b[rng.below(b.size())]));
  }
  while (static_cast<Index>(intra.size()) < intra_target) {
    const auto& mem = members[rng.below(classes)];
    Index u = mem[rng.below(mem.size())];
    Index v = mem[rng.below(mem.size())];
    if (u != v) intra.insert(ordered(u, v));
  }
  while (static_cast<Index>(inter.size()) < inter_target) {
    Index u = static_cast<Index>(rng.below(n));
    Index v = static_cast<Index>(rng.below(n));
    if (out.labels[u] != out.labels[v]) inter.insert(ordered(u, v));
  }
  std::vector<Edge> edges(intra.begin(), intra.end());
  edges.insert(edges.end(), inter.begin(), inter.end());
  out.graph = Graph::from_edges(n, edges);
  return out;
}

}  // namespace unifilter
