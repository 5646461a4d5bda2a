#pragma once

#include <vector>

#include "unifilter/graph.hpp"
#include "unifilter/rng.hpp"

namespace unifilter {

/// Random spanning tree (uniform attachment over a random node order) plus
/// `extra_edges` further distinct random edges. Always connected.
Graph random_connected_graph(Index n, Index extra_edges, Rng& rng);

/// As random_connected_graph, retried until the result has an odd cycle.
Graph random_connected_nonbipartite_graph(Index n, Index extra_edges, Rng& rng);

/// Uniform random t-regular simple graph via the pairing (configuration)
/// model, rejecting pairings that produce self-loops or multi-edges.
/// Requires n*t even and t < n.
Graph random_regular_graph(Index n, Index degree, Rng& rng);

/// Complete binary tree with `depth` levels (root at level 1), 2^depth - 1
/// nodes in heap order: children of u are 2u+1 and 2u+2.
Graph complete_binary_tree(int depth);

struct PlantedPartition {
  Graph graph;
  std::vector<Index> labels;
};

/// Connected graph with balanced labels over `classes` whose edge homophily is
/// exactly round(h * m) / m. Each class is internally spanned by a random
/// tree, classes are chained by single edges, and the remaining intra- and
/// inter-class edges are drawn uniformly.
PlantedPartition planted_partition_graph(Index n, Index classes, Index m, double h, Rng& rng);

}  // namespace unifilter
