#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "unifilter/graph.hpp"
#include "unifilter/io.hpp"
#include "unifilter/log.hpp"
#include "unifilter/rng.hpp"

namespace testutil {

using unifilter::Index;

inline unifilter::Graph make_graph(Index n, std::vector<unifilter::Edge> edges) {
  return unifilter::Graph::from_edges(n, edges);
}

inline unifilter::Graph triangle() { return make_graph(3, {{0, 1}, {1, 2}, {0, 2}}); }
inline unifilter::Graph single_edge() { return make_graph(2, {{0, 1}}); }

/// Extra-edge count capped so a connected graph on n nodes can hold it.
inline Index feasible_extra(Index n, Index wanted) {
  return std::min(wanted, n * (n - 1) / 2 - (n - 1));
}

inline unifilter::Vector random_unit(Index n, unifilter::Rng& rng) {
  unifilter::Vector x(n);
  for (Index i = 0; i < n; ++i) x[i] = rng.normal();
  return x / x.norm();
}

inline unifilter::Matrix random_matrix(Index n, Index d, unifilter::Rng& rng) {
  unifilter::Matrix x(n, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < n; ++i) x(i, j) = rng.normal();
  return x;
}

/// Captures warnings for the lifetime of the object.
class WarningCapture {
 public:
  WarningCapture()
      : previous_(unifilter::set_warning_sink([this](const std::string& m) { messages.push_back(m); })) {}
  ~WarningCapture() { unifilter::set_warning_sink(previous_); }
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;
  std::vector<std::string> messages;

 private:
  unifilter::LogSink previous_;
};

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("unifilter_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Two clusters of `half` nodes each; every node's features are the one-hot
/// cluster id and labels equal the cluster. Alternating split.
inline unifilter::LabeledDataset two_cluster_dataset(Index half = 10) {
  const Index n = 2 * half;
  std::vector<unifilter::Edge> edges;
  for (Index c = 0; c < 2; ++c)
    for (Index i = 0; i < half; ++i)
      for (Index j = i + 1; j < half; ++j)
        if ((j - i) <= 2) edges.emplace_back(c * half + i, c * half + j);
  edges.emplace_back(half - 1, half);
  unifilter::LabeledDataset ds;
  ds.graph = unifilter::Graph::from_edges(n, edges);
  ds.features = unifilter::Matrix::Zero(n, 2);
  ds.labels.resize(n);
  for (Index u = 0; u < n; ++u) {
    const Index c = u < half ? 0 : 1;
    ds.labels[u] = c;
    ds.features(u, c) = 1.0;
  }
  ds.num_classes = 2;
  for (Index u = 0; u < n; ++u) {
    switch (u % 5) {
      case 0: case 1: case 2: ds.split.train.push_back(u); break;
      case 3: ds.split.val.push_back(u); break;
      default: ds.split.test.push_back(u);
    }
  }
  return ds;
}

}  // namespace testutil
