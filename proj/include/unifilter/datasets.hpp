#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unifilter/graph.hpp"
#include "unifilter/io.hpp"
#include "unifilter/model.hpp"

namespace unifilter {

enum class SplitRegime { Train60Val20, Train48Val32 };

SplitRegime parse_split_regime(const std::string& text);
std::string to_string(SplitRegime regime);

/// Seeded random partitions of [0, n): floor(n * train%), floor(n * val%),
/// remainder to test.
std::vector<Split> make_splits(Index n, SplitRegime regime, Index num_splits, std::uint64_t seed);

/// Random one-hot rows: every node gets a single 1 in a uniformly chosen column.
Matrix random_one_hot_features(Index n, Index dim, Rng& rng);

struct SynthSpec {
  Graph base_graph;
  std::vector<Index> base_labels;
  Index num_classes = 0;
  double target_h = 0.5;
  Index feature_dim = 100;
  double tolerance = 0.005;
  std::uint64_t seed = 0;
  Index max_sweeps = 50;
};

struct SynthResult {
  LabeledDataset dataset;
  double achieved_h = 0.0;
  Index reassignments = 0;
  Index sweeps = 0;
};

/// Progressive random relabelling: nodes are visited in a seeded random order
/// and each visited node draws a fresh uniform label, until the edge
/// homophily is within `tolerance` of the target. Features are fresh random
/// one-hot rows; the split is a seeded 60/20/20 partition.
SynthResult synth_variable_h(const SynthSpec& spec);

struct TreeSpec {
  int depth = 7;
  Index feature_dim = 100;
  Index classes = 3;
  std::uint64_t seed = 0;
};

/// Complete binary tree (root at level 1), random one-hot features, uniform
/// random labels and one seeded 60/20/20 split.
LabeledDataset binary_tree_dataset(const TreeSpec& spec);

/// Result of training one variant across several splits.
struct VariantScore {
  std::string name;
  std::vector<double> test_acc;  // one per split
  std::vector<double> chosen_tau;  // tuned variants only
  double mean() const;
};

/// Trains with tau on each grid value and keeps the run with the best
/// validation accuracy (then lower validation loss).
struct TunedRun {
  TrainReport report;
  double tau = 0.0;
};
TunedRun train_tuned_tau(const LabeledDataset& ds, const TrainConfig& cfg,
                         const std::vector<double>& tau_grid);

struct AblationConfig {
  TrainConfig train;
  std::vector<double> tau_grid{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<Split> splits;  // empty: use the dataset's own split
};

struct AblationResult {
  VariantScore het;   // tau = 0
  VariantScore hom;   // tau = 1
  VariantScore ort;   // orthonormal basis
  VariantScore uni;   // tau tuned on validation
  /// UniFilter mean accuracy minus the variant's, in percentage points.
  double gap(const VariantScore& v) const { return 100.0 * (uni.mean() - v.mean()); }
};

AblationResult ablation_basis_variants(const LabeledDataset& ds, const AblationConfig& cfg);

/// "variant,mean_test_acc,gap_points".
std::string ablation_csv(const AblationResult& result);

struct EnergyRow {
  double tau = 0.0;
  Index hop = 0;
  double energy = 0.0;
};

/// Dirichlet energy of X^k = tau H_k + (1 - tau) U_k for k = 0..max_hops,
/// with unit-normalised homophily hops H_k and heterophily hops U_k.
std::vector<EnergyRow> energy_trajectory(const Graph& g, const Matrix& x,
                                         const std::vector<double>& tau_grid, Index max_hops,
                                         double h_hat,
                                         PropagationKind kind = PropagationKind::NoSelfLoops);

/// "tau,k,energy".
std::string energy_csv(const std::vector<EnergyRow>& rows);

struct SquashConfig {
  TreeSpec tree;
  std::vector<Index> hop_grid{3, 4, 5, 6, 7};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  TrainConfig train;
  std::vector<double> tau_grid{0.0, 0.25, 0.5, 0.75, 1.0};
};

struct SquashRow {
  Index hops = 0;
  double homophily_acc = 0.0;  // mean over seeds, tau = 1
  double unifilter_acc = 0.0;  // mean over seeds, tau tuned
};

/// Trains the homophily-only filter and UniFilter at each hop count on the
/// binary-tree dataset, one dataset per seed.
std::vector<SquashRow> oversquashing_experiment(const SquashConfig& cfg);

/// "k,homophily_acc,unifilter_acc".
std::string squash_csv(const std::vector<SquashRow>& rows);

}  // namespace unifilter
