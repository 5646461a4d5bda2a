#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "unifilter/basis.hpp"
#include "unifilter/graph.hpp"
#include "unifilter/io.hpp"
#include "unifilter/rng.hpp"
#include "unifilter/types.hpp"

namespace unifilter {

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

/// Learnable hop weights w followed by an MLP head. ReLU between layers;
/// inverted dropout on the input of every layer but the last.
struct FilterModel {
  Vector w;
  std::vector<DenseLayer> layers;
  double dropout = 0.0;
  Index num_classes = 0;

  /// w = 1/(K+1); weights U(-1/sqrt(fan_in), 1/sqrt(fan_in)); zero biases.
  /// `layer_count` affine layers, hidden ones `hidden` wide.
  static FilterModel initialize(Index hops, Index input_dim, Index hidden, Index layer_count,
                                Index num_classes, double dropout, Rng& rng);

  Index hops() const { return w.size() - 1; }
  Index input_dim() const { return layers.empty() ? 0 : layers.front().weight.cols(); }
};

/// Which basis the filter is trained on.
enum class FilterBasis { Uni, Orthonormal };

struct TrainConfig {
  Index hops = 10;
  double tau = 1.0;
  double learning_rate = 0.01;
  double weight_decay = 0.0;
  Index hidden = 64;
  Index layers = 2;
  double dropout = 0.0;
  Index patience = 200;
  Index max_epochs = 1000;
  std::uint64_t seed = 0;
  PropagationKind propagation = PropagationKind::NoSelfLoops;
  FilterBasis basis = FilterBasis::Uni;
  bool normalize_homophily = true;
  bool reorthogonalize = false;
  /// Use this h_hat instead of estimating it from the training labels.
  std::optional<double> h_hat;
  /// Threads for basis construction. Not serialised; results do not depend on it.
  std::size_t workers = 1;

  /// Throws on out-of-range values.
  void validate() const;
};

struct EpochRecord {
  Index epoch = 0;
  double train_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainReport {
  double best_val_acc = 0.0;
  double best_val_loss = 0.0;
  Index best_epoch = 0;
  double test_acc = 0.0;
  Index epochs_run = 0;
  std::vector<EpochRecord> curve;
  double h_hat = 0.0;
  bool h_hat_fallback = false;
  FilterModel model;  // parameters at the best-validation epoch
};

/// Z = sum_k w_k * basis.matrices[k].
Matrix combine_basis(const Vector& w, const BasisTensor& basis);

/// Logits n x C. Dropout is active only when `dropout_rng` is non-null.
Matrix forward(const FilterModel& model, const BasisTensor& basis, Rng* dropout_rng = nullptr);

/// Mean softmax cross-entropy of labels over the nodes in `mask`.
double loss(const Matrix& logits, std::span<const Index> labels, std::span<const Index> mask);

/// Argmax accuracy over `mask`; ties go to the lowest class id.
double evaluate(const Matrix& logits, std::span<const Index> labels, std::span<const Index> mask);
double evaluate(const FilterModel& model, const BasisTensor& basis, std::span<const Index> labels,
                std::span<const Index> mask);

/// Parameter-shaped container: gradients share FilterModel's layout.
using Gradients = FilterModel;

/// Loss and its gradient for all parameters (w and every layer).
double loss_and_gradients(const FilterModel& model, const BasisTensor& basis,
                          std::span<const Index> labels, std::span<const Index> mask,
                          Gradients& grads, Rng* dropout_rng = nullptr);

/// Max relative error between analytic and central-difference gradients,
/// |a - n| / max(|a|, |n|, 1e-6), over every parameter. Dropout is disabled.
double gradient_check(const FilterModel& model, const BasisTensor& basis,
                      std::span<const Index> labels, std::span<const Index> mask,
                      double step = 1e-5);

/// Builds the basis for `cfg` from the dataset features.
BasisTensor build_basis(const LabeledDataset& ds, const TrainConfig& cfg, double h_hat);

/// Trains w and the MLP with Adam on the frozen basis, early-stopping on
/// validation accuracy (ties: lower validation loss).
TrainReport train(const LabeledDataset& ds, const TrainConfig& cfg);
/// As above with a prebuilt basis, e.g. when sweeping optimiser settings.
TrainReport train_on_basis(const LabeledDataset& ds, const BasisTensor& basis,
                           const TrainConfig& cfg, double h_hat, bool h_hat_fallback = false);

/// Hyperparameter grid: learning rate, hidden width, MLP layers, weight decay
/// and dropout. K stays fixed.
struct SearchSpace {
  std::vector<double> learning_rates{0.001, 0.005, 0.01, 0.05, 0.1, 0.15, 0.2};
  std::vector<Index> hidden{64, 128, 256};
  std::vector<Index> layers{2, 3, 4, 5, 6};
  std::vector<double> weight_decays{0.0, 1e-4, 5e-4, 1e-3};
  std::vector<double> dropouts{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::size_t size() const;
};

struct SearchResult {
  TrainConfig best_config;
  TrainReport best_report;
  std::size_t trials = 0;
};

/// Random search: `trials` distinct grid points sampled with `seed`; the one
/// with the best validation accuracy (then lower validation loss) wins.
SearchResult random_search(const LabeledDataset& ds, const TrainConfig& base,
                           const SearchSpace& space, std::size_t trials, std::uint64_t seed);

std::string config_to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const std::string& text);

/// {w, layers: [{rows, cols, weights (row-major), bias}], config}; every
/// float with 17 significant digits.
std::string checkpoint_to_json(const FilterModel& model, const TrainConfig& cfg);
void save_checkpoint(const std::filesystem::path& file, const FilterModel& model,
                     const TrainConfig& cfg);
struct Checkpoint {
  FilterModel model;
  TrainConfig config;
};
Checkpoint load_checkpoint(const std::filesystem::path& file);

std::string report_to_json(const TrainReport& report);
/// "epoch,train_loss,val_acc".
std::string curve_to_csv(const TrainReport& report);

}  // namespace unifilter
