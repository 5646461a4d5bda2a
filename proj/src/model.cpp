#include "unifilter/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace unifilter {
namespace {

struct ForwardCache {
  Matrix z;
  std::vector<Matrix> inputs;      // input to layer l after dropout
  std::vector<Matrix> masks;       // inverted-dropout multipliers, empty when unused
  std::vector<Matrix> pre;         // pre-activation of layer l
};

void check_shapes(const FilterModel& model, const BasisTensor& basis) {
  if (static_cast<Index>(basis.matrices.size()) != model.w.size())
    throw ShapeError(fmt::format("basis has {} hops, model expects {}", basis.matrices.size(),
                                 model.w.size()));
  if (model.layers.empty()) throw ShapeError("model has no layers");
  if (basis.cols() != model.input_dim())
    throw ShapeError(fmt::format("basis has {} columns, first layer expects {}", basis.cols(),
                                 model.input_dim()));
}

Matrix run_forward(const FilterModel& model, const BasisTensor& basis, Rng* dropout_rng,
                   ForwardCache* cache) {
  check_shapes(model, basis);
  Matrix h = combine_basis(model.w, basis);
  if (cache) cache->z = h;
  const std::size_t layer_count = model.layers.size();
  for (std::size_t l = 0; l < layer_count; ++l) {
    const DenseLayer& layer = model.layers[l];
    Matrix mask;
    if (dropout_rng && model.dropout > 0.0 && l + 1 < layer_count) {
      const double keep = 1.0 - model.dropout;
      mask.resize(h.rows(), h.cols());
      // Column-major fill order keeps the stream layout fixed.
      for (Index c = 0; c < h.cols(); ++c)
        for (Index r = 0; r < h.rows(); ++r)
          mask(r, c) = dropout_rng->uniform() < keep ? 1.0 / keep : 0.0;
      h = h.cwiseProduct(mask);
    }
    Matrix a = h * layer.weight.transpose();
    a.rowwise() += layer.bias.transpose();
    if (cache) {
      cache->inputs.push_back(h);
      cache->masks.push_back(std::move(mask));
      cache->pre.push_back(a);
    }
    if (l + 1 < layer_count)
      h = a.cwiseMax(0.0);
    else
      h = std::move(a);
  }
  return h;
}

std::vector<double> log_softmax_row(const Matrix& logits, Index r) {
  const auto row = logits.row(r);
  const double mx = row.maxCoeff();
  double sum = 0.0;
  for (Index c = 0; c < row.size(); ++c) sum += std::exp(row[c] - mx);
  const double lse = mx + std::log(sum);
  std::vector<double> out(row.size());
  for (Index c = 0; c < row.size(); ++c) out[c] = row[c] - lse;
  return out;
}

void check_mask(std::span<const Index> labels, std::span<const Index> mask, Index rows) {
  if (mask.empty()) throw Error("empty mask");
  if (static_cast<Index>(labels.size()) != rows)
    throw ShapeError(fmt::format("{} labels for {} rows", labels.size(), rows));
  for (Index u : mask)
    if (u < 0 || u >= rows) throw Error(fmt::format("mask node {} out of range", u));
}

Gradients zeros_like(const FilterModel& m) {
  Gradients g;
  g.w = Vector::Zero(m.w.size());
  g.dropout = m.dropout;
  g.num_classes = m.num_classes;
  for (const auto& l : m.layers)
    g.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()),
                        Vector::Zero(l.bias.size())});
  return g;
}

/// Applies f(param, grad, m, v) to every parameter block.
template <typename F>
void for_each_block(FilterModel& p, Gradients& g, FilterModel& m, FilterModel& v, F&& f) {
  f(p.w, g.w, m.w, v.w);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    f(p.layers[l].weight, g.layers[l].weight, m.layers[l].weight, v.layers[l].weight);
    f(p.layers[l].bias, g.layers[l].bias, m.layers[l].bias, v.layers[l].bias);
  }
}

/// Flat views over all parameters, in a fixed order.
std::vector<double*> parameter_pointers(FilterModel& m) {
  std::vector<double*> ptrs;
  for (Index i = 0; i < m.w.size(); ++i) ptrs.push_back(&m.w[i]);
  for (auto& l : m.layers) {
    for (Index i = 0; i < l.weight.size(); ++i) ptrs.push_back(l.weight.data() + i);
    for (Index i = 0; i < l.bias.size(); ++i) ptrs.push_back(l.bias.data() + i);
  }
  return ptrs;
}

}  // namespace

FilterModel FilterModel::initialize(Index hops, Index input_dim, Index hidden, Index layer_count,
                                    Index num_classes, double dropout, Rng& rng) {
  if (hops < 0) throw Error("hops must be >= 0");
  if (layer_count < 1) throw Error("need at least one layer");
  if (input_dim < 1 || num_classes < 1 || hidden < 1) throw Error("layer widths must be positive");
  FilterModel m;
  m.w = Vector::Constant(hops + 1, 1.0 / static_cast<double>(hops + 1));
  m.dropout = dropout;
  m.num_classes = num_classes;
  Index in = input_dim;
  for (Index l = 0; l < layer_count; ++l) {
    const Index out = l + 1 == layer_count ? num_classes : hidden;
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    DenseLayer layer{Matrix(out, in), Vector::Zero(out)};
    for (Index c = 0; c < in; ++c)
      for (Index r = 0; r < out; ++r) layer.weight(r, c) = rng.uniform(-bound, bound);
    m.layers.push_back(std::move(layer));
    in = out;
  }
  return m;
}

void TrainConfig::validate() const {
  if (hops < 0) throw Error("hops must be >= 0");
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error("tau must be in [0,1]");
  if (!(learning_rate >= 0.0)) throw Error("learning rate must be >= 0");
  if (!(weight_decay >= 0.0)) throw Error("weight decay must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("dropout must be in [0,1)");
  if (hidden < 1) throw Error("hidden width must be >= 1");
  if (layers < 1) throw Error("layer count must be >= 1");
  if (patience < 1) throw Error("patience must be >= 1");
  if (max_epochs < 1) throw Error("max epochs must be >= 1");
  if (h_hat && !(*h_hat >= 0.0 && *h_hat <= 1.0)) throw Error("h_hat must be in [0,1]");
}

Matrix combine_basis(const Vector& w, const BasisTensor& basis) {
  if (static_cast<Index>(basis.matrices.size()) != w.size())
    throw ShapeError(fmt::format("{} weights for {} hops", w.size(), basis.matrices.size()));
  Matrix z = Matrix::Zero(basis.rows(), basis.cols());
  for (Index k = 0; k < w.size(); ++k) z.noalias() += w[k] * basis.matrices[k];
  return z;
}

Matrix forward(const FilterModel& model, const BasisTensor& basis, Rng* dropout_rng) {
  return run_forward(model, basis, dropout_rng, nullptr);
}

double loss(const Matrix& logits, std::span<const Index> labels, std::span<const Index> mask) {
  check_mask(labels, mask, logits.rows());
  double total = 0.0;
  for (Index u : mask) total -= log_softmax_row(logits, u)[labels[u]];
  return total / static_cast<double>(mask.size());
}

double evaluate(const Matrix& logits, std::span<const Index> labels, std::span<const Index> mask) {
  check_mask(labels, mask, logits.rows());
  Index correct = 0;
  for (Index u : mask) {
    Index best = 0;
    for (Index c = 1; c < logits.cols(); ++c)
      if (logits(u, c) > logits(u, best)) best = c;
    if (best == labels[u]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(mask.size());
}

double evaluate(const FilterModel& model, const BasisTensor& basis, std::span<const Index> labels,
                std::span<const Index> mask) {
  return evaluate(forward(model, basis), labels, mask);
}

double loss_and_gradients(const FilterModel& model, const BasisTensor& basis,
                          std::span<const Index> labels, std::span<const Index> mask,
                          Gradients& grads, Rng* dropout_rng) {
  ForwardCache cache;
  const Matrix logits = run_forward(model, basis, dropout_rng, &cache);
  check_mask(labels, mask, logits.rows());
  grads = zeros_like(model);

  const double inv = 1.0 / static_cast<double>(mask.size());
  Matrix delta = Matrix::Zero(logits.rows(), logits.cols());
  double total = 0.0;
  for (Index u : mask) {
    const auto ls = log_softmax_row(logits, u);
    total -= ls[labels[u]];
    for (Index c = 0; c < logits.cols(); ++c) delta(u, c) += std::exp(ls[c]) * inv;
    delta(u, labels[u]) -= inv;
  }

  for (std::size_t l = model.layers.size(); l-- > 0;) {
    if (l + 1 < model.layers.size())
      delta = delta.cwiseProduct((cache.pre[l].array() > 0.0).cast<double>().matrix());
    grads.layers[l].weight = delta.transpose() * cache.inputs[l];
    grads.layers[l].bias = delta.colwise().sum().transpose();
    Matrix upstream = delta * model.layers[l].weight;
    if (cache.masks[l].size() > 0) upstream = upstream.cwiseProduct(cache.masks[l]);
    delta = std::move(upstream);
  }
  // delta is now dL/dZ.
  for (Index k = 0; k < model.w.size(); ++k)
    grads.w[k] = delta.cwiseProduct(basis.matrices[k]).sum();
  return total * inv;
}

double gradient_check(const FilterModel& model, const BasisTensor& basis,
                      std::span<const Index> labels, std::span<const Index> mask, double step) {
  Gradients analytic;
  loss_and_gradients(model, basis, labels, mask, analytic);
  FilterModel probe = model;
  auto params = parameter_pointers(probe);
  auto grads = parameter_pointers(analytic);
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = *params[i];
    *params[i] = saved + step;
    const double up = loss(forward(probe, basis), labels, mask);
    *params[i] = saved - step;
    const double down = loss(forward(probe, basis), labels, mask);
    *params[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double a = *grads[i];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

BasisTensor build_basis(const LabeledDataset& ds, const TrainConfig& cfg, double h_hat) {
  PropagationOperator op(ds.graph, cfg.propagation);
  BasisOptions opts;
  opts.normalize_homophily = cfg.normalize_homophily;
  opts.reorthogonalize = cfg.reorthogonalize;
  opts.workers = cfg.workers;
  if (cfg.basis == FilterBasis::Orthonormal) return orthonormal_basis(op, ds.features, cfg.hops, opts);
  return unibasis(op, ds.features, cfg.hops, h_hat, cfg.tau, opts);
}

TrainReport train(const LabeledDataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  validate_dataset(ds);
  double h_hat = 0.5;
  bool fallback = false;
  if (cfg.h_hat) {
    h_hat = *cfg.h_hat;
  } else {
    const auto est = estimate_homophily(ds.graph, ds.labels, ds.split.train);
    h_hat = est.value;
    fallback = est.fallback;
  }
  const BasisTensor basis = build_basis(ds, cfg, h_hat);
  return train_on_basis(ds, basis, cfg, h_hat, fallback);
}

TrainReport train_on_basis(const LabeledDataset& ds, const BasisTensor& basis,
                           const TrainConfig& cfg, double h_hat, bool h_hat_fallback) {
  cfg.validate();
  if (ds.split.train.empty() || ds.split.val.empty() || ds.split.test.empty())
    throw Error("train, val and test sets must all be non-empty");
  const auto& train_nodes = ds.split.train;
  const auto& val_nodes = ds.split.val;

  Rng init_rng = Rng::substream(cfg.seed, "init");
  Rng dropout_rng = Rng::substream(cfg.seed, "dropout");
  FilterModel model = FilterModel::initialize(cfg.hops, basis.cols(), cfg.hidden, cfg.layers,
                                              ds.num_classes, cfg.dropout, init_rng);
  FilterModel m1 = zeros_like(model);
  FilterModel m2 = zeros_like(model);
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;

  TrainReport report;
  report.h_hat = h_hat;
  report.h_hat_fallback = h_hat_fallback;
  report.best_val_acc = -1.0;
  report.best_val_loss = std::numeric_limits<double>::infinity();
  report.model = model;
  Index since_best = 0;

  Gradients grads;
  for (Index epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const double train_loss =
        loss_and_gradients(model, basis, ds.labels, train_nodes, grads, &dropout_rng);
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(epoch));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(epoch));
    for_each_block(model, grads, m1, m2, [&](auto& p, auto& g, auto& m, auto& v) {
      if (cfg.weight_decay > 0.0) g += cfg.weight_decay * p;
      m = beta1 * m + (1.0 - beta1) * g;
      v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
      p.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    });

    const Matrix logits = forward(model, basis);
    const double val_acc = evaluate(logits, ds.labels, val_nodes);
    const double val_loss = loss(logits, ds.labels, val_nodes);
    report.curve.push_back({epoch, train_loss, val_acc});
    report.epochs_run = epoch;
    if (val_acc > report.best_val_acc ||
        (val_acc == report.best_val_acc && val_loss < report.best_val_loss)) {
      report.best_val_acc = val_acc;
      report.best_val_loss = val_loss;
      report.best_epoch = epoch;
      report.model = model;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  report.test_acc = evaluate(report.model, basis, ds.labels, ds.split.test);
  return report;
}

std::size_t SearchSpace::size() const {
  return learning_rates.size() * hidden.size() * layers.size() * weight_decays.size() *
         dropouts.size();
}

SearchResult random_search(const LabeledDataset& ds, const TrainConfig& base,
                           const SearchSpace& space, std::size_t trials, std::uint64_t seed) {
  base.validate();
  const std::size_t total = space.size();
  if (total == 0) throw Error("empty search space");
  trials = std::min(trials, total);
  if (trials == 0) throw Error("need at least one trial");

  double h_hat = base.h_hat.value_or(0.5);
  bool fallback = false;
  if (!base.h_hat) {
    const auto est = estimate_homophily(ds.graph, ds.labels, ds.split.train);
    h_hat = est.value;
    fallback = est.fallback;
  }
  // The basis depends only on K, tau and h_hat, none of which are searched.
  const BasisTensor basis = build_basis(ds, base, h_hat);

  Rng rng = Rng::substream(seed, "search");
  std::set<std::size_t> chosen;
  std::vector<std::size_t> order;
  while (order.size() < trials) {
    const std::size_t idx = rng.below(total);
    if (chosen.insert(idx).second) order.push_back(idx);
  }

  SearchResult result;
  bool have = false;
  for (std::size_t idx : order) {
    TrainConfig cfg = base;
    std::size_t r = idx;
    cfg.learning_rate = space.learning_rates[r % space.learning_rates.size()];
    r /= space.learning_rates.size();
    cfg.hidden = space.hidden[r % space.hidden.size()];
    r /= space.hidden.size();
    cfg.layers = space.layers[r % space.layers.size()];
    r /= space.layers.size();
    cfg.weight_decay = space.weight_decays[r % space.weight_decays.size()];
    r /= space.weight_decays.size();
    cfg.dropout = space.dropouts[r % space.dropouts.size()];
    TrainReport rep = train_on_basis(ds, basis, cfg, h_hat, fallback);
    ++result.trials;
    if (!have || rep.best_val_acc > result.best_report.best_val_acc ||
        (rep.best_val_acc == result.best_report.best_val_acc &&
         rep.best_val_loss < result.best_report.best_val_loss)) {
      result.best_config = cfg;
      result.best_report = std::move(rep);
      have = true;
    }
  }
  return result;
}

namespace {

nlohmann::json config_json(const TrainConfig& cfg) {
  nlohmann::json j;
  j["hops"] = cfg.hops;
  j["tau"] = cfg.tau;
  j["learning_rate"] = cfg.learning_rate;
  j["weight_decay"] = cfg.weight_decay;
  j["hidden"] = cfg.hidden;
  j["layers"] = cfg.layers;
  j["dropout"] = cfg.dropout;
  j["patience"] = cfg.patience;
  j["max_epochs"] = cfg.max_epochs;
  j["seed"] = cfg.seed;
  j["propagation"] = cfg.propagation == PropagationKind::SelfLoops ? "self-loops" : "no-self-loops";
  j["basis"] = cfg.basis == FilterBasis::Orthonormal ? "orthonormal" : "uni";
  j["normalize_homophily"] = cfg.normalize_homophily;
  j["reorthogonalize"] = cfg.reorthogonalize;
  if (cfg.h_hat)
    j["h_hat"] = *cfg.h_hat;
  else
    j["h_hat"] = nullptr;
  return j;
}

TrainConfig config_from(const nlohmann::json& j) {
  TrainConfig cfg;
  cfg.hops = j.at("hops").get<Index>();
  cfg.tau = j.at("tau").get<double>();
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.weight_decay = j.at("weight_decay").get<double>();
  cfg.hidden = j.at("hidden").get<Index>();
  cfg.layers = j.at("layers").get<Index>();
  cfg.dropout = j.at("dropout").get<double>();
  cfg.patience = j.at("patience").get<Index>();
  cfg.max_epochs = j.at("max_epochs").get<Index>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.propagation = j.value("propagation", "no-self-loops") == "self-loops"
                        ? PropagationKind::SelfLoops
                        : PropagationKind::NoSelfLoops;
  cfg.basis = j.value("basis", "uni") == "orthonormal" ? FilterBasis::Orthonormal : FilterBasis::Uni;
  cfg.normalize_homophily = j.value("normalize_homophily", true);
  cfg.reorthogonalize = j.value("reorthogonalize", false);
  if (j.contains("h_hat") && !j["h_hat"].is_null()) cfg.h_hat = j["h_hat"].get<double>();
  return cfg;
}

std::string doubles17(const double* data, Index count) {
  std::string out = "[";
  for (Index i = 0; i < count; ++i) {
    if (i) out += ',';
    out += format_double17(data[i]);
  }
  return out + "]";
}

}  // namespace

std::string config_to_json(const TrainConfig& cfg) { return config_json(cfg).dump(2) + "\n"; }

TrainConfig config_from_json(const std::string& text) {
  return config_from(nlohmann::json::parse(text));
}

std::string checkpoint_to_json(const FilterModel& model, const TrainConfig& cfg) {
  std::string out = "{\n  \"w\": " + doubles17(model.w.data(), model.w.size()) + ",\n";
  out += fmt::format("  \"dropout\": {},\n  \"num_classes\": {},\n", format_double17(model.dropout),
                     model.num_classes);
  out += "  \"layers\": [";
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    // Row-major flattening of the out x in weight matrix.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = layer.weight;
    out += l ? ",\n    " : "\n    ";
    out += fmt::format("{{\"rows\": {}, \"cols\": {}, \"weights\": {}, \"bias\": {}}}", rm.rows(),
                       rm.cols(), doubles17(rm.data(), rm.size()),
                       doubles17(layer.bias.data(), layer.bias.size()));
  }
  out += "\n  ],\n  \"config\": " + config_json(cfg).dump() + "\n}\n";
  return out;
}

void save_checkpoint(const std::filesystem::path& file, const FilterModel& model,
                     const TrainConfig& cfg) {
  write_text(file, checkpoint_to_json(model, cfg));
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(file));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("{}: {}", file.string(), e.what()));
  }
  Checkpoint ck;
  const auto w = j.at("w").get<std::vector<double>>();
  ck.model.w = Eigen::Map<const Vector>(w.data(), static_cast<Index>(w.size()));
  ck.model.dropout = j.value("dropout", 0.0);
  for (const auto& lj : j.at("layers")) {
    const Index rows = lj.at("rows").get<Index>();
    const Index cols = lj.at("cols").get<Index>();
    const auto weights = lj.at("weights").get<std::vector<double>>();
    const auto bias = lj.at("bias").get<std::vector<double>>();
    if (static_cast<Index>(weights.size()) != rows * cols || static_cast<Index>(bias.size()) != rows)
      throw ParseError(fmt::format("{}: layer shape mismatch", file.string()));
    DenseLayer layer;
    layer.weight = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                  Eigen::RowMajor>>(weights.data(), rows, cols);
    layer.bias = Eigen::Map<const Vector>(bias.data(), rows);
    ck.model.layers.push_back(std::move(layer));
  }
  ck.model.num_classes =
      j.value("num_classes", ck.model.layers.empty() ? Index{0} : ck.model.layers.back().weight.rows());
  ck.config = config_from(j.at("config"));
  return ck;
}

std::string report_to_json(const TrainReport& report) {
  nlohmann::json j;
  j["best_val_acc"] = report.best_val_acc;
  j["best_val_loss"] = report.best_val_loss;
  j["best_epoch"] = report.best_epoch;
  j["test_acc"] = report.test_acc;
  j["epochs_run"] = report.epochs_run;
  j["h_hat"] = report.h_hat;
  j["h_hat_fallback"] = report.h_hat_fallback;
  j["w"] = std::vector<double>(report.model.w.data(), report.model.w.data() + report.model.w.size());
  return j.dump(2) + "\n";
}

std::string curve_to_csv(const TrainReport& report) {
  std::string out = "epoch,train_loss,val_acc\n";
  for (const auto& r : report.curve)
    out += fmt::format("{},{},{}\n", r.epoch, format_double17(r.train_loss), format_double17(r.val_acc));
  return out;
}

}  // namespace unifilter
