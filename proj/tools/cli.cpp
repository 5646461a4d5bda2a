#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "manifest.hpp"
#include "unifilter/basis.hpp"
#include "unifilter/datasets.hpp"
#include "unifilter/io.hpp"
#include "unifilter/model.hpp"
#include "unifilter/parallel.hpp"
#include "unifilter/random_graphs.hpp"
#include "unifilter/spectral.hpp"

#ifndef UNIFILTER_PRESET_FILE
#define UNIFILTER_PRESET_FILE "presets/tau_presets.json"
#endif

namespace unifilter::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Bad flag values detected after parsing. Exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Floats on stdout always carry a decimal point: 1 prints as "1.0".
std::string num(double v) {
  std::string s = format_double(v);
  if (s.find_first_of(".eni") == std::string::npos) s += ".0";
  return s;
}

struct Common {
  std::uint64_t seed = 0;
  std::string out_dir = "unifilter_out";
};

struct DataFlags {
  std::string edges, features, labels, split;
};

struct TrainFlags {
  TrainConfig cfg;
  std::optional<double> hom_ratio;
  std::string filter_basis = "uni";
  std::string tau_preset;
  std::string preset_file = UNIFILTER_PRESET_FILE;
  bool self_loops = false;
  bool raw_homophily = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Seed for every random stream");
  app->add_option("--out-dir", c.out_dir, "Output directory");
}

void add_data(CLI::App* app, DataFlags& d, bool labels, bool split) {
  app->add_option("--edges", d.edges, "Edge list, one \"u v\" per line")
      ->required()->check(CLI::ExistingFile);
  app->add_option("--features", d.features, "Feature CSV, one row per node")
      ->required()->check(CLI::ExistingFile);
  auto* l = app->add_option("--labels", d.labels, "One integer label per line")
                ->check(CLI::ExistingFile);
  auto* s = app->add_option("--split", d.split, "Split JSON {train, val, test}")
                ->check(CLI::ExistingFile);
  if (labels) l->required();
  if (split) s->required();
}

void add_propagation(CLI::App* app, bool& self_loops, bool& raw, bool& reortho) {
  app->add_flag("--self-loops", self_loops, "Propagate with D~^{-1/2}(A+I)D~^{-1/2}");
  app->add_flag("--raw-homophily", raw, "Do not unit-normalise homophily hops");
  app->add_flag("--reortho", reortho, "Full re-orthogonalisation of the auxiliary basis");
}

void add_train(CLI::App* app, TrainFlags& t) {
  auto& c = t.cfg;
  app->add_option("--hops", c.hops, "Propagation hops K");
  auto* tau = app->add_option("--tau", c.tau, "Homophily weight in the blended basis");
  app->add_option("--tau-preset", t.tau_preset, "Take tau from the preset file by dataset name")
      ->excludes(tau);
  app->add_option("--preset-file", t.preset_file, "JSON map of dataset name to tau");
  app->add_option("--hom-ratio", t.hom_ratio, "Use this h instead of estimating it");
  app->add_option("--lr", c.learning_rate, "Adam learning rate");
  app->add_option("--weight-decay", c.weight_decay, "L2 weight decay");
  app->add_option("--hidden", c.hidden, "Hidden width");
  app->add_option("--layers", c.layers, "Affine layers in the head");
  app->add_option("--dropout", c.dropout, "Dropout rate");
  app->add_option("--patience", c.patience, "Early-stopping patience in epochs");
  app->add_option("--max-epochs", c.max_epochs, "Epoch cap");
  app->add_option("--filter-basis", t.filter_basis, "uni or ortho")
      ->check(CLI::IsMember({"uni", "ortho"}));
  add_propagation(app, t.self_loops, t.raw_homophily, c.reorthogonalize);
}

void check_ratio(const std::optional<double>& h) {
  if (h && !(*h >= 0.0 && *h <= 1.0))
    throw UsageError(fmt::format("hom-ratio must be in [0,1], got {}", num(*h)));
}

double load_preset(const std::string& file, const std::string& name) {
  json j;
  try {
    j = json::parse(read_text(file));
  } catch (const std::exception& e) {
    throw UsageError(fmt::format("cannot read preset file {}: {}", file, e.what()));
  }
  if (!j.contains(name)) throw UsageError(fmt::format("no tau preset for '{}'", name));
  return j.at(name).get<double>();
}

TrainConfig resolve(const TrainFlags& t, const Common& common) {
  TrainConfig cfg = t.cfg;
  if (!t.tau_preset.empty()) cfg.tau = load_preset(t.preset_file, t.tau_preset);
  check_ratio(t.hom_ratio);
  cfg.h_hat = t.hom_ratio;
  cfg.seed = common.seed;
  cfg.propagation = t.self_loops ? PropagationKind::SelfLoops : PropagationKind::NoSelfLoops;
  cfg.basis = t.filter_basis == "ortho" ? FilterBasis::Orthonormal : FilterBasis::Uni;
  cfg.normalize_homophily = !t.raw_homophily;
  cfg.workers = worker_count();
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

/// Every option of the subcommand, explicit or defaulted, as strings.
json resolved_options(const CLI::App* app) {
  json j = json::object();
  for (const CLI::Option* opt : app->get_options()) {
    if (opt == app->get_help_ptr() || opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (opt->get_expected_min() == 0) {
      j[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      const auto& r = opt->results();
      if (r.size() == 1)
        j[name] = r.front();
      else
        j[name] = r;
    } else if (!opt->get_default_str().empty()) {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

Index max_label(const std::vector<Index>& labels) {
  Index m = -1;
  for (Index y : labels) m = std::max(m, y);
  return m;
}

/// Loads the dataset files that were given; split may be absent.
LabeledDataset load_data(const DataFlags& d, RunManifest& manifest) {
  LabeledDataset ds;
  ds.features = load_features(d.features);
  manifest.add_input(d.features);
  Index n = ds.features.rows();
  if (!d.labels.empty()) {
    ds.labels = load_labels(d.labels);
    manifest.add_input(d.labels);
    n = static_cast<Index>(ds.labels.size());
    ds.num_classes = max_label(ds.labels) + 1;
  }
  ds.graph = load_graph(d.edges, n).graph;
  manifest.add_input(d.edges);
  if (!d.split.empty()) {
    ds.split = load_split(d.split);
    manifest.add_input(d.split);
  }
  if (!d.labels.empty()) validate_dataset(ds);
  else if (ds.features.rows() != n)
    throw ShapeError(fmt::format("feature matrix has {} rows, graph has {} nodes",
                                 ds.features.rows(), n));
  return ds;
}

void write_dataset_files(const fs::path& dir, const LabeledDataset& ds, RunManifest& manifest) {
  write_graph(dir / "edges.txt", ds.graph);
  write_features(dir / "features.csv", ds.features);
  write_labels(dir / "labels.txt", ds.labels);
  write_split(dir / "split.json", ds.split);
  for (const char* f : {"edges.txt", "features.csv", "labels.txt", "split.json"})
    manifest.add_output(f);
}

void report_train(std::ostream& out, const TrainReport& r) {
  out << "test_acc=" << num(r.test_acc) << "\n"
      << "best_val_acc=" << num(r.best_val_acc) << "\n"
      << "best_epoch=" << r.best_epoch << "\n"
      << "epochs=" << r.epochs_run << "\n"
      << "h_hat=" << num(r.h_hat) << "\n";
  if (r.h_hat_fallback) out << "h_hat_fallback=true\n";
}

void save_run(const fs::path& dir, const TrainReport& r, TrainConfig cfg, RunManifest& manifest) {
  write_text(dir / "report.json", report_to_json(r));
  write_text(dir / "curve.csv", curve_to_csv(r));
  cfg.h_hat = r.h_hat;
  save_checkpoint(dir / "checkpoint.json", r.model, cfg);
  for (const char* f : {"report.json", "curve.csv", "checkpoint.json"}) manifest.add_output(f);
}

json config_json(const TrainConfig& cfg) { return json::parse(config_to_json(cfg)); }

/// A subcommand with its action, run after parsing succeeds.
struct Command {
  CLI::App* app;
  std::function<void()> action;
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Universal polynomial basis graph filters", "unifilter"};
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  std::vector<Command> commands;

  auto begin = [](const std::string& name, const Common& c) {
    fs::create_directories(c.out_dir);
    return RunManifest(name, c.seed);
  };

  // train
  Common train_c;
  DataFlags train_d;
  TrainFlags train_t;
  {
    auto* sub = app.add_subcommand("train", "Train a filter and report test accuracy");
    add_common(sub, train_c);
    add_data(sub, train_d, true, true);
    add_train(sub, train_t);
    commands.push_back({sub, [&, sub] {
      TrainConfig cfg = resolve(train_t, train_c);
      RunManifest m = begin("train", train_c);
      LabeledDataset ds = load_data(train_d, m);
      TrainReport r = train(ds, cfg);
      save_run(train_c.out_dir, r, cfg, m);
      m.config() = resolved_options(sub);
      m.config()["resolved"] = config_json(cfg);
      m.config()["h_hat_used"] = r.h_hat;
      m.write(train_c.out_dir);
      report_train(out, r);
    }});
  }

  // basis
  Common basis_c;
  DataFlags basis_d;
  std::string basis_mode = "uni";
  Index basis_hops = 10;
  double basis_tau = 1.0;
  std::optional<double> basis_h;
  bool basis_self = false, basis_raw = false, basis_reortho = false, basis_check = false;
  {
    auto* sub = app.add_subcommand("basis", "Build and export a polynomial basis");
    add_common(sub, basis_c);
    add_data(sub, basis_d, false, false);
    sub->add_option("--mode", basis_mode, "homo, hetero, ortho or uni")
        ->check(CLI::IsMember({"homo", "hetero", "ortho", "uni"}));
    sub->add_option("--hops", basis_hops, "Propagation hops K");
    sub->add_option("--tau", basis_tau, "Homophily weight for --mode uni");
    sub->add_option("--hom-ratio", basis_h, "Homophily ratio h for the heterophily angle");
    add_propagation(sub, basis_self, basis_raw, basis_reortho);
    sub->add_flag("--check", basis_check, "Report angle-law and orthonormality deviations");
    commands.push_back({sub, [&, sub] {
      check_ratio(basis_h);
      if (basis_hops < 0) throw UsageError("hops must be >= 0");
      if (!(basis_tau >= 0.0 && basis_tau <= 1.0)) throw UsageError("tau must be in [0,1]");
      RunManifest m = begin("basis", basis_c);
      LabeledDataset ds = load_data(basis_d, m);
      const bool needs_h = basis_mode == "hetero" || (basis_mode == "uni" && basis_tau < 1.0);
      std::optional<double> h = basis_h;
      if (!h && !basis_d.labels.empty() && !basis_d.split.empty()) {
        auto est = estimate_homophily(ds.graph, ds.labels, ds.split.train);
        h = est.value;
      }
      if (!h && needs_h)
        throw UsageError(
            fmt::format("--mode {} needs --hom-ratio, or --labels with --split", basis_mode));
      PropagationOperator op(ds.graph,
                             basis_self ? PropagationKind::SelfLoops : PropagationKind::NoSelfLoops);
      BasisOptions opts;
      opts.normalize_homophily = !basis_raw;
      opts.reorthogonalize = basis_reortho;
      opts.workers = worker_count();
      BasisTensor b;
      if (basis_mode == "homo") b = homophily_basis(op, ds.features, basis_hops, opts);
      else if (basis_mode == "hetero") b = heterophily_basis(op, ds.features, basis_hops, *h, opts);
      else if (basis_mode == "ortho") b = orthonormal_basis(op, ds.features, basis_hops, opts);
      else b = unibasis(op, ds.features, basis_hops, h.value_or(1.0), basis_tau, opts);
      export_basis(basis_c.out_dir, b);
      for (Index k = 0; k <= basis_hops; ++k) m.add_output(fmt::format("hop_{}.csv", k));
      m.add_output("meta.json");
      out << "kind=" << to_string(b.kind) << "\n"
          << "hops=" << b.hops << "\n"
          << "degenerate_columns=" << b.degenerate_columns.size() << "\n"
          << "clamp_events=" << b.clamp_events << "\n";
      if (h) out << "h_hat=" << num(*h) << "\n";
      if (basis_check) {
        json check;
        if (basis_mode == "hetero" || basis_mode == "ortho") {
          BasisTensor v = basis_mode == "ortho"
                              ? b
                              : orthonormal_basis(op, ds.features, basis_hops, opts);
          const BasisCheck cv = check_basis(v);
          if (basis_mode == "hetero") {
            const BasisCheck cu = check_basis(b);
            const double leak = max_auxiliary_leak(b, v);
            out << "max |u_i·u_j − cos θ| = " << fmt::format("{:.3e}", cu.max_pair_deviation) << "\n"
                << "max |u_i·u_i − 1| = " << fmt::format("{:.3e}", cu.max_unit_deviation) << "\n"
                << "max |v_{k+1}·u_j| = " << fmt::format("{:.3e}", leak) << "\n";
            check["pair_deviation"] = cu.max_pair_deviation;
            check["unit_deviation"] = cu.max_unit_deviation;
            check["auxiliary_leak"] = leak;
            check["theta"] = b.theta;
          }
          const double vdev = std::max(cv.max_pair_deviation, cv.max_unit_deviation);
          out << "max |v_i·v_j − δ_ij| = " << fmt::format("{:.3e}", vdev) << "\n";
          check["orthonormal_deviation"] = vdev;
          check["columns_checked"] = cv.columns_checked;
        } else {
          out << "check=none for --mode " << basis_mode << "\n";
        }
        write_text(fs::path(basis_c.out_dir) / "check.json", check.dump(2) + "\n");
        m.add_output("check.json");
      }
      m.config() = resolved_options(sub);
      m.config()["h_hat_used"] = h ? json(*h) : json(nullptr);
      m.write(basis_c.out_dir);
    }});
  }

  // spectrum
  Common spec_c;
  DataFlags spec_d;
  std::string spec_ckpt, spec_name = "dataset";
  std::optional<Index> spec_hops;
  {
    auto* sub = app.add_subcommand("spectrum", "Per-hop frequency and weight of a trained filter");
    add_common(sub, spec_c);
    add_data(sub, spec_d, false, false);
    sub->add_option("--checkpoint", spec_ckpt, "checkpoint.json from train")
        ->required()->check(CLI::ExistingFile);
    sub->add_option("--hops", spec_hops, "Expected K; must match the checkpoint");
    sub->add_option("--name", spec_name, "Dataset name for the report");
    commands.push_back({sub, [&, sub] {
      RunManifest m = begin("spectrum", spec_c);
      Checkpoint ck = load_checkpoint(spec_ckpt);
      m.add_input(spec_ckpt);
      const Index k = ck.model.hops();
      if (spec_hops && *spec_hops != k)
        throw UsageError(fmt::format("checkpoint has K={}, --hops gives {}", k, *spec_hops));
      LabeledDataset ds = load_data(spec_d, m);
      if (ds.features.cols() != ck.model.input_dim())
        throw UsageError(fmt::format("checkpoint expects {} feature columns, got {}",
                                     ck.model.input_dim(), ds.features.cols()));
      double h = 0.5;
      if (ck.config.h_hat) h = *ck.config.h_hat;
      else if (!ds.labels.empty() && !ds.split.train.empty())
        h = estimate_homophily(ds.graph, ds.labels, ds.split.train).value;
      TrainConfig cfg = ck.config;
      cfg.workers = worker_count();
      BasisTensor b = build_basis(ds, cfg, h);
      if (static_cast<Index>(b.matrices.size()) != ck.model.w.size())
        throw UsageError("basis and checkpoint hop counts differ");
      const std::vector<double> freq = basis_spectrum(ds.graph, b);
      SpectrumReport rep{to_string(b.kind), spec_name, {}};
      for (Index i = 0; i <= k; ++i) rep.entries.push_back({i, freq[i], ck.model.w[i]});
      write_spectrum_csv(fs::path(spec_c.out_dir) / "spectrum.csv", rep);
      m.add_output("spectrum.csv");
      m.config() = resolved_options(sub);
      m.config()["resolved"] = config_json(cfg);
      m.config()["h_hat_used"] = h;
      m.write(spec_c.out_dir);
      out << "basis=" << rep.basis_kind << "\n" << "rows=" << rep.entries.size() << "\n";
    }});
  }

  // synth
  Common synth_c;
  std::string synth_edges, synth_labels;
  Index synth_n = 600, synth_classes = 7, synth_m = 1200, synth_dim = 100, synth_sweeps = 50;
  double synth_base_h = 0.81, synth_target = 0.5, synth_tol = 0.005;
  {
    auto* sub = app.add_subcommand("synth", "Relabel a base graph to a target homophily");
    add_common(sub, synth_c);
    auto* e = sub->add_option("--edges", synth_edges, "Base graph edge list")
                  ->check(CLI::ExistingFile);
    auto* l = sub->add_option("--labels", synth_labels, "Base labels")->check(CLI::ExistingFile);
    e->needs(l);
    l->needs(e);
    sub->add_option("--n", synth_n, "Planted base: nodes");
    sub->add_option("--classes", synth_classes, "Class count");
    sub->add_option("--m", synth_m, "Planted base: edges");
    sub->add_option("--base-h", synth_base_h, "Planted base: homophily");
    sub->add_option("--target-h", synth_target, "Target homophily")->required();
    sub->add_option("--tolerance", synth_tol, "Accepted |h - target|");
    sub->add_option("--feature-dim", synth_dim, "One-hot feature width");
    sub->add_option("--max-sweeps", synth_sweeps, "Relabelling sweeps before giving up");
    commands.push_back({sub, [&, sub] {
      if (!(synth_target >= 0.0 && synth_target <= 1.0))
        throw UsageError("target-h must be in [0,1]");
      RunManifest m = begin("synth", synth_c);
      SynthSpec spec;
      if (!synth_edges.empty()) {
        spec.base_labels = load_labels(synth_labels);
        spec.base_graph =
            load_graph(synth_edges, static_cast<Index>(spec.base_labels.size())).graph;
        spec.num_classes = std::max(synth_classes, max_label(spec.base_labels) + 1);
        m.add_input(synth_edges);
        m.add_input(synth_labels);
      } else {
        if (!(synth_base_h >= 0.0 && synth_base_h <= 1.0))
          throw UsageError("base-h must be in [0,1]");
        Rng rng = Rng::substream(synth_c.seed, "base");
        PlantedPartition p = planted_partition_graph(synth_n, synth_classes, synth_m, synth_base_h, rng);
        spec.base_graph = std::move(p.graph);
        spec.base_labels = std::move(p.labels);
        spec.num_classes = synth_classes;
      }
      spec.target_h = synth_target;
      spec.tolerance = synth_tol;
      spec.feature_dim = synth_dim;
      spec.max_sweeps = synth_sweeps;
      spec.seed = synth_c.seed;
      SynthResult r = synth_variable_h(spec);
      const fs::path dir = synth_c.out_dir;
      write_dataset_files(dir, r.dataset, m);
      json meta = {{"target_h", synth_target}, {"achieved_h", r.achieved_h},
                   {"reassignments", r.reassignments}, {"sweeps", r.sweeps},
                   {"nodes", r.dataset.graph.num_nodes()}, {"edges", r.dataset.graph.num_edges()}};
      write_text(dir / "meta.json", meta.dump(2) + "\n");
      m.add_output("meta.json");
      m.config() = resolved_options(sub);
      m.write(dir);
      out << "achieved_h=" << num(r.achieved_h) << "\n"
          << "reassignments=" << r.reassignments << "\n";
    }});
  }

  // tree
  Common tree_c;
  TreeSpec tree_spec;
  {
    auto* sub = app.add_subcommand("tree", "Complete binary tree dataset");
    add_common(sub, tree_c);
    sub->add_option("--depth", tree_spec.depth, "Levels, root included");
    sub->add_option("--feature-dim", tree_spec.feature_dim, "One-hot feature width");
    sub->add_option("--classes", tree_spec.classes, "Label count");
    commands.push_back({sub, [&, sub] {
      if (tree_spec.depth < 2 || tree_spec.depth > 30) throw UsageError("depth must be in [2,30]");
      RunManifest m = begin("tree", tree_c);
      TreeSpec spec = tree_spec;
      spec.seed = tree_c.seed;
      LabeledDataset ds = binary_tree_dataset(spec);
      write_dataset_files(tree_c.out_dir, ds, m);
      m.config() = resolved_options(sub);
      m.write(tree_c.out_dir);
      out << "n=" << ds.graph.num_nodes() << "\n" << "m=" << ds.graph.num_edges() << "\n";
    }});
  }

  // splits
  Common splits_c;
  Index splits_n = 0, splits_num = 1;
  std::string splits_regime = "60/20/20";
  {
    auto* sub = app.add_subcommand("splits", "Seeded random train/val/test partitions");
    add_common(sub, splits_c);
    sub->add_option("--n", splits_n, "Node count")->required();
    sub->add_option("--regime", splits_regime, "60/20/20 or 48/32/20");
    sub->add_option("--num", splits_num, "Number of splits");
    commands.push_back({sub, [&, sub] {
      SplitRegime regime;
      try {
        regime = parse_split_regime(splits_regime);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      if (splits_num < 1) throw UsageError("num must be >= 1");
      if (splits_n < 5) throw UsageError("n must be >= 5");
      RunManifest m = begin("splits", splits_c);
      auto splits = make_splits(splits_n, regime, splits_num, splits_c.seed);
      for (std::size_t i = 0; i < splits.size(); ++i) {
        const std::string name = fmt::format("split_{}.json", i);
        write_split(fs::path(splits_c.out_dir) / name, splits[i]);
        m.add_output(name);
        out << fmt::format("split_{}.train={}\nsplit_{}.val={}\nsplit_{}.test={}\n", i,
                           splits[i].train.size(), i, splits[i].val.size(), i,
                           splits[i].test.size());
      }
      m.config() = resolved_options(sub);
      m.write(splits_c.out_dir);
    }});
  }

  // estimate-h
  Common est_c;
  std::string est_edges, est_labels, est_split;
  {
    auto* sub = app.add_subcommand("estimate-h", "Homophily estimate from training labels");
    add_common(sub, est_c);
    sub->add_option("--edges", est_edges, "Edge list")->required()->check(CLI::ExistingFile);
    sub->add_option("--labels", est_labels, "Labels")->required()->check(CLI::ExistingFile);
    sub->add_option("--split", est_split, "Split JSON")->required()->check(CLI::ExistingFile);
    commands.push_back({sub, [&, sub] {
      RunManifest m = begin("estimate-h", est_c);
      auto labels = load_labels(est_labels);
      Graph g = load_graph(est_edges, static_cast<Index>(labels.size())).graph;
      Split split = load_split(est_split);
      validate_split(split, g.num_nodes());
      for (const auto& f : {est_edges, est_labels, est_split}) m.add_input(f);
      auto est = estimate_homophily(g, labels, split.train);
      const double full = homophily_ratio(g, labels);
      json j = {{"h_hat", est.value}, {"qualifying_edges", est.qualifying_edges},
                {"fallback", est.fallback}, {"h_graph", full}};
      write_text(fs::path(est_c.out_dir) / "estimate.json", j.dump(2) + "\n");
      m.add_output("estimate.json");
      m.config() = resolved_options(sub);
      m.write(est_c.out_dir);
      out << "h_hat=" << num(est.value) << "\n"
          << "qualifying_edges=" << est.qualifying_edges << "\n"
          << "fallback=" << (est.fallback ? "true" : "false") << "\n"
          << "h_graph=" << num(full) << "\n";
    }});
  }

  // ablate
  Common abl_c;
  DataFlags abl_d;
  TrainFlags abl_t;
  Index abl_splits = 0;
  std::string abl_regime = "60/20/20";
  std::vector<double> abl_grid = AblationConfig{}.tau_grid;
  {
    auto* sub = app.add_subcommand("ablate", "HetFilter/HomFilter/OrtFilter against UniFilter");
    add_common(sub, abl_c);
    add_data(sub, abl_d, true, false);
    add_train(sub, abl_t);
    sub->add_option("--num-splits", abl_splits, "Random splits; 0 uses --split");
    sub->add_option("--regime", abl_regime, "Split regime for --num-splits");
    sub->add_option("--tau-grid", abl_grid, "Tau values tried by UniFilter")->delimiter(',');
    commands.push_back({sub, [&, sub] {
      TrainConfig cfg = resolve(abl_t, abl_c);
      for (double t : abl_grid)
        if (!(t >= 0.0 && t <= 1.0)) throw UsageError("tau must be in [0,1]");
      if (abl_splits < 0) throw UsageError("num-splits must be >= 0");
      if (abl_splits == 0 && abl_d.split.empty())
        throw UsageError("ablate needs --split or --num-splits");
      RunManifest m = begin("ablate", abl_c);
      LabeledDataset ds = load_data(abl_d, m);
      AblationConfig ac;
      ac.train = cfg;
      ac.tau_grid = abl_grid;
      if (abl_splits > 0) {
        SplitRegime regime;
        try {
          regime = parse_split_regime(abl_regime);
        } catch (const Error& e) {
          throw UsageError(e.what());
        }
        ac.splits = make_splits(ds.graph.num_nodes(), regime, abl_splits, abl_c.seed);
        if (ds.split.train.empty()) ds.split = ac.splits.front();
      }
      AblationResult r = ablation_basis_variants(ds, ac);
      const fs::path dir = abl_c.out_dir;
      write_text(dir / "ablation.csv", ablation_csv(r));
      json j;
      for (const VariantScore* v : {&r.het, &r.hom, &r.ort, &r.uni}) {
        json e = {{"test_acc", v->test_acc}, {"mean", v->mean()}};
        if (!v->chosen_tau.empty()) e["chosen_tau"] = v->chosen_tau;
        if (v != &r.uni) e["gap_points"] = r.gap(*v);
        j[v->name] = e;
      }
      write_text(dir / "ablation.json", j.dump(2) + "\n");
      m.add_output("ablation.csv");
      m.add_output("ablation.json");
      m.config() = resolved_options(sub);
      m.config()["resolved"] = config_json(cfg);
      m.write(dir);
      out << "uni_acc=" << num(r.uni.mean()) << "\n";
      for (const VariantScore* v : {&r.het, &r.hom, &r.ort})
        out << "gap_" << v->name << "=" << num(r.gap(*v)) << "\n";
    }});
  }

  // energy
  Common en_c;
  std::string en_edges, en_features;
  Index en_regular = 0, en_degree = 4, en_dim = 100, en_hops = 100;
  std::optional<double> en_h;
  std::vector<double> en_grid{0.2, 0.4, 0.8, 1.0};
  bool en_self = false;
  {
    auto* sub = app.add_subcommand("energy", "Dirichlet energy of blended hops");
    add_common(sub, en_c);
    auto* e = sub->add_option("--edges", en_edges, "Edge list")->check(CLI::ExistingFile);
    auto* f = sub->add_option("--features", en_features, "Feature CSV")->check(CLI::ExistingFile);
    e->needs(f);
    f->needs(e);
    auto* r = sub->add_option("--regular", en_regular, "Random regular graph with this many nodes")
                  ->excludes(e);
    sub->add_option("--degree", en_degree, "Degree for --regular");
    sub->add_option("--feature-dim", en_dim, "One-hot width for --regular");
    sub->add_option("--hom-ratio", en_h, "Homophily ratio h")->required();
    sub->add_option("--tau-grid", en_grid, "Tau values")->delimiter(',');
    sub->add_option("--max-hops", en_hops, "Last hop");
    sub->add_flag("--self-loops", en_self, "Propagate with self loops");
    e->excludes(r);
    commands.push_back({sub, [&, sub] {
      check_ratio(en_h);
      for (double t : en_grid)
        if (!(t >= 0.0 && t <= 1.0)) throw UsageError("tau must be in [0,1]");
      if (en_edges.empty() && en_regular == 0)
        throw UsageError("energy needs --edges with --features, or --regular");
      if (en_hops < 0) throw UsageError("max-hops must be >= 0");
      RunManifest m = begin("energy", en_c);
      Graph g;
      Matrix x;
      if (!en_edges.empty()) {
        x = load_features(en_features);
        g = load_graph(en_edges, x.rows()).graph;
        m.add_input(en_edges);
        m.add_input(en_features);
      } else {
        Rng grng = Rng::substream(en_c.seed, "graph");
        g = random_regular_graph(en_regular, en_degree, grng);
        Rng frng = Rng::substream(en_c.seed, "features");
        x = random_one_hot_features(en_regular, en_dim, frng);
      }
      auto rows = energy_trajectory(g, x, en_grid, en_hops, *en_h,
                                    en_self ? PropagationKind::SelfLoops : PropagationKind::NoSelfLoops);
      write_text(fs::path(en_c.out_dir) / "energy.csv", energy_csv(rows));
      m.add_output("energy.csv");
      m.config() = resolved_options(sub);
      m.write(en_c.out_dir);
      out << "energy_input=" << num(dirichlet_energy(g, x)) << "\n";
      for (const auto& row : rows)
        if (row.hop == en_hops)
          out << "energy_k" << row.hop << "_tau" << num(row.tau) << "=" << num(row.energy) << "\n";
    }});
  }

  // squash
  Common sq_c;
  SquashConfig sq_cfg;
  TrainFlags sq_t;
  Index sq_seeds = 5;
  {
    auto* sub = app.add_subcommand("squash", "Accuracy against K on the binary tree");
    add_common(sub, sq_c);
    add_train(sub, sq_t);
    sub->add_option("--depth", sq_cfg.tree.depth, "Tree levels");
    sub->add_option("--feature-dim", sq_cfg.tree.feature_dim, "One-hot width");
    sub->add_option("--classes", sq_cfg.tree.classes, "Label count");
    sub->add_option("--hop-grid", sq_cfg.hop_grid, "Hop counts")->delimiter(',');
    sub->add_option("--tau-grid", sq_cfg.tau_grid, "Tau values tried by UniFilter")->delimiter(',');
    sub->add_option("--seeds", sq_seeds, "Datasets per hop count, seeded seed..seed+n-1");
    commands.push_back({sub, [&, sub] {
      SquashConfig cfg = sq_cfg;
      cfg.train = resolve(sq_t, sq_c);
      if (sq_seeds < 1) throw UsageError("seeds must be >= 1");
      for (Index k : cfg.hop_grid)
        if (k < 0) throw UsageError("hops must be >= 0");
      for (double t : cfg.tau_grid)
        if (!(t >= 0.0 && t <= 1.0)) throw UsageError("tau must be in [0,1]");
      cfg.seeds.clear();
      for (Index s = 0; s < sq_seeds; ++s) cfg.seeds.push_back(sq_c.seed + static_cast<std::uint64_t>(s));
      RunManifest m = begin("squash", sq_c);
      auto rows = oversquashing_experiment(cfg);
      write_text(fs::path(sq_c.out_dir) / "squash.csv", squash_csv(rows));
      m.add_output("squash.csv");
      m.config() = resolved_options(sub);
      m.config()["resolved"] = config_json(cfg.train);
      m.write(sq_c.out_dir);
      for (const auto& r : rows)
        out << "homophily_acc_k" << r.hops << "=" << num(r.homophily_acc) << "\n"
            << "unifilter_acc_k" << r.hops << "=" << num(r.unifilter_acc) << "\n";
    }});
  }

  // search
  Common se_c;
  DataFlags se_d;
  TrainFlags se_t;
  std::size_t se_trials = 20;
  {
    auto* sub = app.add_subcommand("search", "Random hyperparameter search, selected on validation");
    add_common(sub, se_c);
    add_data(sub, se_d, true, true);
    add_train(sub, se_t);
    sub->add_option("--trials", se_trials, "Grid points to sample");
    commands.push_back({sub, [&, sub] {
      TrainConfig base = resolve(se_t, se_c);
      if (se_trials < 1) throw UsageError("trials must be >= 1");
      RunManifest m = begin("search", se_c);
      LabeledDataset ds = load_data(se_d, m);
      SearchResult r = random_search(ds, base, SearchSpace{}, se_trials, se_c.seed);
      save_run(se_c.out_dir, r.best_report, r.best_config, m);
      json j = {{"trials", r.trials}, {"best_config", config_json(r.best_config)},
                {"test_acc", r.best_report.test_acc}, {"best_val_acc", r.best_report.best_val_acc}};
      write_text(fs::path(se_c.out_dir) / "search.json", j.dump(2) + "\n");
      m.add_output("search.json");
      m.config() = resolved_options(sub);
      m.config()["resolved"] = config_json(base);
      m.write(se_c.out_dir);
      out << "trials=" << r.trials << "\n";
      report_train(out, r.best_report);
    }});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    const CLI::App* active = &app;
    for (const auto& c : commands)
      if (c.app->parsed()) active = c.app;
    err << active->help();
    return 2;
  }

  try {
    for (auto& c : commands)
      if (c.app->parsed()) c.action();
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace unifilter::cli
