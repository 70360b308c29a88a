// Command-line front end for the unibasis library: homophily estimation,
// basis construction and export, filter training, angle and spectrum
// diagnostics, and synthetic dataset generation.
//
// Exit codes: 0 success, 1 numeric/contract failure, 2 I/O failure.

#include "unibasis/basis.hpp"
#include "unibasis/graph.hpp"
#include "unibasis/io.hpp"
#include "unibasis/model.hpp"
#include "unibasis/spectral.hpp"
#include "unibasis/synth.hpp"
#include "unibasis/types.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace unibasis;

namespace {

struct CommonOpts {
  std::string graph_path;
  std::string features_path;
  std::string labels_path;
  std::string split_path;
  std::string out_dir;
  std::string kind = "unibasis";
  int hops = 10;
  std::optional<double> h_hat;
  double tau = 0.5;
  bool self_loops = false;
  std::string isolated_policy = "zero";
  std::uint64_t seed = 1;

  Hyper hyper;
};

PropagationConfig propagation_config(const CommonOpts& o) {
  PropagationConfig cfg;
  cfg.self_loops = o.self_loops;
  if (o.isolated_policy == "zero")
    cfg.isolated = IsolatedPolicy::kZero;
  else if (o.isolated_policy == "self-loop")
    cfg.isolated = IsolatedPolicy::kSelfLoop;
  else
    throw ContractError("unknown isolated-node policy: " + o.isolated_policy);
  return cfg;
}

void add_propagation_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_flag("--self-loops", o.self_loops,
                "propagate with self-loops added to the adjacency");
  cmd->add_option("--isolated-policy", o.isolated_policy,
                  "isolated-node policy: zero|self-loop")
      ->check(CLI::IsMember({"zero", "self-loop"}));
}

LabeledSplit load_labeled_split(const CommonOpts& o, const Graph& g) {
  auto labels = load_labels(o.labels_path);
  auto indices = load_split_file(o.split_path);
  return make_labeled_split(std::move(labels), std::move(indices),
                            g.num_nodes());
}

json propagation_json(const PropagationConfig& cfg) {
  return {{"self_loops", cfg.self_loops},
          {"isolated_policy",
           cfg.isolated == IsolatedPolicy::kZero ? "zero" : "self_loop"}};
}

// Every run with an output directory records its resolved configuration
// next to its outputs.
void write_run_config(const fs::path& out_dir, const std::string& command,
                      json resolved) {
  resolved["command"] = command;
  save_json_text(out_dir / "config.json", resolved.dump(2));
}

int run_estimate_h(const CommonOpts& o) {
  auto labels = load_labels(o.labels_path);
  Graph g = load_graph(o.graph_path,
                       static_cast<std::int64_t>(labels.size()));
  LabeledSplit split = make_labeled_split(std::move(labels),
                                          load_split_file(o.split_path),
                                          g.num_nodes());
  HomophilyEstimate est = estimate_homophily(g, split);
  std::cout << "h_hat " << est.value << "\n"
            << "fallback " << (est.fallback ? "true" : "false") << "\n"
            << "train_edges " << est.train_edges << "\n";
  if (est.fallback)
    std::cerr << "warning: no train-train edge; using neutral fallback 0.5\n";
  if (!o.out_dir.empty()) {
    fs::create_directories(o.out_dir);
    json result = {{"h_hat", est.value},
                   {"fallback", est.fallback},
                   {"train_edges", est.train_edges}};
    save_json_text(fs::path(o.out_dir) / "estimate.json", result.dump(2));
    write_run_config(o.out_dir, "estimate-h",
                     {{"graph", o.graph_path},
                      {"labels", o.labels_path},
                      {"split", o.split_path}});
  }
  return 0;
}

BasisConfig basis_config(const CommonOpts& o, double h_hat) {
  BasisConfig cfg;
  cfg.K = o.hops;
  cfg.h_hat = h_hat;
  cfg.tau = o.tau;
  cfg.propagation = propagation_config(o);
  cfg.validate();
  return cfg;
}

int run_build_basis(const CommonOpts& o) {
  SignalMatrix x = load_signal_matrix(o.features_path);
  Graph g = load_graph(o.graph_path, x.rows());
  const BasisKind kind = basis_kind_from_string(o.kind);
  const BasisConfig cfg = basis_config(o, o.h_hat.value_or(0.5));

  BasisSet basis = build_basis(g, x, kind, cfg);
  fs::create_directories(o.out_dir);
  write_run_config(o.out_dir, "build-basis",
                   {{"graph", o.graph_path},
                    {"features", o.features_path},
                    {"kind", o.kind},
                    {"K", cfg.K},
                    {"h_hat", cfg.h_hat},
                    {"tau", cfg.tau},
                    {"propagation", propagation_json(cfg.propagation)}});
  export_basis(basis, o.out_dir, cfg.propagation);
  std::cout << "wrote " << basis.K + 1 << " hop slices to " << o.out_dir
            << "\n";
  return 0;
}

int run_train(const CommonOpts& o) {
  SignalMatrix x = load_signal_matrix(o.features_path);
  Graph g = load_graph(o.graph_path, x.rows());
  LabeledSplit split = load_labeled_split(o, g);
  const BasisKind kind = basis_kind_from_string(o.kind);

  double h_hat;
  bool h_estimated = false;
  if (o.h_hat) {
    h_hat = *o.h_hat;
  } else {
    HomophilyEstimate est = estimate_homophily(g, split);
    h_hat = est.value;
    h_estimated = true;
    if (est.fallback)
      std::cerr << "warning: no train-train edge; h_hat falls back to 0.5\n";
  }
  const BasisConfig cfg = basis_config(o, h_hat);

  BasisSet basis = build_basis(g, x, kind, cfg);
  auto [model, report] = train(basis, split, o.hyper, o.seed);
  SpectrumProfile profile = spectrum_profile(
      g, basis, std::span<const double>(model.w.data(), model.w.size()));

  fs::create_directories(o.out_dir);
  write_run_config(
      o.out_dir, "train",
      {{"graph", o.graph_path},
       {"features", o.features_path},
       {"labels", o.labels_path},
       {"split", o.split_path},
       {"kind", o.kind},
       {"K", cfg.K},
       {"h_hat", h_hat},
       {"h_hat_estimated", h_estimated},
       {"tau", cfg.tau},
       {"propagation", propagation_json(cfg.propagation)},
       {"hyper",
        {{"lr", o.hyper.lr},
         {"weight_decay", o.hyper.weight_decay},
         {"dropout", o.hyper.dropout},
         {"max_epochs", o.hyper.max_epochs},
         {"patience", o.hyper.patience},
         {"hidden", o.hyper.hidden}}},
       {"seed", o.seed}});
  save_train_report(fs::path(o.out_dir) / "report.json", report);
  save_checkpoint(fs::path(o.out_dir) / "checkpoint.json", model,
                  BasisDescriptor{kind, cfg});
  save_json_text(fs::path(o.out_dir) / "spectrum.json", profile.to_json());

  std::cout << "epochs " << report.epochs_run << "\n"
            << "best_val_accuracy " << report.best_val_accuracy << "\n"
            << "test_accuracy " << report.test_accuracy << "\n";
  return 0;
}

int run_angles(const CommonOpts& o) {
  SignalMatrix x = load_signal_matrix(o.features_path);
  Graph g = load_graph(o.graph_path, x.rows());
  const BasisKind kind = basis_kind_from_string(o.kind);
  const BasisConfig cfg = basis_config(o, o.h_hat.value_or(0.5));

  StreamedAngles angles = streamed_consecutive_angles(g, x, kind, cfg);

  json j;
  j["kind"] = o.kind;
  j["K"] = cfg.K;
  if (kind == BasisKind::kHeterophily || kind == BasisKind::kUniBasis) {
    j["theta"] = cfg.theta();
    j["h_hat"] = cfg.h_hat;
  }
  j["angles_deg"] = angles.degrees;
  j["skipped_columns"] = angles.skipped_columns;

  if (!o.out_dir.empty()) {
    fs::create_directories(o.out_dir);
    write_run_config(o.out_dir, "angles",
                     {{"graph", o.graph_path},
                      {"features", o.features_path},
                      {"kind", o.kind},
                      {"K", cfg.K},
                      {"h_hat", cfg.h_hat},
                      {"tau", cfg.tau},
                      {"propagation", propagation_json(cfg.propagation)}});
    save_json_text(fs::path(o.out_dir) / "angles.json", j.dump(2));
    std::cout << "wrote " << (fs::path(o.out_dir) / "angles.json").string()
              << "\n";
  } else {
    std::cout << j.dump(2) << "\n";
  }
  return 0;
}

int run_synth(const CommonOpts& o, double target_h, int feature_dim,
              double train_frac, double val_frac) {
  auto base_labels = load_labels(o.labels_path);
  Graph g = load_graph(o.graph_path,
                       static_cast<std::int64_t>(base_labels.size()));
  if (static_cast<std::int64_t>(base_labels.size()) != g.num_nodes())
    throw ContractError("labels file does not cover all graph nodes");

  const double base_h = homophily_ratio(g, base_labels);
  ReassignResult reassigned = reassign_to_target(
      g, base_labels, target_h, sub_seed(o.seed, "reassign"));
  SignalMatrix features = random_onehot_features(
      g.num_nodes(), feature_dim, sub_seed(o.seed, "features"));
  LabeledSplit split = random_split(reassigned.labels, train_frac, val_frac,
                                    sub_seed(o.seed, "split"));

  SynthManifest manifest;
  manifest.base_h = base_h;
  manifest.target_h = target_h;
  manifest.achieved_h = reassigned.achieved_h;
  manifest.reassignments = reassigned.reassignments;
  manifest.seed = o.seed;

  fs::create_directories(o.out_dir);
  write_run_config(o.out_dir, "synth",
                   {{"graph", o.graph_path},
                    {"labels", o.labels_path},
                    {"target_h", target_h},
                    {"feature_dim", feature_dim},
                    {"train_frac", train_frac},
                    {"val_frac", val_frac},
                    {"seed", o.seed}});
  write_synth_dataset(o.out_dir, g, reassigned.labels, features, split,
                      manifest);
  std::cout << "achieved_h " << reassigned.achieved_h << "\n"
            << "reassignments " << reassigned.reassignments << "\n";
  return 0;
}

int run_spectrum(const CommonOpts& o, const std::string& checkpoint_path) {
  SignalMatrix x = load_signal_matrix(o.features_path);
  Graph g = load_graph(o.graph_path, x.rows());
  auto [model, descriptor] = load_checkpoint(checkpoint_path);

  BasisSet basis = build_basis(g, x, descriptor.kind, descriptor.cfg);
  SpectrumProfile profile = spectrum_profile(
      g, basis, std::span<const double>(model.w.data(), model.w.size()));

  if (!o.out_dir.empty()) {
    fs::create_directories(o.out_dir);
    write_run_config(o.out_dir, "spectrum",
                     {{"graph", o.graph_path},
                      {"features", o.features_path},
                      {"checkpoint", checkpoint_path}});
    save_json_text(fs::path(o.out_dir) / "spectrum.json", profile.to_json());
    std::cout << "wrote " << (fs::path(o.out_dir) / "spectrum.json").string()
              << "\n";
  } else {
    std::cout << profile.to_json() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::cout.precision(17);  // numeric stdout is exact and reparseable
  CLI::App app{"unifilter: homophily-aware polynomial signal bases and a "
               "linear-in-basis node classifier on sparse graphs"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI/TOML file");

  CommonOpts o;

  auto* est = app.add_subcommand("estimate-h",
                                 "estimate the homophily ratio from the "
                                 "training split");
  est->add_option("--graph", o.graph_path, "edge list file")->required();
  est->add_option("--labels", o.labels_path, "labels file")->required();
  est->add_option("--split", o.split_path, "split JSON file")->required();
  est->add_option("--out", o.out_dir, "optional output directory");

  auto* build = app.add_subcommand("build-basis",
                                   "construct a signal basis and export it");
  build->add_option("--graph", o.graph_path, "edge list file")->required();
  build->add_option("--features", o.features_path, "feature matrix file")
      ->required();
  build->add_option("--kind", o.kind,
                    "basis kind: homophily|orthonormal|heterophily|unibasis");
  build->add_option("--hops,-K", o.hops, "hop count K (K+1 slices)");
  build->add_option("--h-hat", o.h_hat, "homophily ratio for the basis angle");
  build->add_option("--tau", o.tau, "homophily/heterophily mix in [0,1]");
  build->add_option("--out", o.out_dir, "output directory")->required();
  add_propagation_flags(build, o);

  auto* tr = app.add_subcommand("train", "build a basis and train the filter");
  tr->add_option("--graph", o.graph_path, "edge list file")->required();
  tr->add_option("--features", o.features_path, "feature matrix file")
      ->required();
  tr->add_option("--labels", o.labels_path, "labels file")->required();
  tr->add_option("--split", o.split_path, "split JSON file")->required();
  tr->add_option("--kind", o.kind,
                 "basis kind: homophily|orthonormal|heterophily|unibasis");
  tr->add_option("--hops,-K", o.hops, "hop count K");
  tr->add_option("--h-hat", o.h_hat,
                 "homophily ratio; estimated from the split when omitted");
  tr->add_option("--tau", o.tau, "homophily/heterophily mix in [0,1]");
  tr->add_option("--lr", o.hyper.lr, "learning rate");
  tr->add_option("--weight-decay", o.hyper.weight_decay, "L2 penalty");
  tr->add_option("--dropout", o.hyper.dropout, "dropout rate on z");
  tr->add_option("--patience", o.hyper.patience, "early-stopping patience");
  tr->add_option("--max-epochs", o.hyper.max_epochs, "epoch cap");
  tr->add_option("--hidden", o.hyper.hidden,
                 "hidden width (0 = linear head)");
  tr->add_option("--seed", o.seed, "master seed");
  tr->add_option("--out", o.out_dir, "output directory")->required();
  add_propagation_flags(tr, o);

  auto* ang = app.add_subcommand("angles",
                                 "consecutive-angle diagnostic of a basis");
  ang->add_option("--graph", o.graph_path, "edge list file")->required();
  ang->add_option("--features", o.features_path, "feature matrix file")
      ->required();
  ang->add_option("--kind", o.kind,
                  "basis kind: homophily|orthonormal|heterophily|unibasis");
  ang->add_option("--hops,-K", o.hops, "hop count K (up to thousands)");
  ang->add_option("--h-hat", o.h_hat, "homophily ratio for the basis angle");
  ang->add_option("--tau", o.tau, "homophily/heterophily mix in [0,1]");
  ang->add_option("--out", o.out_dir, "optional output directory");
  add_propagation_flags(ang, o);

  double target_h = 0.5;
  int feature_dim = 100;
  double train_frac = 0.6, val_frac = 0.2;
  auto* syn = app.add_subcommand("synth",
                                 "generate a synthetic dataset by label "
                                 "reassignment toward a target homophily");
  syn->add_option("--graph", o.graph_path, "base structure edge list")
      ->required();
  syn->add_option("--labels", o.labels_path, "base labels file")->required();
  syn->add_option("--target-h", target_h, "target homophily ratio")
      ->required();
  syn->add_option("--feature-dim", feature_dim, "one-hot feature dimension");
  syn->add_option("--train-frac", train_frac, "train fraction");
  syn->add_option("--val-frac", val_frac, "validation fraction");
  syn->add_option("--seed", o.seed, "master seed");
  syn->add_option("--out", o.out_dir, "output directory")->required();

  std::string checkpoint_path;
  auto* spec = app.add_subcommand("spectrum",
                                  "per-hop frequency/weight profile of a "
                                  "trained filter's basis");
  spec->add_option("--graph", o.graph_path, "edge list file")->required();
  spec->add_option("--features", o.features_path, "feature matrix file")
      ->required();
  spec->add_option("--checkpoint", checkpoint_path, "checkpoint JSON")
      ->required();
  spec->add_option("--out", o.out_dir, "optional output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (est->parsed()) return run_estimate_h(o);
    if (build->parsed()) return run_build_basis(o);
    if (tr->parsed()) return run_train(o);
    if (ang->parsed()) return run_angles(o);
    if (syn->parsed()) return run_synth(o, target_h, feature_dim, train_frac, val_frac);
    if (spec->parsed()) return run_spectrum(o, checkpoint_path);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
