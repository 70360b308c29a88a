#include "unibasis/synth.hpp"

#include "unibasis/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace unibasis {

SignalMatrix random_onehot_features(std::int64_t n, int d, std::uint64_t seed) {
  if (n < 1 || d < 1)
    throw ContractError("random_onehot_features: n and d must be positive");
  std::mt19937_64 rng(seed);
  SignalMatrix x = SignalMatrix::Zero(n, d);
  for (std::int64_t i = 0; i < n; ++i)
    x(i, static_cast<Eigen::Index>(uniform_index(rng, d))) = 1.0;
  return x;
}

ReassignResult reassign_to_target(const Graph& g,
                                  std::span<const std::int32_t> base_labels,
                                  double target_h, std::uint64_t seed) {
  if (g.num_edges() == 0)
    throw ContractError("reassign_to_target: graph has no edges");
  if (static_cast<std::int64_t>(base_labels.size()) != g.num_nodes())
    throw ContractError("reassign_to_target: labels do not cover all nodes");
  if (!(target_h >= 0.0 && target_h <= 1.0))
    throw ContractError("reassign_to_target: target must be in [0, 1]");

  std::int32_t classes = 0;
  for (std::int32_t y : base_labels) {
    if (y < 0) throw ContractError("reassign_to_target: negative class label");
    classes = std::max(classes, y + 1);
  }

  ReassignResult result;
  result.labels.assign(base_labels.begin(), base_labels.end());
  auto& labels = result.labels;

  const double m = static_cast<double>(g.num_edges());
  std::int64_t intra = 0;
  g.for_each_edge([&](NodeId u, NodeId v) {
    if (labels[u] == labels[v]) ++intra;
  });

  double h = static_cast<double>(intra) / m;
  if (h == target_h) {
    result.achieved_h = h;
    return result;
  }
  const bool started_above = h > target_h;
  double closest = h;

  std::mt19937_64 rng(seed);
  std::vector<NodeId> perm(g.num_nodes());
  std::iota(perm.begin(), perm.end(), 0);
  for (std::int64_t i = g.num_nodes() - 1; i > 0; --i)
    std::swap(perm[i], perm[uniform_index(rng, static_cast<std::uint64_t>(i) + 1)]);

  for (NodeId u : perm) {
    const std::int32_t old_label = labels[u];
    const auto new_label =
        static_cast<std::int32_t>(uniform_index(rng, classes));
    ++result.reassignments;
    if (new_label != old_label) {
      std::int64_t delta = 0;
      for (NodeId v : g.neighbors(u)) {
        if (labels[v] == old_label) --delta;
        if (labels[v] == new_label) ++delta;
      }
      labels[u] = new_label;
      intra += delta;
    }
    const double h_new = static_cast<double>(intra) / m;
    if (std::abs(h_new - target_h) < std::abs(closest - target_h))
      closest = h_new;
    const bool crossed =
        h_new == target_h || (h_new > target_h) != started_above;
    if (crossed) {
      if (std::abs(h - target_h) < std::abs(h_new - target_h)) {
        // The pre-crossing state was closer; undo the last reassignment.
        if (new_label != old_label) {
          std::int64_t delta = 0;
          for (NodeId v : g.neighbors(u)) {
            if (labels[v] == new_label) --delta;  // labels[u] already new
            if (labels[v] == old_label) ++delta;
          }
          labels[u] = old_label;
          intra += delta;
        }
        result.achieved_h = static_cast<double>(intra) / m;
        return result;
      }
      result.achieved_h = h_new;
      return result;
    }
    h = h_new;
  }

  throw ContractError(
      "reassign_to_target: target " + std::to_string(target_h) +
      " unreachable by random reassignment; closest achieved ratio was " +
      std::to_string(closest));
}

LabeledSplit random_split(std::vector<std::int32_t> labels, double train_frac,
                          double val_frac, std::uint64_t seed) {
  if (!(train_frac > 0.0 && val_frac >= 0.0 && train_frac + val_frac < 1.0))
    throw ContractError("random_split: fractions must satisfy 0 < train, "
                        "0 <= val, train + val < 1");
  const auto n = static_cast<std::int64_t>(labels.size());
  std::vector<NodeId> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::int64_t i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[uniform_index(rng, static_cast<std::uint64_t>(i) + 1)]);

  const auto n_train = static_cast<std::int64_t>(train_frac * n);
  const auto n_val = static_cast<std::int64_t>(val_frac * n);
  if (n_train < 1 || n - n_train - n_val < 1)
    throw ContractError("random_split: empty train or test set");

  LabeledSplit split;
  split.labels = std::move(labels);
  split.train.assign(perm.begin(), perm.begin() + n_train);
  split.val.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
  split.test.assign(perm.begin() + n_train + n_val, perm.end());
  split.validate(n);
  return split;
}

void write_synth_dataset(const std::filesystem::path& dir, const Graph& g,
                         std::span<const std::int32_t> labels,
                         const SignalMatrix& features,
                         const LabeledSplit& split,
                         const SynthManifest& manifest) {
  std::filesystem::create_directories(dir);
  save_edge_list(dir / "edges.txt", g);
  save_labels(dir / "labels.txt", labels);
  save_signal_matrix(dir / "features.txt", features);
  save_split_file(dir / "split.json",
                  SplitIndices{split.train, split.val, split.test});

  nlohmann::json j;
  j["base_h"] = manifest.base_h;
  j["target_h"] = manifest.target_h;
  j["achieved_h"] = manifest.achieved_h;
  j["reassignments"] = manifest.reassignments;
  j["seed"] = manifest.seed;
  j["n"] = g.num_nodes();
  j["m"] = g.num_edges();
  j["feature_dim"] = features.cols();
  j["files"] = {{"edges", "edges.txt"},
                {"labels", "labels.txt"},
                {"features", "features.txt"},
                {"split", "split.json"}};
  // Written last: marks the dataset directory as complete.
  save_json_text(dir / "manifest.json", j.dump(2));
}

}  // namespace unibasis
