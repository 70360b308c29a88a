#pragma once

#include "unibasis/graph.hpp"
#include "unibasis/types.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace unibasis {

/// One random 1 per row; deterministic per seed.
SignalMatrix random_onehot_features(std::int64_t n, int d, std::uint64_t seed);

struct ReassignResult {
  std::vector<std::int32_t> labels;
  double achieved_h = 0.0;
  std::int64_t reassignments = 0;  // nodes visited before stopping
};

/// Walks a random node permutation, reassigning each visited node a uniform
/// random class (the current one included) while tracking the homophily
/// ratio incrementally. Stops the first time the running ratio crosses the
/// target, keeping the closer of the pre/post states. An unreachable target
/// (no crossing after the full pass) is an error that reports the closest
/// ratio seen.
ReassignResult reassign_to_target(const Graph& g,
                                  std::span<const std::int32_t> base_labels,
                                  double target_h, std::uint64_t seed);

/// Uniform random node split with the given train/validation fractions
/// (the remainder is the test set).
LabeledSplit random_split(std::vector<std::int32_t> labels, double train_frac,
                          double val_frac, std::uint64_t seed);

struct SynthManifest {
  double base_h = 0.0;
  double target_h = 0.0;
  double achieved_h = 0.0;
  std::int64_t reassignments = 0;
  std::uint64_t seed = 0;
};

/// Emits edges.txt, labels.txt, features.txt, split.json and manifest.json
/// (written last) so generated datasets are indistinguishable from ingested
/// ones.
void write_synth_dataset(const std::filesystem::path& dir, const Graph& g,
                         std::span<const std::int32_t> labels,
                         const SignalMatrix& features,
                         const LabeledSplit& split,
                         const SynthManifest& manifest);

}  // namespace unibasis
