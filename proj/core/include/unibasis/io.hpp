#pragma once

#include "unibasis/graph.hpp"
#include "unibasis/types.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace unibasis {

/// Labels file: one nonnegative integer per line, line i = node i.
std::vector<std::int32_t> load_labels(const std::filesystem::path& path);
void save_labels(const std::filesystem::path& path,
                 std::span<const std::int32_t> labels);

/// Signal matrix file: one node per line, whitespace-separated values, the
/// same number of columns on every line.
SignalMatrix load_signal_matrix(const std::filesystem::path& path);
void save_signal_matrix(const std::filesystem::path& path,
                        const SignalMatrix& x);

struct SplitIndices {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;
};

/// Split file: JSON object with integer arrays "train", "val" and "test".
SplitIndices load_split_file(const std::filesystem::path& path);
void save_split_file(const std::filesystem::path& path, const SplitIndices& s);

/// Assembles and validates a LabeledSplit for an n-node graph.
LabeledSplit make_labeled_split(std::vector<std::int32_t> labels,
                                SplitIndices indices, std::int64_t n);

void save_edge_list(const std::filesystem::path& path, const Graph& g);

/// Writes a JSON document with a trailing newline.
void save_json_text(const std::filesystem::path& path, const std::string& body);

}  // namespace unibasis
