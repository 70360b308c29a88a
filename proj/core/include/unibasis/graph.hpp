#pragma once

#include "unibasis/types.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace unibasis {

/// Immutable sparse undirected graph in compressed adjacency form.
///
/// Neighbor lists are sorted and deduplicated, self-loops are dropped at
/// ingestion, and the structure is symmetric by construction. Instances are
/// safe to share across concurrent readers.
class Graph {
 public:
  // Canonicalizes an edge list: drops self-loops, merges directed
  // duplicates, symmetrizes. n is max(n_hint, max index + 1).
  static Graph from_edges(std::span<const std::pair<NodeId, NodeId>> edges,
                          std::int64_t n_hint = 0);

  std::int64_t num_nodes() const { return n_; }
  std::int64_t num_edges() const { return m_; }  // undirected edge count

  std::span<const NodeId> neighbors(NodeId u) const {
    return {neighbors_.data() + offsets_[u],
            static_cast<std::size_t>(offsets_[u + 1] - offsets_[u])};
  }
  NodeId degree(NodeId u) const { return degrees_[u]; }
  const std::vector<NodeId>& degrees() const { return degrees_; }

  // Visits every undirected edge once with u < v.
  template <class F>
  void for_each_edge(F&& f) const {
    for (NodeId u = 0; u < n_; ++u) {
      for (std::int64_t i = offsets_[u]; i < offsets_[u + 1]; ++i) {
        const NodeId v = neighbors_[i];
        if (v > u) f(u, v);
      }
    }
  }

 private:
  Graph() = default;

  std::int64_t n_ = 0;
  std::int64_t m_ = 0;
  std::vector<std::int64_t> offsets_;  // n+1
  std::vector<NodeId> neighbors_;      // 2m, sorted within each row
  std::vector<NodeId> degrees_;        // n
};

/// Reads a plain-text edge list ("u v" per line, 0-indexed). Empty and
/// whitespace-only lines are ignored; anything else that is not exactly two
/// nonnegative integers is a parse error reported with its line number.
Graph load_graph(const std::filesystem::path& path,
                 std::optional<std::int64_t> n_hint = std::nullopt);

enum class IsolatedPolicy { kZero, kSelfLoop };

struct PropagationConfig {
  bool self_loops = false;  // use A+I / D+I instead of A / D
  IsolatedPolicy isolated = IsolatedPolicy::kZero;
};

/// One-hop degree-normalized propagation y = P x with
/// P = D^{-1/2} A D^{-1/2} (optionally with self-loops added to A and D).
/// Precomputes the per-node scalings once so repeated hops cost O(m + n).
class Propagator {
 public:
  Propagator(const Graph& g, PropagationConfig cfg = {});

  void apply(Eigen::Ref<const Vector> x, Eigen::Ref<Vector> y) const;
  Vector apply(Eigen::Ref<const Vector> x) const;
  SignalMatrix apply_matrix(const SignalMatrix& x) const;

  const Graph& graph() const { return *graph_; }
  const PropagationConfig& config() const { return cfg_; }

 private:
  const Graph* graph_;
  PropagationConfig cfg_;
  Vector inv_sqrt_deg_;  // zero entries for isolated nodes under kZero
  Vector self_weight_;   // diagonal contribution of P
};

/// y = P x for a full signal matrix; the input is left unmodified.
SignalMatrix propagate(const Graph& g, const PropagationConfig& cfg,
                       const SignalMatrix& x);

/// Fraction of edges whose endpoints share a class label. Undefined (and an
/// error) on edgeless graphs.
double homophily_ratio(const Graph& g, std::span<const std::int32_t> labels);

struct HomophilyEstimate {
  double value = 0.5;
  bool fallback = false;         // no train-train edge existed
  std::int64_t train_edges = 0;  // edges with both endpoints in the train set
};

/// Node labels plus disjoint train/validation/test index sets.
struct LabeledSplit {
  std::vector<std::int32_t> labels;
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;

  std::int32_t num_classes() const;

  // Checks index ranges, pairwise disjointness of the three sets, and that
  // every class in [0, C) appears at least once in labels. Sorts the sets.
  void validate(std::int64_t n);
};

/// Homophily ratio restricted to edges whose both endpoints are in the train
/// set. Falls back to 0.5 with a warning flag when no such edge exists.
HomophilyEstimate estimate_homophily(const Graph& g, const LabeledSplit& split);

}  // namespace unibasis
