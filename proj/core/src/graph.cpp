#include "unibasis/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <unordered_set>

namespace unibasis {

Graph Graph::from_edges(std::span<const std::pair<NodeId, NodeId>> edges,
                        std::int64_t n_hint) {
  std::int64_t n = n_hint;
  std::vector<std::pair<NodeId, NodeId>> directed;
  directed.reserve(edges.size() * 2);
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0) throw ContractError("negative node index in edge list");
    n = std::max<std::int64_t>(n, std::max(u, v) + 1);
    if (u == v) continue;  // self-loops dropped
    directed.emplace_back(u, v);
    directed.emplace_back(v, u);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  Graph g;
  g.n_ = n;
  g.m_ = static_cast<std::int64_t>(directed.size()) / 2;
  g.offsets_.assign(n + 1, 0);
  for (const auto& [u, v] : directed) g.offsets_[u + 1]++;
  for (std::int64_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
  g.neighbors_.reserve(directed.size());
  for (const auto& [u, v] : directed) g.neighbors_.push_back(v);
  g.degrees_.resize(n);
  for (std::int64_t i = 0; i < n; ++i)
    g.degrees_[i] = static_cast<NodeId>(g.offsets_[i + 1] - g.offsets_[i]);
  return g;
}

namespace {

bool parse_node(std::string_view tok, NodeId& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && out >= 0;
}

}  // namespace

Graph load_graph(const std::filesystem::path& path,
                 std::optional<std::int64_t> n_hint) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list: " + path.string());

  std::vector<std::pair<NodeId, NodeId>> edges;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string_view> toks;
    std::string_view sv(line);
    std::size_t pos = 0;
    while (pos < sv.size()) {
      while (pos < sv.size() && std::isspace(static_cast<unsigned char>(sv[pos]))) ++pos;
      std::size_t start = pos;
      while (pos < sv.size() && !std::isspace(static_cast<unsigned char>(sv[pos]))) ++pos;
      if (pos > start) toks.push_back(sv.substr(start, pos - start));
    }
    if (toks.empty()) continue;
    NodeId u, v;
    if (toks.size() != 2 || !parse_node(toks[0], u) || !parse_node(toks[1], v)) {
      throw IoError("malformed edge at " + path.string() + ":" +
                    std::to_string(line_no) +
                    " (expected two nonnegative integers)");
    }
    edges.emplace_back(u, v);
  }
  if (edges.empty()) throw IoError("empty edge list: " + path.string());
  return Graph::from_edges(edges, n_hint.value_or(0));
}

Propagator::Propagator(const Graph& g, PropagationConfig cfg)
    : graph_(&g), cfg_(cfg) {
  const std::int64_t n = g.num_nodes();
  inv_sqrt_deg_.resize(n);
  self_weight_.setZero(n);
  for (std::int64_t u = 0; u < n; ++u) {
    const double d = static_cast<double>(g.degree(static_cast<NodeId>(u)));
    if (cfg_.self_loops) {
      inv_sqrt_deg_[u] = 1.0 / std::sqrt(d + 1.0);
      self_weight_[u] = 1.0 / (d + 1.0);
    } else if (d > 0) {
      inv_sqrt_deg_[u] = 1.0 / std::sqrt(d);
    } else {
      inv_sqrt_deg_[u] = 0.0;
      if (cfg_.isolated == IsolatedPolicy::kSelfLoop) self_weight_[u] = 1.0;
    }
  }
}

void Propagator::apply(Eigen::Ref<const Vector> x, Eigen::Ref<Vector> y) const {
  const Graph& g = *graph_;
  const std::int64_t n = g.num_nodes();
  if (x.size() != n)
    throw ContractError("propagate: signal has " + std::to_string(x.size()) +
                        " rows, graph has " + std::to_string(n) + " nodes");
  const double* xp = x.data();
  const double* isd = inv_sqrt_deg_.data();
  const double* sw = self_weight_.data();
  for (NodeId u = 0; u < n; ++u) {
    double acc = 0.0;
    for (NodeId v : g.neighbors(u)) acc += xp[v] * isd[v];
    y[u] = sw[u] * xp[u] + isd[u] * acc;
  }
}

Vector Propagator::apply(Eigen::Ref<const Vector> x) const {
  Vector y(graph_->num_nodes());
  apply(x, y);
  return y;
}

SignalMatrix Propagator::apply_matrix(const SignalMatrix& x) const {
  SignalMatrix y(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) apply(x.col(c), y.col(c));
  return y;
}

SignalMatrix propagate(const Graph& g, const PropagationConfig& cfg,
                       const SignalMatrix& x) {
  return Propagator(g, cfg).apply_matrix(x);
}

double homophily_ratio(const Graph& g, std::span<const std::int32_t> labels) {
  if (g.num_edges() == 0)
    throw ContractError("homophily_ratio: graph has no edges");
  if (static_cast<std::int64_t>(labels.size()) != g.num_nodes())
    throw ContractError("homophily_ratio: labels do not cover all nodes");
  std::int64_t intra = 0;
  g.for_each_edge([&](NodeId u, NodeId v) {
    if (labels[u] == labels[v]) ++intra;
  });
  return static_cast<double>(intra) / static_cast<double>(g.num_edges());
}

std::int32_t LabeledSplit::num_classes() const {
  std::int32_t c = 0;
  for (std::int32_t y : labels) c = std::max(c, y + 1);
  return c;
}

void LabeledSplit::validate(std::int64_t n) {
  if (static_cast<std::int64_t>(labels.size()) != n)
    throw ContractError("split: expected " + std::to_string(n) + " labels, got " +
                        std::to_string(labels.size()));
  for (std::int32_t y : labels)
    if (y < 0) throw ContractError("split: negative class label");
  const std::int32_t c = num_classes();
  std::vector<bool> seen(c, false);
  for (std::int32_t y : labels) seen[y] = true;
  for (std::int32_t i = 0; i < c; ++i)
    if (!seen[i])
      throw ContractError("split: class " + std::to_string(i) +
                          " has no labeled node");

  std::vector<std::int8_t> member(n, 0);
  for (auto* set : {&train, &val, &test}) {
    std::sort(set->begin(), set->end());
    if (std::adjacent_find(set->begin(), set->end()) != set->end())
      throw ContractError("split: duplicate node index within a set");
    for (NodeId u : *set) {
      if (u < 0 || u >= n)
        throw ContractError("split: node index " + std::to_string(u) +
                            " out of range");
      if (member[u]++)
        throw ContractError("split: node " + std::to_string(u) +
                            " appears in more than one set");
    }
  }
}

HomophilyEstimate estimate_homophily(const Graph& g, const LabeledSplit& split) {
  if (split.train.empty())
    throw ContractError("estimate_homophily: empty train set");
  std::vector<std::uint8_t> in_train(g.num_nodes(), 0);
  for (NodeId u : split.train) in_train[u] = 1;

  std::int64_t covered = 0, intra = 0;
  g.for_each_edge([&](NodeId u, NodeId v) {
    if (in_train[u] && in_train[v]) {
      ++covered;
      if (split.labels[u] == split.labels[v]) ++intra;
    }
  });

  HomophilyEstimate est;
  est.train_edges = covered;
  if (covered == 0) {
    est.value = 0.5;  // neutral angle fallback
    est.fallback = true;
  } else {
    est.value = static_cast<double>(intra) / static_cast<double>(covered);
  }
  return est;
}

}  // namespace unibasis
