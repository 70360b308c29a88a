#include "unibasis/spectral.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace unibasis {

double signal_frequency(const Graph& g, Eigen::Ref<const Vector> x) {
  if (x.size() != g.num_nodes())
    throw ContractError("signal_frequency: signal has " +
                        std::to_string(x.size()) + " rows, graph has " +
                        std::to_string(g.num_nodes()) + " nodes");
  if (x.norm() == 0.0) throw ContractError("signal_frequency: zero signal");

  double den = 0.0;
  for (std::int64_t u = 0; u < g.num_nodes(); ++u)
    den += x[u] * x[u] * g.degree(static_cast<NodeId>(u));
  den *= 2.0;
  if (den == 0.0)
    throw ContractError(
        "signal_frequency: signal is supported only on isolated nodes");

  double num = 0.0;
  g.for_each_edge([&](NodeId u, NodeId v) {
    const double diff = x[u] - x[v];
    num += diff * diff;
  });
  return num / den;
}

double expected_frequency_regular(std::int64_t n, double dot) {
  if (n < 2) throw ContractError("expected_frequency_regular: n must be >= 2");
  if (std::abs(dot) > 1.0 + 1e-12)
    throw ContractError("expected_frequency_regular: |dot| must be <= 1");
  return (static_cast<double>(n) + 1.0 - 2.0 * dot * dot) /
         (4.0 * (static_cast<double>(n) - 1.0));
}

namespace detail {

std::optional<double> column_angle_deg(Eigen::Ref<const Vector> a,
                                       Eigen::Ref<const Vector> b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return std::nullopt;
  const double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

}  // namespace detail

AngleReport consecutive_angles(const BasisSet& basis) {
  if (basis.K < 1)
    throw ContractError("consecutive angles need at least two hops");
  // Raw homophily slices carry the hop magnitudes; angles are invariant to
  // the per-column normalization either way.
  const std::vector<SignalMatrix>& slices = basis.hops;
  const Eigen::Index d = basis.dims();

  AngleReport report;
  report.degrees.resize(basis.K);
  report.skipped_columns.resize(basis.K);
  for (int k = 0; k < basis.K; ++k) {
    double sum = 0.0;
    int used = 0;
    for (Eigen::Index c = 0; c < d; ++c) {
      if (!basis.zero_column.empty() && basis.zero_column[c]) continue;
      if (auto deg = detail::column_angle_deg(slices[k].col(c),
                                              slices[k + 1].col(c))) {
        sum += *deg;
        ++used;
      }
    }
    if (used == 0)
      throw ContractError("all columns have zero-norm slices at hop " +
                          std::to_string(k + 1));
    report.degrees[k] = sum / used;
    report.skipped_columns[k] = static_cast<int>(d) - used;
  }
  return report;
}

SpectrumProfile spectrum_profile(const Graph& g, const BasisSet& basis,
                                 std::span<const double> weights) {
  if (static_cast<int>(weights.size()) != basis.K + 1)
    throw ContractError("spectrum_profile: expected " +
                        std::to_string(basis.K + 1) + " weights, got " +
                        std::to_string(weights.size()));
  const auto& slices = basis.model_slices();

  SpectrumProfile profile;
  profile.frequency.resize(basis.K + 1);
  profile.weight.assign(weights.begin(), weights.end());
  for (int k = 0; k <= basis.K; ++k) {
    double sum = 0.0;
    int used = 0;
    for (Eigen::Index c = 0; c < basis.dims(); ++c) {
      if (!basis.zero_column.empty() && basis.zero_column[c]) continue;
      if (slices[k].col(c).norm() == 0.0) continue;
      sum += signal_frequency(g, slices[k].col(c));
      ++used;
    }
    if (used == 0)
      throw ContractError("spectrum_profile: no usable column at hop " +
                          std::to_string(k));
    profile.frequency[k] = sum / used;
  }
  return profile;
}

std::string SpectrumProfile::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t k = 0; k < frequency.size(); ++k)
    arr.push_back({{"hop", k}, {"frequency", frequency[k]}, {"weight", weight[k]}});
  return arr.dump(2);
}

}  // namespace unibasis
