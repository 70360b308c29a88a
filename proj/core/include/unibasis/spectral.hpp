#pragma once

#include "unibasis/basis.hpp"
#include "unibasis/graph.hpp"
#include "unibasis/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace unibasis {

/// Spectral signal frequency of a nonzero node signal: the degree-weighted
/// Dirichlet energy
///
///   f(x) = sum_{(u,v) in E} (x_u - x_v)^2 / (2 sum_u x_u^2 d_u),
///
/// always in [0, 1]. Low values mean the signal is smooth along edges.
double signal_frequency(const Graph& g, Eigen::Ref<const Vector> x);

/// Closed-form expected frequency of a fixed unit signal over uniformly
/// random regular graphs on n nodes: (n + 1 - 2 dot^2) / (4 (n - 1)),
/// where dot is the inner product of the signal with the normalized
/// all-ones vector. Decreasing in |dot|.
double expected_frequency_regular(std::int64_t n, double dot);

struct AngleReport {
  std::vector<double> degrees;       // K angles between consecutive hops
  std::vector<int> skipped_columns;  // per angle, zero-norm columns left out
};

/// Mean angle (in degrees, averaged over feature dimensions) between each
/// pair of consecutive hop slices. Columns flagged zero on input and
/// zero-norm slices are skipped and counted.
AngleReport consecutive_angles(const BasisSet& basis);

/// Per-hop mean signal frequency of a basis paired with the hop weights a
/// trained filter learned for it.
struct SpectrumProfile {
  std::vector<double> frequency;  // K+1, each in [0, 1]
  std::vector<double> weight;     // K+1

  std::string to_json() const;  // JSON array of {hop, frequency, weight}
};

SpectrumProfile spectrum_profile(const Graph& g, const BasisSet& basis,
                                 std::span<const double> weights);

namespace detail {
// Angle between two vectors in degrees; nullopt when either has zero norm.
// The cosine is clamped to [-1, 1] before arccos.
std::optional<double> column_angle_deg(Eigen::Ref<const Vector> a,
                                       Eigen::Ref<const Vector> b);
}  // namespace detail

}  // namespace unibasis
