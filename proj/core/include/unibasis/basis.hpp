#pragma once

#include "unibasis/graph.hpp"
#include "unibasis/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace unibasis {

enum class BasisKind { kHomophily, kOrthonormal, kHeterophily, kUniBasis };

std::string to_string(BasisKind kind);
BasisKind basis_kind_from_string(const std::string& name);

inline constexpr double kDefaultThetaCap = 1.5707963267948966 - 1e-3;  // pi/2 - 1e-3

struct BasisConfig {
  int K = 10;                 // hop count; a basis has K+1 slices
  double h_hat = 0.5;         // estimated homophily ratio in [0,1]
  double tau = 0.5;           // homophily/heterophily mix in [0,1]
  double theta_cap = kDefaultThetaCap;
  double breakdown_tol = 1e-10;
  PropagationConfig propagation;

  // theta = min((1 - h_hat) * pi/2, theta_cap). h_hat = 1 gives exactly 0.
  double theta() const;
  void validate() const;
};

/// Ordered collection of K+1 signal slices, one per hop, tagged with the
/// basis kind and construction parameters.
struct BasisSet {
  BasisKind kind = BasisKind::kHomophily;
  int K = 0;

  // Primary slices, n x d each. Homophily: raw P^k x. Orthonormal: v_k.
  // Heterophily: u_k. UniBasis: tau * normalize(P^k x) + (1 - tau) * u_k.
  std::vector<SignalMatrix> hops;

  // Per-column unit-normalized homophily slices, kept for merging and
  // diagnostics. Populated for the homophily kind only.
  std::vector<SignalMatrix> unit_hops;

  std::optional<double> theta;   // radians; heterophily and unibasis
  std::optional<double> tau;     // unibasis only
  std::optional<double> h_used;  // homophily ratio theta was derived from

  std::vector<std::uint8_t> zero_column;       // input column was all zero
  std::vector<std::uint8_t> breakdown_column;  // Krylov breakdown occurred

  std::int64_t num_nodes() const { return hops.empty() ? 0 : hops[0].rows(); }
  Eigen::Index dims() const { return hops.empty() ? 0 : hops[0].cols(); }

  // Slices a filter model consumes: unit-normalized for the homophily kind
  // (scale parity with the unit-norm bases), primary slices otherwise.
  const std::vector<SignalMatrix>& model_slices() const;
};

BasisSet homophily_basis(const Graph& g, const SignalMatrix& x, int K,
                         const PropagationConfig& prop = {});
BasisSet orthonormal_basis(const Graph& g, const SignalMatrix& x, int K,
                           const PropagationConfig& prop = {},
                           double breakdown_tol = 1e-10);
BasisSet heterophily_basis(const Graph& g, const SignalMatrix& x,
                           const BasisConfig& cfg);
BasisSet uni_basis(const Graph& g, const SignalMatrix& x,
                   const BasisConfig& cfg);

/// Uniform entry point used by tooling.
BasisSet build_basis(const Graph& g, const SignalMatrix& x, BasisKind kind,
                     const BasisConfig& cfg);

/// Consecutive-angle diagnostic computed hop by hop without materializing
/// the basis, so it stays O(n d) in memory for hop counts in the hundreds
/// or thousands. Angle semantics match consecutive_angles() on a
/// materialized BasisSet of the same kind.
struct StreamedAngles {
  std::vector<double> degrees;       // K angles, averaged over usable columns
  std::vector<int> skipped_columns;  // per angle, columns left out
};
StreamedAngles streamed_consecutive_angles(const Graph& g,
                                           const SignalMatrix& x,
                                           BasisKind kind,
                                           const BasisConfig& cfg);

/// Writes one numeric text matrix per hop plus manifest.json; the manifest
/// is written last and marks the export complete.
void export_basis(const BasisSet& basis, const std::filesystem::path& dir,
                  const PropagationConfig& prop = {});

}  // namespace unibasis
