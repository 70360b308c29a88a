#pragma once

#include "unibasis/graph.hpp"
#include "unibasis/types.hpp"

#include <string>

namespace unibasis {

/// Krylov vector sequence v_0, v_1, ... for one signal column, built by
/// propagation followed by three-term re-orthogonalization:
///
///   v_k = P v_{k-1} - (v_k . v_{k-1}) v_{k-1} - (v_k . v_{k-2}) v_{k-2},
///
/// normalized each step. Breakdown (the propagated vector falls inside the
/// span already covered, ||v_k|| < tol) zero-fills v_k and every later step.
class KrylovColumn {
 public:
  KrylovColumn(const Propagator& prop, Vector v0, double breakdown_tol);

  // Advances to the next hop; returns false once broken down. extra_orth,
  // when given, must be a unit vector that is orthogonal to the new
  // direction in exact arithmetic; it is projected out as well to curb
  // rounding drift over long hop counts.
  bool step(const Vector* extra_orth = nullptr);

  const Vector& v() const { return v_; }
  bool broken_down() const { return broken_; }

 private:
  const Propagator* prop_;
  double tol_;
  Vector v_;       // v_k
  Vector v_prev_;  // v_{k-1}; starts as the zero v_{-1}
  Vector work_;
  bool broken_ = false;
};

/// Equal-angle signal sequence u_0, u_1, ... for one column: every pair of
/// distinct vectors forms the same angle theta. Each hop mixes the running
/// mean of the previous vectors with the next Krylov direction,
///
///   u_k = (s_{k-1}/k + t_k v_k) / ||s_{k-1}/k + t_k v_k||,
///   t_k = sqrt((s_{k-1}.u_{k-1} / (k cos theta))^2
///              - ((k-1) cos theta + 1) / k),
///
/// with s_k the running sum of u_0..u_k. Two identities the construction
/// guarantees in exact arithmetic are enforced rather than recomputed, which
/// keeps thousand-hop runs on the nominal angle: s_{k-1}.u_{k-1} is
/// substituted by its invariant value 1 + (k-1) cos theta, and v_k is
/// additionally re-orthogonalized against the running-sum direction.
/// A radicand below -1e-9 is a genuine numeric failure and throws; values in
/// [-1e-9, 0) are clamped to zero. On Krylov breakdown u_k degrades to the
/// normalized running mean and the column is flagged.
class HeterophilyColumn {
 public:
  HeterophilyColumn(const Propagator& prop, Eigen::Ref<const Vector> x,
                    double theta, double breakdown_tol,
                    std::string column_label = {});

  void step();

  const Vector& u() const { return u_; }
  int hop() const { return k_; }
  double last_t() const { return t_; }
  bool broken_down() const { return krylov_.broken_down(); }
  const KrylovColumn& krylov() const { return krylov_; }

 private:
  KrylovColumn krylov_;
  Vector u_;     // u_k
  Vector s_;     // s_k = sum of u_0..u_k
  Vector work_;  // normalized running sum handed to the Krylov step
  double cos_theta_;
  double t_ = 0.0;
  int k_ = 0;
  std::string label_;
};

}  // namespace unibasis
