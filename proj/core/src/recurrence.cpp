#include "unibasis/recurrence.hpp"

#include <cmath>

namespace unibasis {

namespace {
constexpr double kRadicandTol = 1e-9;
}

KrylovColumn::KrylovColumn(const Propagator& prop, Vector v0,
                           double breakdown_tol)
    : prop_(&prop),
      tol_(breakdown_tol),
      v_(std::move(v0)),
      v_prev_(Vector::Zero(v_.size())),
      work_(v_.size()) {}

bool KrylovColumn::step(const Vector* extra_orth) {
  if (broken_) {
    v_.setZero();
    return false;
  }
  prop_->apply(v_, work_);
  work_ -= work_.dot(v_) * v_;
  work_ -= work_.dot(v_prev_) * v_prev_;
  if (extra_orth) work_ -= work_.dot(*extra_orth) * (*extra_orth);
  const double nrm = work_.norm();
  v_prev_.swap(v_);
  if (nrm < tol_) {
    broken_ = true;
    v_.setZero();
    return false;
  }
  v_ = work_ / nrm;
  return true;
}

namespace {

Vector normalized_nonzero(Eigen::Ref<const Vector> x) {
  const double nrm = x.norm();
  if (nrm == 0.0)
    throw ContractError("heterophily basis: zero input column");
  return x / nrm;
}

}  // namespace

HeterophilyColumn::HeterophilyColumn(const Propagator& prop,
                                     Eigen::Ref<const Vector> x, double theta,
                                     double breakdown_tol,
                                     std::string column_label)
    : krylov_(prop, normalized_nonzero(x), breakdown_tol),
      cos_theta_(std::cos(theta)),
      label_(std::move(column_label)) {
  if (cos_theta_ <= 0.0)
    throw ContractError("heterophily basis: cos(theta) must be positive");
  u_ = krylov_.v();  // u_0 = v_0 = x / ||x||
  s_ = u_;
}

void HeterophilyColumn::step() {
  const int k = ++k_;
  work_ = s_ / s_.norm();  // orthogonal to the next v in exact arithmetic
  const bool have_v = krylov_.step(&work_);
  if (!have_v) {
    // Reachable subspace exhausted: keep emitting the normalized running
    // mean so downstream consumers still get unit vectors.
    t_ = 0.0;
    u_ = s_ / k;
    const double nrm = u_.norm();
    if (nrm == 0.0)
      throw NumericError("heterophily basis: zero running mean at hop " +
                         std::to_string(k) + (label_.empty() ? "" : ", " + label_));
    u_ /= nrm;
    s_ += u_;
    return;
  }

  if (cos_theta_ == 1.0) {
    // theta = 0: the radicand is identically zero and the recurrence
    // collapses onto u_0. Computing it in floating point would launder
    // rounding noise through the square root.
    t_ = 0.0;
  } else {
    // s_{k-1} . u_{k-1} by its exact invariant value.
    const double su = 1.0 + (k - 1) * cos_theta_;
    const double ratio = su / (k * cos_theta_);
    double radicand = ratio * ratio - ((k - 1) * cos_theta_ + 1.0) / k;
    if (radicand < -kRadicandTol)
      throw NumericError("heterophily basis: negative radicand " +
                         std::to_string(radicand) + " at hop " +
                         std::to_string(k) +
                         (label_.empty() ? "" : ", " + label_));
    if (radicand < 0.0) radicand = 0.0;
    t_ = std::sqrt(radicand);
  }

  u_ = s_ / k + t_ * krylov_.v();
  const double nrm = u_.norm();
  if (nrm == 0.0)
    throw NumericError("heterophily basis: degenerate update at hop " +
                       std::to_string(k) + (label_.empty() ? "" : ", " + label_));
  u_ /= nrm;
  s_ += u_;
}

}  // namespace unibasis
