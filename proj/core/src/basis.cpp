#include "unibasis/basis.hpp"

#include "unibasis/io.hpp"
#include "unibasis/recurrence.hpp"
#include "unibasis/spectral.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>

namespace unibasis {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

void check_input(const Graph& g, const SignalMatrix& x) {
  if (x.rows() != g.num_nodes())
    throw ContractError("basis: signal has " + std::to_string(x.rows()) +
                        " rows, graph has " + std::to_string(g.num_nodes()) +
                        " nodes");
  if (x.cols() == 0) throw ContractError("basis: signal has no columns");
}

std::vector<std::uint8_t> zero_column_flags(const SignalMatrix& x) {
  std::vector<std::uint8_t> flags(x.cols(), 0);
  for (Eigen::Index c = 0; c < x.cols(); ++c)
    if (x.col(c).norm() == 0.0) flags[c] = 1;
  return flags;
}

SignalMatrix unit_columns(const SignalMatrix& x) {
  SignalMatrix out = x;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    const double nrm = out.col(c).norm();
    if (nrm > 0.0) out.col(c) /= nrm;
  }
  return out;
}

}  // namespace

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::kHomophily: return "homophily";
    case BasisKind::kOrthonormal: return "orthonormal";
    case BasisKind::kHeterophily: return "heterophily";
    case BasisKind::kUniBasis: return "unibasis";
  }
  throw ContractError("unknown basis kind");
}

BasisKind basis_kind_from_string(const std::string& name) {
  if (name == "homophily") return BasisKind::kHomophily;
  if (name == "orthonormal") return BasisKind::kOrthonormal;
  if (name == "heterophily") return BasisKind::kHeterophily;
  if (name == "unibasis") return BasisKind::kUniBasis;
  throw ContractError("unknown basis kind: " + name);
}

double BasisConfig::theta() const {
  if (h_hat == 1.0) return 0.0;  // recurrence degenerates safely
  return std::min((1.0 - h_hat) * kHalfPi, theta_cap);
}

void BasisConfig::validate() const {
  if (K < 0) throw ContractError("basis config: K must be nonnegative");
  if (!(h_hat >= 0.0 && h_hat <= 1.0))
    throw ContractError("basis config: h_hat must be in [0, 1]");
  if (!(tau >= 0.0 && tau <= 1.0))
    throw ContractError("basis config: tau must be in [0, 1]");
  if (!(theta_cap > 0.0 && theta_cap < kHalfPi))
    throw ContractError("basis config: theta_cap must be in (0, pi/2)");
  if (!(breakdown_tol > 0.0))
    throw ContractError("basis config: breakdown_tol must be positive");
}

const std::vector<SignalMatrix>& BasisSet::model_slices() const {
  if (kind == BasisKind::kHomophily && !unit_hops.empty()) return unit_hops;
  return hops;
}

BasisSet homophily_basis(const Graph& g, const SignalMatrix& x, int K,
                         const PropagationConfig& prop) {
  if (K < 0) throw ContractError("basis: K must be nonnegative");
  check_input(g, x);

  BasisSet b;
  b.kind = BasisKind::kHomophily;
  b.K = K;
  b.zero_column = zero_column_flags(x);
  b.breakdown_column.assign(x.cols(), 0);

  Propagator P(g, prop);
  b.hops.reserve(K + 1);
  b.unit_hops.reserve(K + 1);
  b.hops.push_back(x);
  for (int k = 1; k <= K; ++k) b.hops.push_back(P.apply_matrix(b.hops.back()));
  for (const auto& slice : b.hops) b.unit_hops.push_back(unit_columns(slice));
  return b;
}

BasisSet orthonormal_basis(const Graph& g, const SignalMatrix& x, int K,
                           const PropagationConfig& prop,
                           double breakdown_tol) {
  if (K < 0) throw ContractError("basis: K must be nonnegative");
  check_input(g, x);

  BasisSet b;
  b.kind = BasisKind::kOrthonormal;
  b.K = K;
  b.zero_column = zero_column_flags(x);
  b.breakdown_column.assign(x.cols(), 0);
  b.hops.assign(K + 1, SignalMatrix::Zero(x.rows(), x.cols()));

  Propagator P(g, prop);
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    if (b.zero_column[c]) continue;
    KrylovColumn col(P, x.col(c) / x.col(c).norm(), breakdown_tol);
    b.hops[0].col(c) = col.v();
    for (int k = 1; k <= K; ++k) {
      col.step();
      b.hops[k].col(c) = col.v();  // zero after breakdown
    }
    b.breakdown_column[c] = col.broken_down();
  }
  return b;
}

BasisSet heterophily_basis(const Graph& g, const SignalMatrix& x,
                           const BasisConfig& cfg) {
  cfg.validate();
  check_input(g, x);

  BasisSet b;
  b.kind = BasisKind::kHeterophily;
  b.K = cfg.K;
  b.theta = cfg.theta();
  b.h_used = cfg.h_hat;
  b.zero_column = zero_column_flags(x);
  b.breakdown_column.assign(x.cols(), 0);
  b.hops.assign(cfg.K + 1, SignalMatrix::Zero(x.rows(), x.cols()));

  Propagator P(g, cfg.propagation);
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    if (b.zero_column[c]) continue;
    HeterophilyColumn col(P, x.col(c), *b.theta, cfg.breakdown_tol,
                          "column " + std::to_string(c));
    b.hops[0].col(c) = col.u();
    for (int k = 1; k <= cfg.K; ++k) {
      col.step();
      b.hops[k].col(c) = col.u();
    }
    b.breakdown_column[c] = col.broken_down();
  }
  return b;
}

BasisSet uni_basis(const Graph& g, const SignalMatrix& x,
                   const BasisConfig& cfg) {
  cfg.validate();
  check_input(g, x);

  BasisSet b;
  b.kind = BasisKind::kUniBasis;
  b.K = cfg.K;
  b.theta = cfg.theta();
  b.tau = cfg.tau;
  b.h_used = cfg.h_hat;

  // The degenerate mixes only need one parent basis.
  if (cfg.tau == 1.0) {
    BasisSet hom = homophily_basis(g, x, cfg.K, cfg.propagation);
    b.hops = std::move(hom.unit_hops);
    b.zero_column = std::move(hom.zero_column);
    b.breakdown_column.assign(x.cols(), 0);
    return b;
  }
  if (cfg.tau == 0.0) {
    BasisSet het = heterophily_basis(g, x, cfg);
    b.hops = std::move(het.hops);
    b.zero_column = std::move(het.zero_column);
    b.breakdown_column = std::move(het.breakdown_column);
    return b;
  }

  BasisSet hom = homophily_basis(g, x, cfg.K, cfg.propagation);
  BasisSet het = heterophily_basis(g, x, cfg);
  b.zero_column = het.zero_column;
  b.breakdown_column = het.breakdown_column;
  b.hops.reserve(cfg.K + 1);
  for (int k = 0; k <= cfg.K; ++k)
    b.hops.push_back(cfg.tau * hom.unit_hops[k] + (1.0 - cfg.tau) * het.hops[k]);
  return b;
}

BasisSet build_basis(const Graph& g, const SignalMatrix& x, BasisKind kind,
                     const BasisConfig& cfg) {
  switch (kind) {
    case BasisKind::kHomophily:
      return homophily_basis(g, x, cfg.K, cfg.propagation);
    case BasisKind::kOrthonormal:
      return orthonormal_basis(g, x, cfg.K, cfg.propagation, cfg.breakdown_tol);
    case BasisKind::kHeterophily:
      return heterophily_basis(g, x, cfg);
    case BasisKind::kUniBasis:
      return uni_basis(g, x, cfg);
  }
  throw ContractError("unknown basis kind");
}

namespace {

// Per-column slice streams used by the O(n d)-memory angle diagnostic.
class ColumnSliceStream {
 public:
  virtual ~ColumnSliceStream() = default;
  virtual const Vector& slice() = 0;
  virtual void advance() = 0;
};

class HomophilyStream final : public ColumnSliceStream {
 public:
  HomophilyStream(const Propagator& prop, Vector x0)
      : prop_(&prop), x_(std::move(x0)), next_(x_.size()) {}
  const Vector& slice() override { return x_; }
  void advance() override {
    prop_->apply(x_, next_);
    x_.swap(next_);
  }

 private:
  const Propagator* prop_;
  Vector x_, next_;
};

class OrthonormalStream final : public ColumnSliceStream {
 public:
  OrthonormalStream(const Propagator& prop, Vector v0, double tol)
      : col_(prop, std::move(v0), tol) {}
  const Vector& slice() override { return col_.v(); }
  void advance() override { col_.step(); }

 private:
  KrylovColumn col_;
};

class HeterophilyStream final : public ColumnSliceStream {
 public:
  HeterophilyStream(const Propagator& prop, Eigen::Ref<const Vector> x,
                    double theta, double tol, std::string label)
      : col_(prop, x, theta, tol, std::move(label)) {}
  const Vector& slice() override { return col_.u(); }
  void advance() override { col_.step(); }

 private:
  HeterophilyColumn col_;
};

class UniStream final : public ColumnSliceStream {
 public:
  UniStream(const Propagator& prop, Eigen::Ref<const Vector> x, double theta,
            double tau, double tol, std::string label)
      : hom_(prop, x), het_(prop, x, theta, tol, std::move(label)), tau_(tau) {
    mix();
  }
  const Vector& slice() override { return mixed_; }
  void advance() override {
    hom_.advance();
    het_.advance();
    mix();
  }

 private:
  void mix() {
    const Vector& p = hom_.slice();
    const double nrm = p.norm();
    if (nrm > 0.0)
      mixed_ = (tau_ / nrm) * p + (1.0 - tau_) * het_.slice();
    else
      mixed_ = (1.0 - tau_) * het_.slice();
  }

  HomophilyStream hom_;
  HeterophilyStream het_;
  double tau_;
  Vector mixed_;
};

std::unique_ptr<ColumnSliceStream> make_stream(const Propagator& prop,
                                               Eigen::Ref<const Vector> x,
                                               BasisKind kind,
                                               const BasisConfig& cfg,
                                               std::string label) {
  switch (kind) {
    case BasisKind::kHomophily:
      return std::make_unique<HomophilyStream>(prop, Vector(x));
    case BasisKind::kOrthonormal:
      return std::make_unique<OrthonormalStream>(prop, Vector(x / x.norm()),
                                                 cfg.breakdown_tol);
    case BasisKind::kHeterophily:
      return std::make_unique<HeterophilyStream>(prop, x, cfg.theta(),
                                                 cfg.breakdown_tol,
                                                 std::move(label));
    case BasisKind::kUniBasis:
      return std::make_unique<UniStream>(prop, x, cfg.theta(), cfg.tau,
                                         cfg.breakdown_tol, std::move(label));
  }
  throw ContractError("unknown basis kind");
}

}  // namespace

StreamedAngles streamed_consecutive_angles(const Graph& g,
                                           const SignalMatrix& x,
                                           BasisKind kind,
                                           const BasisConfig& cfg) {
  cfg.validate();
  check_input(g, x);
  if (cfg.K < 1)
    throw ContractError("consecutive angles need at least two hops");

  Propagator P(g, cfg.propagation);
  std::vector<double> sums(cfg.K, 0.0);
  std::vector<int> counts(cfg.K, 0);
  Vector prev;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    if (x.col(c).norm() == 0.0) continue;  // excluded from diagnostics
    auto stream = make_stream(P, x.col(c), kind, cfg,
                              "column " + std::to_string(c));
    prev = stream->slice();
    for (int k = 0; k < cfg.K; ++k) {
      stream->advance();
      if (auto deg = detail::column_angle_deg(prev, stream->slice())) {
        sums[k] += *deg;
        counts[k] += 1;
      }
      prev = stream->slice();
    }
  }

  StreamedAngles out;
  out.degrees.resize(cfg.K);
  out.skipped_columns.resize(cfg.K);
  const int d = static_cast<int>(x.cols());
  for (int k = 0; k < cfg.K; ++k) {
    if (counts[k] == 0)
      throw ContractError("all columns have zero-norm slices at hop " +
                          std::to_string(k + 1));
    out.degrees[k] = sums[k] / counts[k];
    out.skipped_columns[k] = d - counts[k];
  }
  return out;
}

void export_basis(const BasisSet& basis, const std::filesystem::path& dir,
                  const PropagationConfig& prop) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  std::vector<std::string> files;
  for (int k = 0; k <= basis.K; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "hop_%04d.txt", k);
    save_signal_matrix(dir / name, basis.hops[k]);
    files.emplace_back(name);
  }

  nlohmann::json manifest;
  manifest["kind"] = to_string(basis.kind);
  manifest["K"] = basis.K;
  manifest["n"] = basis.num_nodes();
  manifest["d"] = basis.dims();
  manifest["theta"] = basis.theta ? nlohmann::json(*basis.theta) : nlohmann::json();
  manifest["tau"] = basis.tau ? nlohmann::json(*basis.tau) : nlohmann::json();
  manifest["h_used"] = basis.h_used ? nlohmann::json(*basis.h_used) : nlohmann::json();
  manifest["propagation"] = {
      {"self_loops", prop.self_loops},
      {"isolated_policy", prop.isolated == IsolatedPolicy::kZero ? "zero" : "self_loop"},
  };
  nlohmann::json zero = nlohmann::json::array();
  nlohmann::json broken = nlohmann::json::array();
  for (std::size_t c = 0; c < basis.zero_column.size(); ++c)
    if (basis.zero_column[c]) zero.push_back(c);
  for (std::size_t c = 0; c < basis.breakdown_column.size(); ++c)
    if (basis.breakdown_column[c]) broken.push_back(c);
  manifest["flags"] = {{"zero_columns", zero}, {"breakdown_columns", broken}};
  manifest["files"] = files;

  // Written last: a manifest marks the export as complete.
  save_json_text(dir / "manifest.json", manifest.dump(2));
}

}  // namespace unibasis
