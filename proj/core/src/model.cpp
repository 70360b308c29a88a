#include "unibasis/model.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <random>

namespace unibasis {

namespace {

using Matrix = Eigen::MatrixXd;
using nlohmann::json;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void check_dims(const BasisSet& basis, const FilterModel& model) {
  if (model.w.size() != basis.K + 1)
    throw ContractError("model: w has " + std::to_string(model.w.size()) +
                        " entries, basis has " + std::to_string(basis.K + 1) +
                        " hops");
  const Eigen::Index d = basis.dims();
  const Eigen::Index in = model.hyper.hidden > 0 ? model.hidden_W.cols()
                                                 : model.head_W.cols();
  if (in != d)
    throw ContractError("model: head expects " + std::to_string(in) +
                        "-dimensional signals, basis has " + std::to_string(d));
  if (model.hyper.hidden > 0 && model.head_W.cols() != model.hidden_W.rows())
    throw ContractError("model: hidden/head dimension mismatch");
}

struct ForwardPass {
  SignalMatrix z;  // combined (and possibly masked) representation, n x d
  Matrix hidden;   // post-ReLU activations, empty in linear mode
  Matrix logits;   // n x C
};

ForwardPass forward_pass(const BasisSet& basis, const FilterModel& model,
                         const SignalMatrix* mask) {
  ForwardPass fp;
  fp.z = combine(basis, model.w);
  if (mask) fp.z = fp.z.cwiseProduct(*mask);
  if (model.hyper.hidden > 0) {
    fp.hidden = (fp.z * model.hidden_W.transpose()).rowwise() +
                model.hidden_b.transpose();
    fp.hidden = fp.hidden.cwiseMax(0.0);
    fp.logits = (fp.hidden * model.head_W.transpose()).rowwise() +
                model.head_b.transpose();
  } else {
    fp.logits = (fp.z * model.head_W.transpose()).rowwise() +
                model.head_b.transpose();
  }
  return fp;
}

// Mean cross-entropy over the given rows, computed via a stable log-softmax.
double cross_entropy(const Matrix& logits, const std::vector<std::int32_t>& labels,
                     const std::vector<NodeId>& rows) {
  double loss = 0.0;
  for (NodeId i : rows) {
    const auto row = logits.row(i);
    const double mx = row.maxCoeff();
    const double lse = std::log((row.array() - mx).exp().sum());
    loss += mx + lse - row[labels[i]];
  }
  return loss / static_cast<double>(rows.size());
}

// d(mean CE)/d(logits): (softmax - onehot) / |rows| on the given rows,
// zero elsewhere.
Matrix logit_gradient(const Matrix& logits, const std::vector<std::int32_t>& labels,
                      const std::vector<NodeId>& rows) {
  Matrix g = Matrix::Zero(logits.rows(), logits.cols());
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (NodeId i : rows) {
    const auto row = logits.row(i);
    const double mx = row.maxCoeff();
    Eigen::RowVectorXd p = (row.array() - mx).exp();
    p /= p.sum();
    g.row(i) = p * inv;
    g(i, labels[i]) -= inv;
  }
  return g;
}

double decay_term(const FilterModel& model) {
  double sq = model.head_W.squaredNorm() + model.w.squaredNorm();
  if (model.hyper.hidden > 0) sq += model.hidden_W.squaredNorm();
  return 0.5 * model.hyper.weight_decay * sq;
}

// First-moment/second-moment buffers for one parameter group.
struct AdamState {
  Matrix m, v;

  void init(Eigen::Index rows, Eigen::Index cols) {
    m = Matrix::Zero(rows, cols);
    v = Matrix::Zero(rows, cols);
  }

  void step(Eigen::Ref<Matrix> param, const Matrix& grad, double lr, int t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    param -= (lr / c1) * m.cwiseQuotient(((v / c2).cwiseSqrt().array() + eps).matrix());
  }
};

}  // namespace

void Hyper::validate() const {
  if (!(lr > 0.0)) throw ContractError("hyper: learning rate must be positive");
  if (weight_decay < 0.0) throw ContractError("hyper: negative weight decay");
  if (!(dropout >= 0.0 && dropout < 1.0))
    throw ContractError("hyper: dropout must be in [0, 1)");
  if (max_epochs < 1) throw ContractError("hyper: max_epochs must be >= 1");
  if (patience < 1) throw ContractError("hyper: patience must be >= 1");
  if (hidden < 0) throw ContractError("hyper: hidden must be nonnegative");
}

SignalMatrix combine(const BasisSet& basis, Eigen::Ref<const Vector> w) {
  if (w.size() != basis.K + 1)
    throw ContractError("combine: expected " + std::to_string(basis.K + 1) +
                        " weights, got " + std::to_string(w.size()));
  const auto& slices = basis.model_slices();
  SignalMatrix z = w[0] * slices[0];
  for (int k = 1; k <= basis.K; ++k) z.noalias() += w[k] * slices[k];
  return z;
}

Eigen::MatrixXd forward(const BasisSet& basis, const FilterModel& model) {
  check_dims(basis, model);
  ForwardPass fp = forward_pass(basis, model, nullptr);
  Matrix probs(fp.logits.rows(), fp.logits.cols());
  for (Eigen::Index i = 0; i < fp.logits.rows(); ++i) {
    const auto row = fp.logits.row(i);
    Eigen::RowVectorXd p = (row.array() - row.maxCoeff()).exp();
    probs.row(i) = p / p.sum();
  }
  return probs;
}

double objective(const BasisSet& basis, const LabeledSplit& split,
                 const FilterModel& model) {
  check_dims(basis, model);
  if (split.train.empty()) throw ContractError("objective: empty train set");
  ForwardPass fp = forward_pass(basis, model, nullptr);
  return cross_entropy(fp.logits, split.labels, split.train) + decay_term(model);
}

namespace {

Gradients backward(const BasisSet& basis, const LabeledSplit& split,
                   const FilterModel& model, const ForwardPass& fp,
                   const SignalMatrix* mask) {
  const double wd = model.hyper.weight_decay;
  Gradients g;
  Matrix dlogits = logit_gradient(fp.logits, split.labels, split.train);

  Matrix dz;
  if (model.hyper.hidden > 0) {
    g.head_W = dlogits.transpose() * fp.hidden + wd * model.head_W;
    g.head_b = dlogits.colwise().sum();
    Matrix dhidden = dlogits * model.head_W;
    dhidden = dhidden.cwiseProduct(
        (fp.hidden.array() > 0.0).cast<double>().matrix());
    g.hidden_W = dhidden.transpose() * fp.z + wd * model.hidden_W;
    g.hidden_b = dhidden.colwise().sum();
    dz = dhidden * model.hidden_W;
  } else {
    g.head_W = dlogits.transpose() * fp.z + wd * model.head_W;
    g.head_b = dlogits.colwise().sum();
    dz = dlogits * model.head_W;
  }
  if (mask) dz = dz.cwiseProduct(*mask);

  const auto& slices = basis.model_slices();
  g.w.resize(basis.K + 1);
  for (int k = 0; k <= basis.K; ++k)
    g.w[k] = dz.cwiseProduct(slices[k]).sum() + wd * model.w[k];
  return g;
}

}  // namespace

Gradients objective_gradients(const BasisSet& basis, const LabeledSplit& split,
                              const FilterModel& model) {
  check_dims(basis, model);
  if (split.train.empty())
    throw ContractError("objective_gradients: empty train set");
  ForwardPass fp = forward_pass(basis, model, nullptr);
  return backward(basis, split, model, fp, nullptr);
}

FilterModel init_model(const BasisSet& basis, std::int32_t num_classes,
                       const Hyper& hyper, std::uint64_t seed) {
  hyper.validate();
  if (num_classes < 2) throw ContractError("init_model: need >= 2 classes");
  const Eigen::Index d = basis.dims();

  FilterModel model;
  model.hyper = hyper;
  model.seed = seed;
  model.w = Vector::Constant(basis.K + 1, 1.0 / (basis.K + 1));

  std::mt19937_64 rng(sub_seed(seed, "init"));
  auto glorot = [&](Eigen::Index rows, Eigen::Index cols) {
    const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix w(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i)
        w(i, j) = a * (2.0 * uniform01(rng) - 1.0);
    return w;
  };

  if (hyper.hidden > 0) {
    model.hidden_W = glorot(hyper.hidden, d);
    model.hidden_b = Vector::Zero(hyper.hidden);
    model.head_W = glorot(num_classes, hyper.hidden);
  } else {
    model.head_W = glorot(num_classes, d);
  }
  model.head_b = Vector::Zero(num_classes);
  return model;
}

namespace {

double subset_accuracy(const Matrix& logits, const std::vector<std::int32_t>& labels,
                       const std::vector<NodeId>& rows) {
  std::int64_t hits = 0;
  for (NodeId i : rows) {
    Eigen::Index pred;
    logits.row(i).maxCoeff(&pred);
    if (static_cast<std::int32_t>(pred) == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

bool all_finite(const FilterModel& m) {
  return m.w.allFinite() && m.head_W.allFinite() && m.head_b.allFinite() &&
         (m.hyper.hidden == 0 ||
          (m.hidden_W.allFinite() && m.hidden_b.allFinite()));
}

}  // namespace

std::pair<FilterModel, TrainReport> train(const BasisSet& basis,
                                          const LabeledSplit& split,
                                          const Hyper& hyper,
                                          std::uint64_t seed) {
  hyper.validate();
  if (split.train.empty()) throw ContractError("train: empty train set");
  if (split.val.empty()) throw ContractError("train: empty validation set");
  if (split.test.empty()) throw ContractError("train: empty test set");
  if (static_cast<std::int64_t>(split.labels.size()) != basis.num_nodes())
    throw ContractError("train: labels do not match basis node count");

  FilterModel model = init_model(basis, split.num_classes(), hyper, seed);
  check_dims(basis, model);

  AdamState adam_w, adam_head_W, adam_head_b, adam_hidden_W, adam_hidden_b;
  adam_w.init(model.w.size(), 1);
  adam_head_W.init(model.head_W.rows(), model.head_W.cols());
  adam_head_b.init(model.head_b.size(), 1);
  if (hyper.hidden > 0) {
    adam_hidden_W.init(model.hidden_W.rows(), model.hidden_W.cols());
    adam_hidden_b.init(model.hidden_b.size(), 1);
  }

  std::mt19937_64 drop_rng(sub_seed(seed, "dropout"));
  const Eigen::Index n = basis.num_nodes();
  const Eigen::Index d = basis.dims();
  SignalMatrix mask;

  TrainReport report;
  report.seed = seed;
  FilterModel best = model;
  double best_val = -1.0;
  int since_improve = 0;

  for (int epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
    const SignalMatrix* mask_ptr = nullptr;
    if (hyper.dropout > 0.0) {
      const double keep = 1.0 - hyper.dropout;
      mask.resize(n, d);
      for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
          mask(i, j) = uniform01(drop_rng) < keep ? 1.0 / keep : 0.0;
      mask_ptr = &mask;
    }

    ForwardPass fp = forward_pass(basis, model, mask_ptr);
    const double loss = cross_entropy(fp.logits, split.labels, split.train);
    report.loss_curve.push_back(loss);
    if (!std::isfinite(loss))
      throw NumericError("train: non-finite loss at epoch " +
                         std::to_string(epoch));

    Gradients g = backward(basis, split, model, fp, mask_ptr);
    adam_w.step(model.w, g.w, hyper.lr, epoch);
    adam_head_W.step(model.head_W, g.head_W, hyper.lr, epoch);
    adam_head_b.step(model.head_b, g.head_b, hyper.lr, epoch);
    if (hyper.hidden > 0) {
      adam_hidden_W.step(model.hidden_W, g.hidden_W, hyper.lr, epoch);
      adam_hidden_b.step(model.hidden_b, g.hidden_b, hyper.lr, epoch);
    }
    if (!all_finite(model))
      throw NumericError("train: non-finite parameters at epoch " +
                         std::to_string(epoch));

    ForwardPass eval = forward_pass(basis, model, nullptr);
    const double val_acc = subset_accuracy(eval.logits, split.labels, split.val);
    report.epochs_run = epoch;
    if (val_acc > best_val) {
      best_val = val_acc;
      best = model;
      since_improve = 0;
    } else if (++since_improve >= hyper.patience) {
      break;
    }
  }

  report.best_val_accuracy = best_val;
  ForwardPass eval = forward_pass(basis, best, nullptr);
  report.test_accuracy = subset_accuracy(eval.logits, split.labels, split.test);
  return {std::move(best), std::move(report)};
}

double evaluate(const FilterModel& model, const BasisSet& basis,
                const LabeledSplit& split, Subset subset) {
  check_dims(basis, model);
  const std::vector<NodeId>* rows = nullptr;
  switch (subset) {
    case Subset::kTrain: rows = &split.train; break;
    case Subset::kVal: rows = &split.val; break;
    case Subset::kTest: rows = &split.test; break;
  }
  if (rows->empty()) throw ContractError("evaluate: empty subset");
  ForwardPass fp = forward_pass(basis, model, nullptr);
  return subset_accuracy(fp.logits, split.labels, *rows);
}

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw IoError("checkpoint: bad matrix");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  return m;
}

Vector vector_from_json(const json& j) {
  Vector v(j.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path,
                     const FilterModel& model, const BasisDescriptor& basis) {
  json j;
  j["format"] = "unifilter-checkpoint-v1";
  j["seed"] = model.seed;
  j["hyper"] = {{"lr", model.hyper.lr},
                {"weight_decay", model.hyper.weight_decay},
                {"dropout", model.hyper.dropout},
                {"max_epochs", model.hyper.max_epochs},
                {"patience", model.hyper.patience},
                {"hidden", model.hyper.hidden}};
  j["w"] = std::vector<double>(model.w.data(), model.w.data() + model.w.size());
  j["head_W"] = matrix_to_json(model.head_W);
  j["head_b"] =
      std::vector<double>(model.head_b.data(), model.head_b.data() + model.head_b.size());
  if (model.hyper.hidden > 0) {
    j["hidden_W"] = matrix_to_json(model.hidden_W);
    j["hidden_b"] = std::vector<double>(model.hidden_b.data(),
                                        model.hidden_b.data() + model.hidden_b.size());
  }
  j["basis"] = {
      {"kind", to_string(basis.kind)},
      {"K", basis.cfg.K},
      {"h_hat", basis.cfg.h_hat},
      {"tau", basis.cfg.tau},
      {"theta_cap", basis.cfg.theta_cap},
      {"breakdown_tol", basis.cfg.breakdown_tol},
      {"self_loops", basis.cfg.propagation.self_loops},
      {"isolated_policy",
       basis.cfg.propagation.isolated == IsolatedPolicy::kZero ? "zero"
                                                               : "self_loop"},
  };

  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint: " + path.string());
  out << j.dump(2) << '\n';
}

namespace {

std::pair<FilterModel, BasisDescriptor> checkpoint_from_json(const json& j) {
  FilterModel model;
  model.seed = j["seed"].get<std::uint64_t>();
  const json& h = j["hyper"];
  model.hyper.lr = h["lr"].get<double>();
  model.hyper.weight_decay = h["weight_decay"].get<double>();
  model.hyper.dropout = h["dropout"].get<double>();
  model.hyper.max_epochs = h["max_epochs"].get<int>();
  model.hyper.patience = h["patience"].get<int>();
  model.hyper.hidden = h["hidden"].get<int>();
  model.w = vector_from_json(j["w"]);
  model.head_W = matrix_from_json(j["head_W"]);
  model.head_b = vector_from_json(j["head_b"]);
  if (model.hyper.hidden > 0) {
    model.hidden_W = matrix_from_json(j["hidden_W"]);
    model.hidden_b = vector_from_json(j["hidden_b"]);
  }

  BasisDescriptor basis;
  const json& b = j["basis"];
  basis.kind = basis_kind_from_string(b["kind"].get<std::string>());
  basis.cfg.K = b["K"].get<int>();
  basis.cfg.h_hat = b["h_hat"].get<double>();
  basis.cfg.tau = b["tau"].get<double>();
  basis.cfg.theta_cap = b["theta_cap"].get<double>();
  basis.cfg.breakdown_tol = b["breakdown_tol"].get<double>();
  basis.cfg.propagation.self_loops = b["self_loops"].get<bool>();
  basis.cfg.propagation.isolated =
      b["isolated_policy"].get<std::string>() == "zero" ? IsolatedPolicy::kZero
                                                        : IsolatedPolicy::kSelfLoop;
  return {std::move(model), basis};
}

}  // namespace

std::pair<FilterModel, BasisDescriptor> load_checkpoint(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || j.value("format", "") != "unifilter-checkpoint-v1")
    throw IoError("not a checkpoint file: " + path.string());
  try {
    return checkpoint_from_json(j);
  } catch (const json::exception& e) {
    throw IoError("malformed checkpoint " + path.string() + ": " + e.what());
  }
}

void save_train_report(const std::filesystem::path& path,
                       const TrainReport& report) {
  json j;
  j["best_val_accuracy"] = report.best_val_accuracy;
  j["test_accuracy"] = report.test_accuracy;
  j["epochs_run"] = report.epochs_run;
  j["loss_curve"] = report.loss_curve;
  j["seed"] = report.seed;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report: " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace unibasis
