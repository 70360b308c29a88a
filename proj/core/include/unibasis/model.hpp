#pragma once

#include "unibasis/basis.hpp"
#include "unibasis/graph.hpp"
#include "unibasis/types.hpp"

#include <filesystem>
#include <utility>
#include <vector>

namespace unibasis {

struct Hyper {
  double lr = 0.01;
  double weight_decay = 5e-4;
  double dropout = 0.0;  // applied to the combined representation z
  int max_epochs = 1000;
  int patience = 200;  // epochs without validation improvement before stopping
  int hidden = 0;      // 0 = linear head; >0 = one ReLU hidden layer width

  void validate() const;
};

/// Learnable hop-weight vector over a basis feeding a linear (or optionally
/// one-hidden-layer) softmax head.
struct FilterModel {
  Vector w;                  // K+1 hop weights
  Eigen::MatrixXd head_W;    // C x d, or C x hidden when hidden > 0
  Vector head_b;             // C
  Eigen::MatrixXd hidden_W;  // hidden x d; empty in linear mode
  Vector hidden_b;
  Hyper hyper;
  std::uint64_t seed = 0;

  Eigen::Index num_classes() const { return head_W.rows(); }
};

struct TrainReport {
  double best_val_accuracy = 0.0;
  double test_accuracy = 0.0;
  int epochs_run = 0;
  std::vector<double> loss_curve;  // per-epoch training cross-entropy
  std::uint64_t seed = 0;
};

/// z = sum_k w_k slice_k over the basis' model slices.
SignalMatrix combine(const BasisSet& basis, Eigen::Ref<const Vector> w);

/// Row-stochastic class probability matrix (n x C).
Eigen::MatrixXd forward(const BasisSet& basis, const FilterModel& model);

struct Gradients {
  Vector w;
  Eigen::MatrixXd head_W;
  Vector head_b;
  Eigen::MatrixXd hidden_W;
  Vector hidden_b;
};

/// Mean cross-entropy over the train set plus the L2 penalty on weight
/// matrices and hop weights. Deterministic; dropout is not applied. This is
/// the function whose gradients objective_gradients() returns.
double objective(const BasisSet& basis, const LabeledSplit& split,
                 const FilterModel& model);
Gradients objective_gradients(const BasisSet& basis, const LabeledSplit& split,
                              const FilterModel& model);

FilterModel init_model(const BasisSet& basis, std::int32_t num_classes,
                       const Hyper& hyper, std::uint64_t seed);

/// Full-batch Adam on cross-entropy over train nodes with early stopping on
/// validation accuracy. Returns the best-validation snapshot and its test
/// accuracy. Deterministic given the seed.
std::pair<FilterModel, TrainReport> train(const BasisSet& basis,
                                          const LabeledSplit& split,
                                          const Hyper& hyper,
                                          std::uint64_t seed);

enum class Subset { kTrain, kVal, kTest };

/// Argmax-class accuracy over the chosen subset.
double evaluate(const FilterModel& model, const BasisSet& basis,
                const LabeledSplit& split, Subset subset);

/// Basis construction parameters recorded alongside a checkpoint so the
/// basis can be rebuilt for later diagnostics.
struct BasisDescriptor {
  BasisKind kind = BasisKind::kUniBasis;
  BasisConfig cfg;
};

void save_checkpoint(const std::filesystem::path& path,
                     const FilterModel& model, const BasisDescriptor& basis);
std::pair<FilterModel, BasisDescriptor> load_checkpoint(
    const std::filesystem::path& path);

void save_train_report(const std::filesystem::path& path,
                       const TrainReport& report);

}  // namespace unibasis
