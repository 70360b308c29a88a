#include "unibasis/basis.hpp"
#include "unibasis/graph.hpp"
#include "unibasis/model.hpp"
#include "unibasis/spectral.hpp"
#include "unibasis/synth.hpp"

#include "support/generators.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace unibasis;

namespace {

Graph make_graph(std::int64_t n, std::int64_t m) {
  std::mt19937_64 rng(12345);
  return testsupport::random_edge_graph(n, m, rng);
}

void BM_Propagate(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  Graph g = make_graph(n, 5 * n);
  std::mt19937_64 rng(1);
  SignalMatrix x = testsupport::random_signal_matrix(n, state.range(1), rng);
  Propagator prop(g);
  for (auto _ : state) {
    SignalMatrix y = prop.apply_matrix(x);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * g.num_edges() *
                          state.range(1));
}
BENCHMARK(BM_Propagate)->Args({10000, 1})->Args({100000, 1})->Args({100000, 8});

void BM_HeterophilyBasis(benchmark::State& state) {
  const std::int64_t n = 100000;
  Graph g = make_graph(n, 5 * n);
  std::mt19937_64 rng(2);
  SignalMatrix x = testsupport::random_signal_matrix(n, 1, rng);
  BasisConfig cfg;
  cfg.K = static_cast<int>(state.range(0));
  cfg.h_hat = 0.25;
  for (auto _ : state) {
    BasisSet basis = heterophily_basis(g, x, cfg);
    benchmark::DoNotOptimize(basis.hops.back().data());
  }
}
BENCHMARK(BM_HeterophilyBasis)->Arg(5)->Arg(10)->Arg(20);

void BM_SignalFrequency(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  Graph g = make_graph(n, 5 * n);
  std::mt19937_64 rng(3);
  Vector x = testsupport::random_signal(n, rng);
  for (auto _ : state) {
    double f = signal_frequency(g, x);
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(BM_SignalFrequency)->Arg(10000)->Arg(100000);

void BM_TrainEpochs(benchmark::State& state) {
  std::mt19937_64 rng(4);
  auto [g, labels] = testsupport::community_graph(2000, 5, 6.0, 0.75, rng);
  SignalMatrix x = random_onehot_features(g.num_nodes(), 100, 5);
  BasisConfig cfg;
  cfg.K = 10;
  cfg.h_hat = 0.7;
  BasisSet basis = uni_basis(g, x, cfg);
  LabeledSplit split = random_split(labels, 0.6, 0.2, 6);
  Hyper hyper;
  hyper.max_epochs = static_cast<int>(state.range(0));
  hyper.patience = hyper.max_epochs;
  for (auto _ : state) {
    auto [model, report] = train(basis, split, hyper, 7);
    benchmark::DoNotOptimize(report.test_accuracy);
  }
}
BENCHMARK(BM_TrainEpochs)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
