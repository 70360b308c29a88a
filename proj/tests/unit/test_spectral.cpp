#include "unibasis/spectral.hpp"

#include "unibasis/basis.hpp"

#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace unibasis;

namespace {

Graph cycle_graph(std::int64_t n) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::int64_t i = 0; i < n; ++i)
    edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>((i + 1) % n));
  return Graph::from_edges(edges);
}

}  // namespace

TEST_CASE("signal frequency basics") {
  SUBCASE("constant signal on a regular graph has zero frequency") {
    Graph g = cycle_graph(8);
    CHECK(signal_frequency(g, Vector::Ones(8)) == 0.0);
  }

  SUBCASE("alternating signal on a single edge has frequency one") {
    Graph g = Graph::from_edges(std::vector<std::pair<NodeId, NodeId>>{{0, 1}});
    Vector x(2);
    x << 1.0, -1.0;
    CHECK(signal_frequency(g, x) == doctest::Approx(1.0).epsilon(1e-15));
  }

  SUBCASE("random signals stay within the unit band") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
      Graph g = testsupport::er_graph(5 + trial, 4.0, rng);
      Vector x = testsupport::random_signal(g.num_nodes(), rng);
      const double f = signal_frequency(g, x);
      CHECK(f >= -1e-9);
      CHECK(f <= 1.0 + 1e-9);
    }
  }

  SUBCASE("scale invariance") {
    std::mt19937_64 rng(37);
    Graph g = testsupport::er_graph(60, 5.0, rng);
    Vector x = testsupport::random_signal(60, rng);
    const double f = signal_frequency(g, x);
    for (double c : {2.0, -3.0, 1e-6, 1e6})
      CHECK(signal_frequency(g, c * x) == doctest::Approx(f).epsilon(1e-12));
  }

  SUBCASE("matches the dense-Laplacian oracle on small graphs") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 60; ++trial) {
      const std::int64_t n = 3 + static_cast<std::int64_t>(uniform_index(rng, 6));
      Graph g = testsupport::er_graph(n, 2.5, rng);
      Vector x = testsupport::random_signal(n, rng);
      if (x.cwiseProduct(
               Eigen::Map<const Eigen::VectorXi>(g.degrees().data(), n)
                   .cast<double>())
              .norm() == 0.0)
        continue;
      const double f = signal_frequency(g, x);
      const double oracle = testsupport::dense_frequency_oracle(g, x);
      CHECK(f == doctest::Approx(oracle).epsilon(1e-12));
    }
  }

  SUBCASE("error paths") {
    Graph g = Graph::from_edges(std::vector<std::pair<NodeId, NodeId>>{{0, 1}}, 3);
    CHECK_THROWS_AS(signal_frequency(g, Vector::Zero(3)), ContractError);
    Vector isolated_only(3);
    isolated_only << 0.0, 0.0, 1.0;  // node 2 has degree zero
    CHECK_THROWS_AS(signal_frequency(g, isolated_only), ContractError);
    CHECK_THROWS_AS(signal_frequency(g, Vector::Ones(2)), ContractError);
  }
}

TEST_CASE("closed-form expected frequency on regular graphs") {
  CHECK(expected_frequency_regular(100, 1.0) == doctest::Approx(0.25));
  CHECK(expected_frequency_regular(5, 0.0) == doctest::Approx(0.375));

  SUBCASE("decreasing in |dot|, so increasing in the angle") {
    double prev = expected_frequency_regular(50, 1.0);
    for (double dot : {0.8, 0.5, 0.2, 0.0}) {
      const double cur = expected_frequency_regular(50, dot);
      CHECK(cur > prev);
      prev = cur;
    }
  }

  SUBCASE("contract") {
    CHECK_THROWS_AS(expected_frequency_regular(1, 0.0), ContractError);
    CHECK_THROWS_AS(expected_frequency_regular(10, 1.5), ContractError);
  }
}

TEST_CASE("consecutive angles") {
  std::mt19937_64 rng(43);
  Graph g = testsupport::er_graph(60, 6.0, rng);
  SignalMatrix x = testsupport::random_signal_matrix(60, 3, rng);

  SUBCASE("orthonormal basis sits at ninety degrees") {
    BasisSet basis = orthonormal_basis(g, x, 6);
    AngleReport report = consecutive_angles(basis);
    REQUIRE(report.degrees.size() == 6);
    for (double deg : report.degrees)
      CHECK(deg == doctest::Approx(90.0).epsilon(1e-8));
  }

  SUBCASE("heterophily basis sits at the configured angle") {
    BasisConfig cfg;
    cfg.K = 8;
    cfg.h_hat = 0.22;
    BasisSet basis = heterophily_basis(g, x, cfg);
    AngleReport report = consecutive_angles(basis);
    for (double deg : report.degrees)
      CHECK(deg == doctest::Approx((1.0 - 0.22) * 90.0).epsilon(1e-6));
  }

  SUBCASE("zero input columns are skipped and counted") {
    SignalMatrix with_zero = x;
    with_zero.col(1).setZero();
    BasisSet basis = orthonormal_basis(g, with_zero, 4);
    AngleReport report = consecutive_angles(basis);
    for (int skipped : report.skipped_columns) CHECK(skipped == 1);
  }

  SUBCASE("all-zero slices are an error") {
    SignalMatrix zeros = SignalMatrix::Zero(60, 2);
    BasisSet basis = homophily_basis(g, zeros, 3);
    CHECK_THROWS_AS(consecutive_angles(basis), ContractError);
  }

  SUBCASE("needs at least two hops") {
    BasisSet basis = homophily_basis(g, x, 0);
    CHECK_THROWS_AS(consecutive_angles(basis), ContractError);
  }
}

TEST_CASE("streamed angles match the materialized diagnostic") {
  std::mt19937_64 rng(47);
  Graph g = testsupport::er_graph(40, 5.0, rng);
  SignalMatrix x = testsupport::random_signal_matrix(40, 3, rng);

  BasisConfig cfg;
  cfg.K = 6;
  cfg.h_hat = 0.3;
  cfg.tau = 0.6;

  for (BasisKind kind : {BasisKind::kHomophily, BasisKind::kOrthonormal,
                         BasisKind::kHeterophily, BasisKind::kUniBasis}) {
    CAPTURE(to_string(kind));
    BasisSet basis = build_basis(g, x, kind, cfg);
    AngleReport materialized = consecutive_angles(basis);
    StreamedAngles streamed = streamed_consecutive_angles(g, x, kind, cfg);
    REQUIRE(streamed.degrees.size() == materialized.degrees.size());
    for (std::size_t k = 0; k < streamed.degrees.size(); ++k) {
      CHECK(streamed.degrees[k] ==
            doctest::Approx(materialized.degrees[k]).epsilon(1e-10));
      CHECK(streamed.skipped_columns[k] == materialized.skipped_columns[k]);
    }
  }
}

TEST_CASE("spectrum profile") {
  std::mt19937_64 rng(53);
  Graph g = testsupport::er_graph(80, 6.0, rng);

  SUBCASE("fixed-point basis has all-zero frequencies") {
    // On a regular graph the propagation fixed point is the constant
    // vector, whose Dirichlet energy vanishes at every hop.
    Graph reg = cycle_graph(80);
    SignalMatrix x(80, 1);
    for (std::int64_t u = 0; u < 80; ++u)
      x(u, 0) = std::sqrt(static_cast<double>(reg.degree(static_cast<NodeId>(u))));
    BasisSet basis = homophily_basis(reg, x, 5);
    std::vector<double> w(6, 0.5);
    SpectrumProfile profile = spectrum_profile(reg, basis, w);
    REQUIRE(profile.frequency.size() == 6);
    for (double f : profile.frequency) CHECK(f == doctest::Approx(0.0));
    for (double wk : profile.weight) CHECK(wk == 0.5);
  }

  SUBCASE("frequencies stay in the unit band on random bases") {
    SignalMatrix x = testsupport::random_signal_matrix(80, 4, rng);
    BasisConfig cfg;
    cfg.K = 7;
    cfg.h_hat = 0.4;
    BasisSet basis = uni_basis(g, x, cfg);
    std::vector<double> w(8, 1.0);
    SpectrumProfile profile = spectrum_profile(g, basis, w);
    for (double f : profile.frequency) {
      CHECK(f >= 0.0);
      CHECK(f <= 1.0 + 1e-9);
    }
  }

  SUBCASE("weight count must match the hop count") {
    SignalMatrix x = testsupport::random_signal_matrix(80, 2, rng);
    BasisSet basis = homophily_basis(g, x, 3);
    std::vector<double> w(3, 1.0);
    CHECK_THROWS_AS(spectrum_profile(g, basis, w), ContractError);
  }

  SUBCASE("serializes to a JSON array") {
    SpectrumProfile profile;
    profile.frequency = {0.25, 0.5};
    profile.weight = {1.0, -1.0};
    const std::string j = profile.to_json();
    CHECK(j.find("\"hop\"") != std::string::npos);
    CHECK(j.find("\"frequency\"") != std::string::npos);
    CHECK(j.find("\"weight\"") != std::string::npos);
  }
}
