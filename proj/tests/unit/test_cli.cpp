#include "unibasis/graph.hpp"
#include "unibasis/io.hpp"
#include "unibasis/synth.hpp"

#include "support/generators.hpp"
#include "support/tempdir.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <random>
#include <sstream>

using namespace unibasis;
using testsupport::run_command;
using testsupport::TempDir;

namespace {

const std::string kBin = UNIFILTER_BIN;

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small labeled dataset on disk: edges, labels, features, split.
struct DiskDataset {
  std::filesystem::path edges, labels, features, split;
  double h = 0.0;
};

DiskDataset write_dataset(const TempDir& dir, std::int64_t n, int classes,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto [g, labels] = testsupport::community_graph(n, classes, 6.0, 0.75, rng);
  SignalMatrix x = random_onehot_features(n, 12, seed);
  LabeledSplit split = random_split(labels, 0.6, 0.2, seed);

  DiskDataset ds;
  ds.edges = dir / "edges.txt";
  ds.labels = dir / "labels.txt";
  ds.features = dir / "features.txt";
  ds.split = dir / "split.json";
  save_edge_list(ds.edges, g);
  save_labels(ds.labels, labels);
  save_signal_matrix(ds.features, x);
  save_split_file(ds.split, SplitIndices{split.train, split.val, split.test});
  ds.h = homophily_ratio(g, labels);
  return ds;
}

double parse_field(const std::string& output, const std::string& key) {
  std::istringstream ss(output);
  std::string token;
  while (ss >> token) {
    if (token == key) {
      double value;
      ss >> value;
      return value;
    }
  }
  FAIL("field not found in output: " << key << "\n" << output);
  return 0.0;
}

}  // namespace

TEST_CASE("estimate-h reproduces the exact ratio on a full-coverage split") {
  TempDir dir("cli_est");
  DiskDataset ds = write_dataset(dir, 300, 4, 11);

  auto res = run_command(kBin + " estimate-h --graph " + q(ds.edges) +
                         " --labels " + q(ds.labels) + " --split " +
                         q(ds.split));
  REQUIRE(res.exit_code == 0);
  const double h_hat = parse_field(res.output, "h_hat");
  CHECK(h_hat == doctest::Approx(ds.h).epsilon(0.1));
  CHECK(res.output.find("fallback false") != std::string::npos);
}

TEST_CASE("missing input files exit with code 2") {
  TempDir dir("cli_missing");
  DiskDataset ds = write_dataset(dir, 100, 3, 13);
  auto res = run_command(kBin + " estimate-h --graph " + q(dir / "nope.txt") +
                         " --labels " + q(ds.labels) + " --split " +
                         q(ds.split));
  CHECK(res.exit_code == 2);
  CHECK(res.output.find("error") != std::string::npos);
}

TEST_CASE("contract violations exit with code 1") {
  TempDir dir("cli_contract");
  DiskDataset ds = write_dataset(dir, 100, 3, 17);
  auto res = run_command(kBin + " train --graph " + q(ds.edges) +
                         " --features " + q(ds.features) + " --labels " +
                         q(ds.labels) + " --split " + q(ds.split) +
                         " --dropout 1.5 --out " + q(dir / "out"));
  CHECK(res.exit_code == 1);
}

TEST_CASE("build-basis writes hop files, a manifest, and is idempotent") {
  TempDir dir("cli_basis");
  DiskDataset ds = write_dataset(dir, 150, 3, 19);
  const auto out = dir / "basis";

  const std::string cmd = kBin + " build-basis --graph " + q(ds.edges) +
                          " --features " + q(ds.features) +
                          " --kind heterophily -K 10 --h-hat 0.22 --out " +
                          q(out);
  REQUIRE(run_command(cmd).exit_code == 0);

  for (int k = 0; k <= 10; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "hop_%04d.txt", k);
    CHECK(std::filesystem::exists(out / name));
  }
  REQUIRE(std::filesystem::exists(out / "manifest.json"));
  REQUIRE(std::filesystem::exists(out / "config.json"));

  nlohmann::json manifest;
  {
    std::ifstream in(out / "manifest.json");
    manifest = nlohmann::json::parse(in);
  }
  CHECK(manifest["kind"] == "heterophily");
  CHECK(manifest["K"] == 10);
  CHECK(manifest["h_used"].get<double>() == 0.22);

  const std::string hop_before = read_file(out / "hop_0005.txt");
  const std::string manifest_before = read_file(out / "manifest.json");
  REQUIRE(run_command(cmd).exit_code == 0);
  CHECK(read_file(out / "hop_0005.txt") == hop_before);
  CHECK(read_file(out / "manifest.json") == manifest_before);
}

TEST_CASE("train writes report, checkpoint, spectrum, and config") {
  TempDir dir("cli_train");
  DiskDataset ds = write_dataset(dir, 250, 3, 23);
  const auto out = dir / "run";

  auto res = run_command(kBin + " train --graph " + q(ds.edges) +
                         " --features " + q(ds.features) + " --labels " +
                         q(ds.labels) + " --split " + q(ds.split) +
                         " --kind unibasis --tau 0.6 -K 6 --max-epochs 60" +
                         " --patience 60 --seed 7 --out " + q(out));
  REQUIRE(res.exit_code == 0);
  const double test_acc = parse_field(res.output, "test_accuracy");
  CHECK(test_acc >= 0.0);
  CHECK(test_acc <= 1.0);

  for (const char* name :
       {"report.json", "checkpoint.json", "spectrum.json", "config.json"})
    CHECK(std::filesystem::exists(out / name));

  nlohmann::json spectrum;
  {
    std::ifstream in(out / "spectrum.json");
    spectrum = nlohmann::json::parse(in);
  }
  REQUIRE(spectrum.is_array());
  REQUIRE(spectrum.size() == 7);
  for (const auto& entry : spectrum) {
    CHECK(entry["frequency"].get<double>() >= 0.0);
    CHECK(entry["frequency"].get<double>() <= 1.0 + 1e-9);
  }

  nlohmann::json config;
  {
    std::ifstream in(out / "config.json");
    config = nlohmann::json::parse(in);
  }
  CHECK(config["command"] == "train");
  CHECK(config["h_hat_estimated"] == true);

  SUBCASE("spectrum subcommand reproduces the training-time profile") {
    auto res2 = run_command(kBin + " spectrum --graph " + q(ds.edges) +
                            " --features " + q(ds.features) +
                            " --checkpoint " + q(out / "checkpoint.json") +
                            " --out " + q(dir / "spec"));
    REQUIRE(res2.exit_code == 0);
    CHECK(read_file(dir / "spec" / "spectrum.json") ==
          read_file(out / "spectrum.json"));
  }
}

TEST_CASE("synth emits a complete dataset directory") {
  TempDir dir("cli_synth");
  DiskDataset ds = write_dataset(dir, 400, 5, 29);
  const auto out = dir / "dataset";

  auto res = run_command(kBin + " synth --graph " + q(ds.edges) +
                         " --labels " + q(ds.labels) +
                         " --target-h 0.4 --feature-dim 25 --seed 3 --out " +
                         q(out));
  REQUIRE(res.exit_code == 0);
  const double achieved = parse_field(res.output, "achieved_h");
  CHECK(achieved == doctest::Approx(0.4).epsilon(0.15));

  for (const char* name : {"edges.txt", "labels.txt", "features.txt",
                           "split.json", "manifest.json", "config.json"})
    CHECK(std::filesystem::exists(out / name));

  Graph g = load_graph(out / "edges.txt");
  auto labels = load_labels(out / "labels.txt");
  CHECK(homophily_ratio(g, labels) == doctest::Approx(achieved).epsilon(1e-12));

  SUBCASE("unreachable targets fail with a contract error") {
    auto bad = run_command(kBin + " synth --graph " + q(ds.edges) +
                           " --labels " + q(ds.labels) +
                           " --target-h 0.001 --out " + q(dir / "bad"));
    CHECK(bad.exit_code == 1);
    CHECK(bad.output.find("closest") != std::string::npos);
  }
}

TEST_CASE("angles diagnostic through the command line") {
  TempDir dir("cli_angles");
  DiskDataset ds = write_dataset(dir, 200, 3, 31);

  SUBCASE("orthonormal basis reports right angles") {
    auto res = run_command(kBin + " angles --graph " + q(ds.edges) +
                           " --features " + q(ds.features) +
                           " --kind orthonormal -K 6 --out " + q(dir / "a"));
    REQUIRE(res.exit_code == 0);
    std::ifstream in(dir / "a" / "angles.json");
    nlohmann::json j = nlohmann::json::parse(in);
    for (double deg : j["angles_deg"].get<std::vector<double>>())
      CHECK(deg == doctest::Approx(90.0).epsilon(1e-6));
  }

  SUBCASE("heterophily basis holds the configured angle") {
    auto res = run_command(kBin + " angles --graph " + q(ds.edges) +
                           " --features " + q(ds.features) +
                           " --kind heterophily -K 8 --h-hat 0.22 --out " +
                           q(dir / "b"));
    REQUIRE(res.exit_code == 0);
    std::ifstream in(dir / "b" / "angles.json");
    nlohmann::json j = nlohmann::json::parse(in);
    for (double deg : j["angles_deg"].get<std::vector<double>>())
      CHECK(deg == doctest::Approx(70.2).epsilon(1e-3));
  }

  SUBCASE("unknown kind is rejected") {
    auto res = run_command(kBin + " angles --graph " + q(ds.edges) +
                           " --features " + q(ds.features) + " --kind chebyshev");
    CHECK(res.exit_code == 1);
  }
}
