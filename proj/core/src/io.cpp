#include "unibasis/io.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace unibasis {

namespace {

using nlohmann::json;

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path.string());
  return out;
}

json parse_json_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw IoError("invalid JSON in " + path.string());
  return j;
}

// Fixed "%.17g" formatting keeps doubles round-trippable and reruns
// byte-identical.
void append_double(std::string& buf, double v) {
  char tmp[32];
  const int len = std::snprintf(tmp, sizeof tmp, "%.17g", v);
  buf.append(tmp, static_cast<std::size_t>(len));
}

}  // namespace

std::vector<std::int32_t> load_labels(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::int32_t> labels;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    std::size_t b = line.find_last_not_of(" \t\r");
    std::int32_t y;
    auto [ptr, ec] = std::from_chars(line.data() + a, line.data() + b + 1, y);
    if (ec != std::errc{} || ptr != line.data() + b + 1 || y < 0)
      throw IoError("malformed label at " + path.string() + ":" +
                    std::to_string(line_no));
    labels.push_back(y);
  }
  if (labels.empty()) throw IoError("empty labels file: " + path.string());
  return labels;
}

void save_labels(const std::filesystem::path& path,
                 std::span<const std::int32_t> labels) {
  auto out = open_output(path);
  for (std::int32_t y : labels) out << y << '\n';
}

SignalMatrix load_signal_matrix(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::int64_t line_no = 0;
  std::size_t cols = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<double> row;
    std::istringstream ss(line);
    double v;
    while (ss >> v) row.push_back(v);
    if (row.empty()) {
      std::size_t a = line.find_first_not_of(" \t\r");
      if (a == std::string::npos) continue;  // blank line
      throw IoError("malformed row at " + path.string() + ":" +
                    std::to_string(line_no));
    }
    if (!ss.eof())
      throw IoError("malformed row at " + path.string() + ":" +
                    std::to_string(line_no));
    if (cols == 0) cols = row.size();
    if (row.size() != cols)
      throw IoError("ragged row at " + path.string() + ":" +
                    std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("empty signal matrix: " + path.string());
  SignalMatrix x(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return x;
}

void save_signal_matrix(const std::filesystem::path& path,
                        const SignalMatrix& x) {
  auto out = open_output(path);
  std::string buf;
  buf.reserve(static_cast<std::size_t>(x.cols()) * 24 + 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    buf.clear();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (j) buf.push_back(' ');
      append_double(buf, x(i, j));
    }
    buf.push_back('\n');
    out << buf;
  }
}

SplitIndices load_split_file(const std::filesystem::path& path) {
  json j = parse_json_file(path);
  SplitIndices s;
  for (auto [key, dst] : {std::pair{"train", &s.train}, {"val", &s.val},
                          {"test", &s.test}}) {
    if (!j.contains(key) || !j[key].is_array())
      throw IoError("split file " + path.string() + " lacks array \"" +
                    key + "\"");
    for (const auto& v : j[key]) {
      if (!v.is_number_integer())
        throw IoError("split file " + path.string() + ": non-integer index in \"" +
                      key + "\"");
      dst->push_back(v.get<NodeId>());
    }
  }
  return s;
}

void save_split_file(const std::filesystem::path& path, const SplitIndices& s) {
  json j;
  j["train"] = s.train;
  j["val"] = s.val;
  j["test"] = s.test;
  save_json_text(path, j.dump(2));
}

LabeledSplit make_labeled_split(std::vector<std::int32_t> labels,
                                SplitIndices indices, std::int64_t n) {
  LabeledSplit split;
  split.labels = std::move(labels);
  split.train = std::move(indices.train);
  split.val = std::move(indices.val);
  split.test = std::move(indices.test);
  split.validate(n);
  return split;
}

void save_edge_list(const std::filesystem::path& path, const Graph& g) {
  auto out = open_output(path);
  g.for_each_edge([&](NodeId u, NodeId v) { out << u << ' ' << v << '\n'; });
}

void save_json_text(const std::filesystem::path& path, const std::string& body) {
  auto out = open_output(path);
  out << body << '\n';
}

}  // namespace unibasis
