#include "unifilter/io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "unifilter/log.hpp"

namespace unifilter {
namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_index(std::string_view tok, Index& out) {
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> toks;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) toks.push_back(s.substr(i, j - i));
    i = j;
  }
  return toks;
}

std::vector<Index> index_array(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array())
    throw ParseError(fmt::format("split JSON lacks array \"{}\"", key));
  std::vector<Index> out;
  for (const auto& v : j[key]) {
    if (!v.is_number_integer()) throw ParseError(fmt::format("non-integer in \"{}\"", key));
    out.push_back(v.get<Index>());
  }
  return out;
}

}  // namespace

void validate_split(const Split& split, Index n) {
  std::vector<char> owner(static_cast<std::size_t>(std::max<Index>(n, 0)), 0);
  auto mark = [&](const std::vector<Index>& set, char tag, const char* name) {
    for (Index u : set) {
      if (u < 0 || u >= n) throw Error(fmt::format("{} node {} outside [0, {})", name, u, n));
      if (owner[u] != 0) throw Error(fmt::format("node {} appears in more than one split set", u));
      owner[u] = tag;
    }
  };
  mark(split.train, 1, "train");
  mark(split.val, 2, "val");
  mark(split.test, 3, "test");
}

void validate_dataset(const LabeledDataset& ds) {
  const Index n = ds.graph.num_nodes();
  if (ds.features.rows() != n)
    throw ShapeError(fmt::format("feature matrix has {} rows, graph has {} nodes",
                                 ds.features.rows(), n));
  if (static_cast<Index>(ds.labels.size()) != n)
    throw ShapeError(fmt::format("{} labels for {} nodes", ds.labels.size(), n));
  for (Index y : ds.labels)
    if (y < 0 || y >= ds.num_classes)
      throw Error(fmt::format("label {} outside [0, {})", y, ds.num_classes));
  validate_split(ds.split, n);
}

GraphLoadResult parse_graph(const std::string& text, Index n, const std::string& source) {
  std::vector<Edge> edges;
  std::size_t self_loops = 0;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto toks = split_ws(line);
    Index u = 0, v = 0;
    if (toks.size() != 2 || !parse_index(toks[0], u) || !parse_index(toks[1], v))
      throw ParseError(fmt::format("{}: expected \"u v\" at line {}", source, line_no), line_no);
    for (Index w : {u, v}) {
      if (w < 0) throw ParseError(fmt::format("negative node index {} at line {}", w, line_no), line_no);
      if (w >= n)
        throw ParseError(fmt::format("node index {} ≥ n={} at line {}", w, n, line_no), line_no);
    }
    if (u == v) {
      ++self_loops;
      continue;
    }
    edges.emplace_back(u, v);
  }
  if (self_loops > 0) warn(fmt::format("{}: dropped {} self-loop line(s)", source, self_loops));
  return {Graph::from_edges(n, edges), self_loops};
}

GraphLoadResult load_graph(const fs::path& edge_file, Index n) {
  return parse_graph(read_text(edge_file), n, edge_file.string());
}

Matrix load_features(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(fmt::format("cannot open {}", file.string()));
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty()) continue;
    std::size_t count = 0;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      auto comma = line.find(',', pos);
      auto tok = trim(line.substr(pos, comma == std::string_view::npos ? line.size() - pos : comma - pos));
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError(fmt::format("{}: bad number \"{}\" at line {}", file.string(), tok, line_no),
                         line_no);
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (rows == 0) cols = count;
    if (count != cols)
      throw ParseError(fmt::format("{}: line {} has {} columns, expected {}", file.string(),
                                   line_no, count, cols),
                       line_no);
    ++rows;
  }
  Matrix x(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) x(r, c) = values[r * cols + c];
  return x;
}

std::vector<Index> load_labels(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(fmt::format("cannot open {}", file.string()));
  std::vector<Index> labels;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty()) continue;
    Index y = 0;
    if (!parse_index(line, y) || y < 0)
      throw ParseError(fmt::format("{}: bad label \"{}\" at line {}", file.string(), line, line_no),
                       line_no);
    labels.push_back(y);
  }
  return labels;
}

Split parse_split(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("split JSON: {}", e.what()));
  }
  if (!j.is_object()) throw ParseError("split JSON must be an object");
  return {index_array(j, "train"), index_array(j, "val"), index_array(j, "test")};
}

Split load_split(const fs::path& file) { return parse_split(read_text(file)); }

LabeledDataset load_dataset(const fs::path& edges, const fs::path& features,
                            const fs::path& labels, const fs::path& split) {
  LabeledDataset ds;
  ds.labels = load_labels(labels);
  const Index n = static_cast<Index>(ds.labels.size());
  ds.graph = load_graph(edges, n).graph;
  ds.features = load_features(features);
  ds.split = load_split(split);
  Index max_label = -1;
  for (Index y : ds.labels) max_label = std::max(max_label, y);
  ds.num_classes = max_label + 1;
  validate_dataset(ds);
  return ds;
}

void write_graph(const fs::path& file, const Graph& g) {
  std::string out;
  for (auto [u, v] : g.edge_list()) out += fmt::format("{} {}\n", u, v);
  write_text(file, out);
}

void write_features(const fs::path& file, const Matrix& x) {
  std::string out;
  for (Index r = 0; r < x.rows(); ++r) {
    for (Index c = 0; c < x.cols(); ++c) {
      if (c) out += ',';
      out += format_double(x(r, c));
    }
    out += '\n';
  }
  write_text(file, out);
}

void write_labels(const fs::path& file, const std::vector<Index>& labels) {
  std::string out;
  for (Index y : labels) out += fmt::format("{}\n", y);
  write_text(file, out);
}

std::string split_to_json(const Split& split) {
  nlohmann::json j;
  j["train"] = split.train;
  j["val"] = split.val;
  j["test"] = split.test;
  return j.dump() + "\n";
}

void write_split(const fs::path& file, const Split& split) { write_text(file, split_to_json(split)); }

std::string format_double(double v) { return fmt::format("{}", v); }

std::string format_double17(double v) { return fmt::format("{:.17g}", v); }

void write_text(const fs::path& file, const std::string& text) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", file.string()));
  out << text;
}

std::string read_text(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open {}", file.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace unifilter
