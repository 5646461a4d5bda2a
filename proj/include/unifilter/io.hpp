#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "unifilter/graph.hpp"
#include "unifilter/types.hpp"

namespace unifilter {

struct Split {
  std::vector<Index> train;
  std::vector<Index> val;
  std::vector<Index> test;
};

/// Throws if the three sets overlap or reference nodes outside [0, n).
void validate_split(const Split& split, Index n);

struct LabeledDataset {
  Graph graph;
  Matrix features;             // n x d
  std::vector<Index> labels;   // n entries in [0, num_classes)
  Index num_classes = 0;
  Split split;
};

/// Checks shapes, label range and split disjointness.
void validate_dataset(const LabeledDataset& ds);

struct GraphLoadResult {
  Graph graph;
  std::size_t self_loops_dropped = 0;
};

/// Edge list: one "u v" pair per line, '#' comments and blank lines ignored.
GraphLoadResult load_graph(const std::filesystem::path& edge_file, Index n);
/// Same format, parsed from memory; `source` names the input in messages.
GraphLoadResult parse_graph(const std::string& text, Index n,
                            const std::string& source = "<memory>");

/// CSV of decimal floats, no header. Every row must have the same width.
Matrix load_features(const std::filesystem::path& file);
/// One non-negative integer per line.
std::vector<Index> load_labels(const std::filesystem::path& file);
/// JSON object {"train": [...], "val": [...], "test": [...]}.
Split load_split(const std::filesystem::path& file);
Split parse_split(const std::string& json_text);

/// Loads the four files; n is taken from the label count. The class count is
/// max label + 1.
LabeledDataset load_dataset(const std::filesystem::path& edges,
                            const std::filesystem::path& features,
                            const std::filesystem::path& labels,
                            const std::filesystem::path& split);

void write_graph(const std::filesystem::path& file, const Graph& g);
void write_features(const std::filesystem::path& file, const Matrix& x);
void write_labels(const std::filesystem::path& file, const std::vector<Index>& labels);
void write_split(const std::filesystem::path& file, const Split& split);
std::string split_to_json(const Split& split);

/// Shortest decimal form that round-trips a double.
std::string format_double(double v);
/// 17 significant digits.
std::string format_double17(double v);

void write_text(const std::filesystem::path& file, const std::string& text);
std::string read_text(const std::filesystem::path& file);

}  // namespace unifilter
