#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "netpoison/graph.hpp"

namespace netpoison {

/// Graph plus labels after id compaction. original_ids[i] is the id node i had
/// in the input files; original_labels[c] the label value class c had.
struct Dataset {
  Graph graph;
  LabelAssignment labels;
  std::vector<std::int64_t> original_ids;
  std::vector<std::int64_t> original_labels;
};

struct RawPair {
  std::int64_t first = 0;
  std::int64_t second = 0;
};

/// Two integers per line; blank lines and lines starting with '#' skipped.
/// Throws std::runtime_error naming the 1-based line of a malformed entry.
std::vector<RawPair> read_int_pairs(std::istream& in, const std::string& source);
std::vector<RawPair> read_int_pairs(const std::filesystem::path& path);

/// Edge list over dense ids. Node count is the largest of max id + 1, the
/// node_count argument, and a leading "# nodes N" comment as written by
/// write_graph (keeps trailing isolated nodes).
Graph read_graph(const std::filesystem::path& path, std::size_t node_count = 0);

/// `node_id label_id` lines for dense ids 0..node_count-1.
LabelAssignment read_labels(const std::filesystem::path& path, std::size_t node_count);

/// Loads arbitrary integer ids and compacts both node ids and labels. The node
/// set is the union of ids in both files; every node must have a label.
Dataset load_dataset(const std::filesystem::path& edge_path,
                     const std::filesystem::path& label_path);

void write_graph(std::ostream& out, const Graph& g);
void write_graph(const std::filesystem::path& path, const Graph& g);
void write_labels(std::ostream& out, const LabelAssignment& labels);
void write_labels(const std::filesystem::path& path, const LabelAssignment& labels);

}  // namespace netpoison
