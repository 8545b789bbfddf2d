#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace netpoison {

using NodeId = std::uint32_t;
using Label = std::uint32_t;

/// Unordered node pair, stored canonically with u < v once inside a Graph.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  auto operator<=>(const Edge&) const = default;
};

enum class FlipKind : std::uint8_t { Add, Remove };

std::string to_string(FlipKind kind);
FlipKind flip_kind_from_string(const std::string& text);

/// A proposed toggle of one adjacency pair. Ordering is (kind, u, v), which
/// is also the tie-break used when ranking candidates.
struct FlipCandidate {
  NodeId u = 0;
  NodeId v = 0;
  FlipKind kind = FlipKind::Add;

  friend auto operator<=>(const FlipCandidate& a, const FlipCandidate& b) {
    if (auto c = a.kind <=> b.kind; c != 0) return c;
    if (auto c = a.u <=> b.u; c != 0) return c;
    return a.v <=> b.v;
  }
  friend bool operator==(const FlipCandidate&, const FlipCandidate&) = default;
};

FlipCandidate inverse(const FlipCandidate& f) noexcept;

/// Undirected simple graph on dense ids 0..n-1 backed by sorted neighbor
/// lists. Immutable: flips produce new graphs.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t node_count) : adjacency_(node_count) {}

  std::size_t node_count() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }

  std::span<const NodeId> neighbors(NodeId u) const { return adjacency_.at(u); }
  std::size_t degree(NodeId u) const { return adjacency_.at(u).size(); }
  bool has_edge(NodeId u, NodeId v) const;

  /// All edges with u < v in lexicographic order.
  std::vector<Edge> edges() const;

  /// Number of vertex pairs that are not edges.
  std::uint64_t non_edge_count() const noexcept;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  friend Graph build_graph(std::size_t, std::span<const Edge>);
  friend Graph apply_flips(const Graph&, std::span<const FlipCandidate>);

  std::vector<std::vector<NodeId>> adjacency_;
  std::size_t edge_count_ = 0;
};

/// Builds a graph; duplicate and reversed pairs collapse. Throws
/// std::invalid_argument on an out-of-range endpoint or a self-loop.
Graph build_graph(std::size_t node_count, std::span<const Edge> edges);

/// Returns g with f applied. Throws std::invalid_argument when f adds an
/// existing edge or removes a missing one.
Graph apply_flip(const Graph& g, const FlipCandidate& f);

/// Applies a batch of flips simultaneously. Every flip is validated against g
/// and the batch may not touch the same pair twice.
Graph apply_flips(const Graph& g, std::span<const FlipCandidate> flips);

/// `count` distinct non-edges (kind Add, u < v) drawn uniformly without
/// replacement from the complement of g. Deterministic in seed.
std::vector<FlipCandidate> sample_complement(const Graph& g, std::uint64_t count,
                                             std::uint64_t seed);

std::vector<std::size_t> degrees(const Graph& g);

/// One community label per node, values in 0..class_count-1. Classes may be
/// unused; class_count is recorded either way.
class LabelAssignment {
 public:
  LabelAssignment() = default;
  LabelAssignment(std::vector<Label> labels, std::size_t class_count);

  /// class_count = max label + 1.
  static LabelAssignment from_values(std::vector<Label> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t class_count() const noexcept { return class_count_; }
  Label operator[](std::size_t node) const { return labels_[node]; }
  std::span<const Label> values() const noexcept { return labels_; }

  std::vector<std::size_t> class_sizes() const;

  friend bool operator==(const LabelAssignment&, const LabelAssignment&) = default;

 private:
  std::vector<Label> labels_;
  std::size_t class_count_ = 0;
};

}  // namespace netpoison
