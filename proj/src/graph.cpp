#include "netpoison/graph.hpp"

#include <algorithm>
#include <unordered_set>

#include "netpoison/random.hpp"

namespace netpoison {

namespace {

std::string pair_text(NodeId u, NodeId v) {
  return "(" + std::to_string(u) + "," + std::to_string(v) + ")";
}

std::uint64_t pair_key(NodeId u, NodeId v) {
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

// Index of pair (u, v), u < v, in the row-major upper triangle.
std::pair<NodeId, NodeId> pair_from_index(std::uint64_t index, std::uint64_t n) {
  // Row u holds n-1-u pairs; find the last row starting at or before index.
  auto row_start = [n](std::uint64_t r) { return r * (2 * n - r - 1) / 2; };
  std::uint64_t lo = 0;
  std::uint64_t hi = n - 1;
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (row_start(mid) <= index) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const std::uint64_t u = lo;
  const std::uint64_t v = u + 1 + (index - row_start(u));
  return {static_cast<NodeId>(u), static_cast<NodeId>(v)};
}

}  // namespace

std::string to_string(FlipKind kind) { return kind == FlipKind::Add ? "add" : "remove"; }

FlipKind flip_kind_from_string(const std::string& text) {
  if (text == "add") return FlipKind::Add;
  if (text == "remove") return FlipKind::Remove;
  throw std::invalid_argument("unknown flip kind '" + text + "'");
}

FlipCandidate inverse(const FlipCandidate& f) noexcept {
  return {f.u, f.v, f.kind == FlipKind::Add ? FlipKind::Remove : FlipKind::Add};
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (u >= node_count() || v >= node_count()) return false;
  const auto& a = adjacency_[u];
  const auto& b = adjacency_[v];
  // Search the shorter list.
  return a.size() <= b.size() ? std::binary_search(a.begin(), a.end(), v)
                              : std::binary_search(b.begin(), b.end(), u);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (NodeId u = 0; u < node_count(); ++u) {
    for (NodeId v : adjacency_[u]) {
      if (u < v) out.push_back({u, v});
    }
  }
  return out;
}

std::uint64_t Graph::non_edge_count() const noexcept {
  const std::uint64_t n = node_count();
  return n * (n - (n > 0 ? 1 : 0)) / 2 - edge_count_;
}

Graph build_graph(std::size_t node_count, std::span<const Edge> edges) {
  Graph g(node_count);
  for (const auto& e : edges) {
    if (e.u >= node_count || e.v >= node_count) {
      throw std::invalid_argument("edge " + pair_text(e.u, e.v) + " has an endpoint outside 0.." +
                                  std::to_string(node_count == 0 ? 0 : node_count - 1));
    }
    if (e.u == e.v) {
      throw std::invalid_argument("self-loop " + pair_text(e.u, e.v) + " is not allowed");
    }
    g.adjacency_[e.u].push_back(e.v);
    g.adjacency_[e.v].push_back(e.u);
  }
  std::size_t endpoints = 0;
  for (auto& row : g.adjacency_) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    endpoints += row.size();
  }
  g.edge_count_ = endpoints / 2;
  return g;
}

Graph apply_flip(const Graph& g, const FlipCandidate& f) {
  return apply_flips(g, std::span<const FlipCandidate>(&f, 1));
}

Graph apply_flips(const Graph& g, std::span<const FlipCandidate> flips) {
  std::unordered_set<std::uint64_t> touched;
  touched.reserve(flips.size() * 2);
  for (const auto& f : flips) {
    const NodeId a = std::min(f.u, f.v);
    const NodeId b = std::max(f.u, f.v);
    if (a == b || b >= g.node_count()) {
      throw std::invalid_argument("flip " + pair_text(f.u, f.v) + " is not a valid vertex pair");
    }
    const bool present = g.has_edge(a, b);
    if (f.kind == FlipKind::Add && present) {
      throw std::invalid_argument("cannot add existing edge " + pair_text(a, b));
    }
    if (f.kind == FlipKind::Remove && !present) {
      throw std::invalid_argument("cannot remove missing edge " + pair_text(a, b));
    }
    if (!touched.insert(pair_key(a, b)).second) {
      throw std::invalid_argument("pair " + pair_text(a, b) + " flipped twice in one batch");
    }
  }

  Graph out = g;
  for (const auto& f : flips) {
    auto& ru = out.adjacency_[f.u];
    auto& rv = out.adjacency_[f.v];
    if (f.kind == FlipKind::Add) {
      ru.insert(std::lower_bound(ru.begin(), ru.end(), f.v), f.v);
      rv.insert(std::lower_bound(rv.begin(), rv.end(), f.u), f.u);
      ++out.edge_count_;
    } else {
      ru.erase(std::lower_bound(ru.begin(), ru.end(), f.v));
      rv.erase(std::lower_bound(rv.begin(), rv.end(), f.u));
      --out.edge_count_;
    }
  }
  return out;
}

std::vector<FlipCandidate> sample_complement(const Graph& g, std::uint64_t count,
                                             std::uint64_t seed) {
  const std::uint64_t available = g.non_edge_count();
  if (count > available) {
    throw std::invalid_argument("requested " + std::to_string(count) +
                                " non-edges but the complement has only " +
                                std::to_string(available));
  }
  std::vector<FlipCandidate> out;
  if (count == 0) return out;
  out.reserve(count);
  Rng rng(seed);
  const std::uint64_t n = g.node_count();

  if (count * 2 > available) {
    // Dense request: enumerate the complement and take a shuffled prefix.
    std::vector<FlipCandidate> all;
    all.reserve(available);
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (!g.has_edge(u, v)) all.push_back({u, v, FlipKind::Add});
      }
    }
    for (std::uint64_t i = 0; i < count; ++i) {
      std::swap(all[i], all[i + rng.below(all.size() - i)]);
    }
    all.resize(count);
    return all;
  }

  // Sparse request: rejection sampling over pair indices.
  const std::uint64_t pairs = n * (n - 1) / 2;
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(count * 2);
  while (out.size() < count) {
    const auto [u, v] = pair_from_index(rng.below(pairs), n);
    if (g.has_edge(u, v)) continue;
    if (!chosen.insert(pair_key(u, v)).second) continue;
    out.push_back({u, v, FlipKind::Add});
  }
  return out;
}

std::vector<std::size_t> degrees(const Graph& g) {
  std::vector<std::size_t> out(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) out[u] = g.degree(u);
  return out;
}

LabelAssignment::LabelAssignment(std::vector<Label> labels, std::size_t class_count)
    : labels_(std::move(labels)), class_count_(class_count) {
  if (class_count_ == 0) throw std::invalid_argument("label assignment needs at least one class");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] >= class_count_) {
      throw std::invalid_argument("node " + std::to_string(i) + " has label " +
                                  std::to_string(labels_[i]) + " outside 0.." +
                                  std::to_string(class_count_ - 1));
    }
  }
}

LabelAssignment LabelAssignment::from_values(std::vector<Label> labels) {
  Label max_label = 0;
  for (Label l : labels) max_label = std::max(max_label, l);
  return LabelAssignment(std::move(labels), static_cast<std::size_t>(max_label) + 1);
}

std::vector<std::size_t> LabelAssignment::class_sizes() const {
  std::vector<std::size_t> sizes(class_count_, 0);
  for (Label l : labels_) ++sizes[l];
  return sizes;
}

}  // namespace netpoison
