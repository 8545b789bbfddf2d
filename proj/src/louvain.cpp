#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "netpoison/generators.hpp"
#include "netpoison/random.hpp"

namespace netpoison {

namespace {

constexpr double kGainEpsilon = 1e-12;

struct WeightedGraph {
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adjacency;  // no self entries
  std::vector<double> self_loop;                                         // internal weight
  std::vector<double> strength;  // includes 2 * self_loop
  double total = 0.0;            // sum of strengths (2m)

  std::size_t size() const { return adjacency.size(); }
};

WeightedGraph from_graph(const Graph& g) {
  WeightedGraph w;
  w.adjacency.resize(g.node_count());
  w.self_loop.assign(g.node_count(), 0.0);
  w.strength.assign(g.node_count(), 0.0);
  for (NodeId u = 0; u < g.node_count(); ++u) {
    for (NodeId v : g.neighbors(u)) w.adjacency[u].emplace_back(v, 1.0);
    w.strength[u] = static_cast<double>(g.degree(u));
    w.total += w.strength[u];
  }
  return w;
}

double partition_modularity(const WeightedGraph& w, const std::vector<std::uint32_t>& community) {
  std::vector<double> inside(w.size(), 0.0);
  std::vector<double> total(w.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    total[community[i]] += w.strength[i];
    inside[community[i]] += 2.0 * w.self_loop[i];
    for (const auto& [j, weight] : w.adjacency[i]) {
      if (community[j] == community[i]) inside[community[i]] += weight;
    }
  }
  double q = 0.0;
  for (std::size_t c = 0; c < w.size(); ++c) {
    q += inside[c] / w.total - (total[c] / w.total) * (total[c] / w.total);
  }
  return q;
}

// One local-moving phase. Returns true if any node moved.
bool local_moving(const WeightedGraph& w, std::vector<std::uint32_t>& community, Rng& rng,
                  std::vector<double>& pass_modularity) {
  const std::size_t n = w.size();
  std::vector<double> tot(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) tot[community[i]] += w.strength[i];

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::uint32_t>(order));

  std::vector<double> link_weight(n, 0.0);
  std::vector<std::uint32_t> touched;
  bool any_move = false;
  bool moved = true;
  while (moved) {
    moved = false;
    for (std::uint32_t i : order) {
      const std::uint32_t own = community[i];
      const double k = w.strength[i];
      touched.clear();
      touched.push_back(own);
      for (const auto& [j, weight] : w.adjacency[i]) {
        const std::uint32_t c = community[j];
        if (link_weight[c] == 0.0 && c != own && std::find(touched.begin(), touched.end(), c) == touched.end()) {
          touched.push_back(c);
        }
        link_weight[c] += weight;
      }
      tot[own] -= k;
      auto gain = [&](std::uint32_t c) { return link_weight[c] - tot[c] * k / w.total; };
      double best_gain = gain(own);
      for (std::uint32_t c : touched) best_gain = std::max(best_gain, gain(c));
      std::uint32_t best = own;
      if (gain(own) < best_gain - kGainEpsilon) {
        best = std::numeric_limits<std::uint32_t>::max();
        for (std::uint32_t c : touched) {
          if (gain(c) >= best_gain - kGainEpsilon) best = std::min(best, c);
        }
      }
      tot[best] += k;
      community[i] = best;
      for (std::uint32_t c : touched) link_weight[c] = 0.0;
      if (best != own) {
        moved = true;
        any_move = true;
      }
    }
    pass_modularity.push_back(partition_modularity(w, community));
  }
  return any_move;
}

// Renumbers communities densely in order of first appearance.
std::size_t compact(std::vector<std::uint32_t>& community) {
  std::unordered_map<std::uint32_t, std::uint32_t> remap;
  for (auto& c : community) {
    auto [it, inserted] = remap.try_emplace(c, static_cast<std::uint32_t>(remap.size()));
    c = it->second;
  }
  return remap.size();
}

WeightedGraph aggregate(const WeightedGraph& w, const std::vector<std::uint32_t>& community,
                        std::size_t count) {
  WeightedGraph out;
  out.adjacency.resize(count);
  out.self_loop.assign(count, 0.0);
  out.strength.assign(count, 0.0);
  out.total = w.total;
  std::vector<std::unordered_map<std::uint32_t, double>> links(count);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const std::uint32_t ci = community[i];
    out.strength[ci] += w.strength[i];
    out.self_loop[ci] += w.self_loop[i];
    for (const auto& [j, weight] : w.adjacency[i]) {
      const std::uint32_t cj = community[j];
      if (ci == cj) {
        out.self_loop[ci] += 0.5 * weight;  // each internal edge is seen twice
      } else {
        links[ci][cj] += weight;
      }
    }
  }
  for (std::size_t c = 0; c < count; ++c) {
    out.adjacency[c].assign(links[c].begin(), links[c].end());
    std::sort(out.adjacency[c].begin(), out.adjacency[c].end());
  }
  return out;
}

}  // namespace

double modularity(const Graph& g, const LabelAssignment& labels) {
  if (labels.size() != g.node_count()) {
    throw std::invalid_argument("modularity: " + std::to_string(labels.size()) + " labels for " +
                                std::to_string(g.node_count()) + " nodes");
  }
  if (g.edge_count() == 0) throw std::invalid_argument("modularity is undefined on an edgeless graph");
  const double m = static_cast<double>(g.edge_count());
  std::vector<double> inside(labels.class_count(), 0.0);
  std::vector<double> degree_sum(labels.class_count(), 0.0);
  for (NodeId u = 0; u < g.node_count(); ++u) {
    degree_sum[labels[u]] += static_cast<double>(g.degree(u));
    for (NodeId v : g.neighbors(u)) {
      if (u < v && labels[u] == labels[v]) inside[labels[u]] += 1.0;
    }
  }
  double q = 0.0;
  for (std::size_t c = 0; c < labels.class_count(); ++c) {
    const double share = degree_sum[c] / (2.0 * m);
    q += inside[c] / m - share * share;
  }
  return q;
}

LouvainResult louvain_detailed(const Graph& g, std::uint64_t seed) {
  if (g.edge_count() == 0) throw std::invalid_argument("louvain: graph has no edges");
  Rng rng(seed);
  WeightedGraph level = from_graph(g);
  std::vector<std::uint32_t> node_community(g.node_count());
  std::iota(node_community.begin(), node_community.end(), 0);

  LouvainResult result;
  while (true) {
    std::vector<std::uint32_t> community(level.size());
    std::iota(community.begin(), community.end(), 0);
    const bool moved = local_moving(level, community, rng, result.pass_modularity);
    if (!moved) break;
    const std::size_t count = compact(community);
    for (auto& c : node_community) c = community[c];
    if (count == level.size()) break;
    level = aggregate(level, community, count);
  }
  const std::size_t count = compact(node_community);
  result.labels = LabelAssignment(std::move(node_community), count);
  result.modularity = modularity(g, result.labels);
  return result;
}

LabelAssignment louvain(const Graph& g, std::uint64_t seed) { return louvain_detailed(g, seed).labels; }

}  // namespace netpoison
