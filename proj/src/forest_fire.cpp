#include <algorithm>
#include <stdexcept>

#include "netpoison/generators.hpp"
#include "netpoison/random.hpp"

namespace netpoison {

namespace {

// Picks up to `count` entries of `pool` that are not yet burned, uniformly.
void burn_some(const std::vector<NodeId>& pool, std::uint64_t count, std::vector<char>& burned,
               std::vector<NodeId>& frontier, std::vector<NodeId>& burned_list, Rng& rng) {
  if (count == 0) return;
  std::vector<NodeId> open;
  for (NodeId x : pool) {
    if (!burned[x]) open.push_back(x);
  }
  const std::size_t take = std::min<std::size_t>(count, open.size());
  for (std::size_t i = 0; i < take; ++i) {
    std::swap(open[i], open[i + rng.below(open.size() - i)]);
    burned[open[i]] = 1;
    frontier.push_back(open[i]);
    burned_list.push_back(open[i]);
  }
}

}  // namespace

Graph generate_forest_fire(const ForestFireParams& p, std::uint64_t seed) {
  if (p.n == 0) throw std::invalid_argument("forest fire: n must be at least 1");
  if (!(p.p_forward >= 0.0 && p.p_forward < 1.0) || !(p.p_backward >= 0.0 && p.p_backward < 1.0)) {
    throw std::invalid_argument("forest fire: burning probabilities must lie in [0,1)");
  }
  Rng rng(seed);
  std::vector<std::vector<NodeId>> out_links(p.n);
  std::vector<std::vector<NodeId>> in_links(p.n);
  std::vector<Edge> edges;
  std::vector<char> burned(p.n, 0);

  for (NodeId node = 1; node < p.n; ++node) {
    const auto ambassador = static_cast<NodeId>(rng.below(node));
    std::vector<NodeId> burned_list{ambassador};
    std::vector<NodeId> frontier{ambassador};
    burned[node] = 1;
    burned[ambassador] = 1;
    std::size_t head = 0;
    while (head < frontier.size()) {
      const NodeId x = frontier[head++];
      // Geometric counts with means p/(1-p) forward and r/(1-r) backward.
      const std::uint64_t forward = rng.geometric(1.0 - p.p_forward);
      const std::uint64_t backward = rng.geometric(1.0 - p.p_backward);
      burn_some(out_links[x], forward, burned, frontier, burned_list, rng);
      burn_some(in_links[x], backward, burned, frontier, burned_list, rng);
    }
    for (NodeId y : burned_list) {
      out_links[node].push_back(y);
      in_links[y].push_back(node);
      edges.push_back({std::min(node, y), std::max(node, y)});
      burned[y] = 0;
    }
    burned[node] = 0;
  }
  return build_graph(p.n, edges);
}

}  // namespace netpoison
