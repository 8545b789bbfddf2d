#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "netpoison/embeddings.hpp"
#include "netpoison/random.hpp"

namespace netpoison {

namespace {

// Seed stage for the per-round root order; per-walk seeds use stage round+1.
constexpr std::uint64_t kRootOrderStage = 0x726f6f74;

NodeId uniform_neighbor(const Graph& g, NodeId u, Rng& rng) {
  const auto nb = g.neighbors(u);
  return nb[rng.below(nb.size())];
}

}  // namespace

WalkCorpus generate_walks(const Graph& g, const WalkParams& params, std::uint64_t seed) {
  if (params.walk_length == 0) throw std::invalid_argument("walk length must be at least 1");
  if (!(params.p > 0.0) || !(params.q > 0.0)) throw std::invalid_argument("p and q must be positive");

  const bool biased = params.p != 1.0 || params.q != 1.0;
  const double return_weight = 1.0 / params.p;
  const double outward_weight = 1.0 / params.q;
  const double max_weight = std::max({return_weight, 1.0, outward_weight});

  WalkCorpus corpus;
  corpus.params = params;
  corpus.walks.reserve(params.walks_per_node * g.node_count());
  std::vector<NodeId> roots(g.node_count());
  for (std::size_t round = 0; round < params.walks_per_node; ++round) {
    std::iota(roots.begin(), roots.end(), 0);
    Rng order_rng(derive_seed(seed, kRootOrderStage, round));
    order_rng.shuffle(std::span<NodeId>(roots));
    for (NodeId root : roots) {
      Rng rng(derive_seed(seed, round + 1, root));
      std::vector<NodeId> walk;
      walk.reserve(params.walk_length);
      walk.push_back(root);
      if (g.degree(root) > 0) {
        while (walk.size() < params.walk_length) {
          const NodeId current = walk.back();
          if (walk.size() == 1 || !biased) {
            walk.push_back(uniform_neighbor(g, current, rng));
            continue;
          }
          const NodeId previous = walk[walk.size() - 2];
          while (true) {
            const NodeId next = uniform_neighbor(g, current, rng);
            const double weight = next == previous            ? return_weight
                                  : g.has_edge(previous, next) ? 1.0
                                                               : outward_weight;
            if (rng.uniform() * max_weight < weight) {
              walk.push_back(next);
              break;
            }
          }
        }
      }
      corpus.walks.push_back(std::move(walk));
    }
  }
  return corpus;
}

}  // namespace netpoison
