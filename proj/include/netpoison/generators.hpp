#pragma once

#include <cstdint>
#include <vector>

#include "netpoison/graph.hpp"

namespace netpoison {

/// LFR benchmark parameters. max_degree and max_community default (0) to
/// min(n-1, 3*avg_degree) and n respectively.
struct LfrParams {
  std::size_t n = 1000;
  double tau_degree = 3.0;
  double tau_community = 2.0;
  double avg_degree = 20.0;
  std::size_t min_community = 200;
  double mu = 0.3;
  std::size_t max_degree = 0;
  std::size_t max_community = 0;
};

struct LabeledGraph {
  Graph graph;
  LabelAssignment labels;
};

/// Planted-community benchmark graph with power-law degrees and community
/// sizes. Labels are the planted communities. Throws std::invalid_argument on
/// out-of-domain parameters and std::runtime_error when a construction phase
/// fails after its retry cap.
LabeledGraph generate_lfr(const LfrParams& params, std::uint64_t seed);

/// Mean over non-isolated nodes of the fraction of neighbors carrying a
/// different label.
double mean_mixing(const Graph& g, const LabelAssignment& labels);

struct ForestFireParams {
  std::size_t n = 1000;
  double p_forward = 0.4;
  double p_backward = 0.2;
};

/// Directed forest-fire growth, symmetrized. Every node after the first links
/// to its ambassador, so the result is connected.
Graph generate_forest_fire(const ForestFireParams& params, std::uint64_t seed);

/// Newman modularity of a partition. Throws on size mismatch or an edgeless
/// graph.
double modularity(const Graph& g, const LabelAssignment& labels);

struct LouvainResult {
  LabelAssignment labels;
  double modularity = 0.0;
  /// Modularity after each local-moving pass, across all levels, in order.
  std::vector<double> pass_modularity;
};

/// Louvain community detection. Visit order is shuffled per level by seed;
/// among equal-gain moves the lowest community id wins and ties with the
/// current community keep the node in place. Community ids in the output are
/// compacted in order of first appearance.
LouvainResult louvain_detailed(const Graph& g, std::uint64_t seed);
LabelAssignment louvain(const Graph& g, std::uint64_t seed);

}  // namespace netpoison
