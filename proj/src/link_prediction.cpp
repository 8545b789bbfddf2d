#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "netpoison/downstream.hpp"
#include "netpoison/random.hpp"

namespace netpoison {

namespace {

constexpr std::size_t kSplitRetries = 100;

}  // namespace

LinkPredictionSplit make_lp_split(const Graph& g, double holdout_fraction, std::uint64_t seed) {
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw std::invalid_argument("lp split: holdout fraction must lie in [0, 1)");
  }
  if (g.edge_count() == 0) throw std::invalid_argument("lp split: graph has no edges");
  const auto count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(g.edge_count()))));
  if (count > g.non_edge_count()) {
    throw std::runtime_error("lp split: " + std::to_string(count) + " negatives requested but only " +
                             std::to_string(g.non_edge_count()) + " non-edges exist");
  }

  Rng rng(seed);
  const auto edges = g.edges();
  std::vector<Edge> positives;
  for (std::size_t attempt = 0; attempt < kSplitRetries && positives.size() < count; ++attempt) {
    std::vector<Edge> order = edges;
    rng.shuffle(std::span<Edge>(order));
    std::vector<std::size_t> degree = degrees(g);
    positives.clear();
    for (const Edge& e : order) {
      if (positives.size() == count) break;
      if (degree[e.u] > 1 && degree[e.v] > 1) {
        --degree[e.u];
        --degree[e.v];
        positives.push_back(e);
      }
    }
  }
  if (positives.size() < count) {
    throw std::runtime_error("lp split: cannot hold out " + std::to_string(count) +
                             " edges without isolating a node after " + std::to_string(kSplitRetries) +
                             " attempts");
  }

  LinkPredictionSplit split;
  std::vector<FlipCandidate> removals;
  for (const Edge& e : positives) removals.push_back({e.u, e.v, FlipKind::Remove});
  split.residual = apply_flips(g, removals);
  for (const auto& f : sample_complement(g, count, rng.next())) split.test_negative.push_back({f.u, f.v});
  split.test_positive = std::move(positives);
  return split;
}

double average_precision(std::span<const ScoredPair> scores, std::span<const Edge> positives) {
  if (positives.empty()) throw std::invalid_argument("average precision: no positives");
  std::vector<ScoredPair> ranked(scores.begin(), scores.end());
  std::sort(ranked.begin(), ranked.end(), [](const ScoredPair& a, const ScoredPair& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.pair < b.pair;
  });
  std::vector<Edge> wanted(positives.begin(), positives.end());
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());

  std::vector<char> found(wanted.size(), 0);
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < ranked.size(); ++rank) {
    const auto it = std::lower_bound(wanted.begin(), wanted.end(), ranked[rank].pair);
    if (it == wanted.end() || *it != ranked[rank].pair) continue;
    auto& seen = found[static_cast<std::size_t>(it - wanted.begin())];
    if (seen) continue;
    seen = 1;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
  }
  if (hits != wanted.size()) {
    for (std::size_t i = 0; i < wanted.size(); ++i) {
      if (!found[i]) {
        throw std::invalid_argument("average precision: positive (" + std::to_string(wanted[i].u) + "," +
                                    std::to_string(wanted[i].v) + ") has no score");
      }
    }
  }
  return sum / static_cast<double>(wanted.size());
}

MetricSummary link_prediction_eval(const Graph& g, const EmbedderConfig& embedder, const EvalOptions& options,
                                   std::uint64_t seed) {
  if (options.runs == 0) throw std::invalid_argument("link prediction: runs must be positive");
  std::vector<double> values;
  for (std::size_t r = 0; r < options.runs; ++r) {
    const std::uint64_t run_seed = derive_seed(seed, r);
    const auto split = make_lp_split(g, options.holdout_fraction, derive_seed(run_seed, 0));
    const Embedding z = embed(split.residual, embedder, derive_seed(run_seed, 1));
    if (!z.all_finite()) throw std::runtime_error("link prediction: embedding has non-finite entries");
    std::vector<ScoredPair> scores;
    for (const auto* list : {&split.test_positive, &split.test_negative}) {
      for (const Edge& e : *list) scores.push_back({e, cosine(z, e.u, e.v)});
    }
    values.push_back(average_precision(scores, split.test_positive));
  }
  return summarize(std::move(values));
}

}  // namespace netpoison
