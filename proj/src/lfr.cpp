#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "netpoison/generators.hpp"
#include "netpoison/random.hpp"

namespace netpoison {

namespace {

constexpr int kRetryCap = 100;
constexpr double kMixingTolerance = 0.02;

// Continuous power law x^-tau truncated to [lo, hi].
class TruncatedPowerLaw {
 public:
  TruncatedPowerLaw(double tau, double lo, double hi) : tau_(tau), lo_(lo), hi_(hi) {}

  double cdf(double x) const {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return 1.0;
    if (std::abs(tau_ - 1.0) < 1e-12) return std::log(x / lo_) / std::log(hi_ / lo_);
    const double e = 1.0 - tau_;
    return (std::pow(x, e) - std::pow(lo_, e)) / (std::pow(hi_, e) - std::pow(lo_, e));
  }

  double sample(Rng& rng) const {
    const double u = rng.uniform();
    if (hi_ <= lo_) return lo_;
    if (std::abs(tau_ - 1.0) < 1e-12) return lo_ * std::pow(hi_ / lo_, u);
    const double e = 1.0 - tau_;
    const double a = std::pow(lo_, e);
    const double b = std::pow(hi_, e);
    return std::pow(a + u * (b - a), 1.0 / e);
  }

  // Mean of round(X).
  double rounded_mean() const {
    double mean = 0.0;
    const auto first = static_cast<long>(std::floor(lo_));
    const auto last = static_cast<long>(std::ceil(hi_));
    for (long k = first; k <= last; ++k) {
      const double p = cdf(static_cast<double>(k) + 0.5) - cdf(static_cast<double>(k) - 0.5);
      mean += static_cast<double>(k) * p;
    }
    return mean;
  }

 private:
  double tau_;
  double lo_;
  double hi_;
};

std::uint64_t key(NodeId a, NodeId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

// Lower cutoff giving the requested rounded mean, by bisection.
double degree_cutoff(double tau, double avg, double kmax) {
  double lo = 1.0;
  double hi = kmax;
  if (TruncatedPowerLaw(tau, hi, kmax).rounded_mean() < avg - 1e-9) {
    throw std::runtime_error("LFR: avg_degree " + std::to_string(avg) +
                             " is not reachable below max_degree " + std::to_string(kmax));
  }
  if (TruncatedPowerLaw(tau, lo, kmax).rounded_mean() > avg + 1e-9) {
    throw std::runtime_error("LFR: avg_degree " + std::to_string(avg) +
                             " is below the minimum mean for tau_degree " + std::to_string(tau));
  }
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (TruncatedPowerLaw(tau, mid, kmax).rounded_mean() < avg) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<std::size_t> community_sizes(const LfrParams& p, std::size_t max_community,
                                         Rng& rng) {
  const TruncatedPowerLaw law(p.tau_community, static_cast<double>(p.min_community),
                              static_cast<double>(max_community));
  for (int attempt = 0; attempt < kRetryCap; ++attempt) {
    std::vector<std::size_t> sizes;
    std::size_t total = 0;
    while (total < p.n) {
      auto s = static_cast<std::size_t>(std::llround(law.sample(rng)));
      s = std::clamp(s, p.min_community, max_community);
      sizes.push_back(s);
      total += s;
    }
    std::size_t excess = total - p.n;
    // Trim the excess from the largest communities first.
    std::vector<std::size_t> order(sizes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return sizes[a] > sizes[b]; });
    for (std::size_t idx : order) {
      if (excess == 0) break;
      const std::size_t slack = sizes[idx] - p.min_community;
      const std::size_t cut = std::min(slack, excess);
      sizes[idx] -= cut;
      excess -= cut;
    }
    if (excess == 0) return sizes;
  }
  throw std::runtime_error("LFR: community sizes >= min_community could not be made to sum to n");
}

// Pairs stubs into edges accepted by `allowed`, avoiding self-loops and
// multi-edges. Stubs that cannot be placed after the retry cap are dropped.
template <typename Allowed>
void match_stubs(std::vector<NodeId> stubs, Rng& rng, Allowed allowed,
                 std::unordered_set<std::uint64_t>& taken, std::vector<Edge>& out) {
  std::vector<Edge> accepted;
  std::vector<NodeId> pending = std::move(stubs);
  std::size_t stalled_rounds = 0;
  for (int round = 0; round < kRetryCap && pending.size() >= 2; ++round) {
    rng.shuffle(std::span<NodeId>(pending));
    std::vector<NodeId> next;
    for (std::size_t i = 0; i + 1 < pending.size(); i += 2) {
      const NodeId a = pending[i];
      const NodeId b = pending[i + 1];
      if (a != b && allowed(a, b) && taken.insert(key(a, b)).second) {
        accepted.push_back({std::min(a, b), std::max(a, b)});
      } else {
        next.push_back(a);
        next.push_back(b);
      }
    }
    if (pending.size() % 2 == 1) next.push_back(pending.back());
    stalled_rounds = next.size() == pending.size() ? stalled_rounds + 1 : 0;
    pending = std::move(next);
    if (stalled_rounds > 0 && !accepted.empty()) {
      // Break a few accepted edges so the leftover stubs get new partners.
      const std::size_t breaks = std::min(accepted.size(), pending.size() / 2 + 1);
      for (std::size_t i = 0; i < breaks; ++i) {
        const std::size_t at = rng.below(accepted.size());
        const Edge e = accepted[at];
        accepted[at] = accepted.back();
        accepted.pop_back();
        taken.erase(key(e.u, e.v));
        pending.push_back(e.u);
        pending.push_back(e.v);
      }
    }
  }
  out.insert(out.end(), accepted.begin(), accepted.end());
}

// Community sizes, membership and stub matching for fixed degrees. Nodes with
// the largest internal degree are placed first, each into a random community
// that can host it.
LabeledGraph wire_communities(const LfrParams& p, std::size_t max_community, const std::vector<std::size_t>& degree,
                              const std::vector<std::size_t>& internal, Rng& rng) {
  std::vector<std::size_t> sizes;
  std::vector<Label> membership(p.n);
  bool placed = false;
  for (int attempt = 0; attempt < kRetryCap && !placed; ++attempt) {
    sizes = community_sizes(p, max_community, rng);
    std::vector<std::size_t> free_slots = sizes;
    std::vector<NodeId> order(p.n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<NodeId>(order));
    std::stable_sort(order.begin(), order.end(),
                     [&](NodeId a, NodeId b) { return internal[a] > internal[b]; });
    placed = true;
    std::vector<std::size_t> eligible;
    for (NodeId node : order) {
      eligible.clear();
      for (std::size_t c = 0; c < sizes.size(); ++c) {
        if (free_slots[c] > 0 && sizes[c] > internal[node]) eligible.push_back(c);
      }
      if (eligible.empty()) {
        placed = false;
        break;
      }
      const std::size_t c = eligible[rng.below(eligible.size())];
      membership[node] = static_cast<Label>(c);
      --free_slots[c];
    }
  }
  if (!placed) {
    throw std::runtime_error("LFR: could not place every node in a community larger than its internal degree");
  }

  // Odd stub totals lose one stub so every stub can be paired.
  std::vector<std::vector<NodeId>> internal_stubs(sizes.size());
  std::vector<NodeId> external_stubs;
  for (NodeId node = 0; node < p.n; ++node) {
    internal_stubs[membership[node]].insert(internal_stubs[membership[node]].end(), internal[node], node);
    external_stubs.insert(external_stubs.end(), degree[node] - internal[node], node);
  }
  for (auto& stubs : internal_stubs) {
    if (stubs.size() % 2 == 1) stubs.erase(stubs.begin() + static_cast<std::ptrdiff_t>(rng.below(stubs.size())));
  }
  if (external_stubs.size() % 2 == 1) {
    external_stubs.erase(external_stubs.begin() + static_cast<std::ptrdiff_t>(rng.below(external_stubs.size())));
  }

  std::unordered_set<std::uint64_t> taken;
  std::vector<Edge> edges;
  for (auto& stubs : internal_stubs) {
    match_stubs(std::move(stubs), rng, [](NodeId, NodeId) { return true; }, taken, edges);
  }
  match_stubs(std::move(external_stubs), rng,
              [&](NodeId a, NodeId b) { return membership[a] != membership[b]; }, taken, edges);

  LabeledGraph out;
  out.graph = build_graph(p.n, edges);
  out.labels = LabelAssignment(std::move(membership), sizes.size());
  return out;
}

}  // namespace

double mean_mixing(const Graph& g, const LabelAssignment& labels) {
  if (labels.size() != g.node_count()) throw std::invalid_argument("label count mismatch");
  double total = 0.0;
  std::size_t counted = 0;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    const auto nb = g.neighbors(u);
    if (nb.empty()) continue;
    std::size_t diff = 0;
    for (NodeId v : nb) diff += labels[v] != labels[u] ? 1 : 0;
    total += static_cast<double>(diff) / static_cast<double>(nb.size());
    ++counted;
  }
  return counted == 0 ? 0.0 : total / static_cast<double>(counted);
}

LabeledGraph generate_lfr(const LfrParams& p, std::uint64_t seed) {
  if (p.n < 2) throw std::invalid_argument("LFR: n must be at least 2");
  if (!(p.mu >= 0.0 && p.mu <= 1.0)) throw std::invalid_argument("LFR: mu must lie in [0,1]");
  if (p.min_community == 0 || p.min_community > p.n) {
    throw std::invalid_argument("LFR: min_community must lie in 1..n");
  }
  if (!(p.avg_degree > 0.0 && p.avg_degree < static_cast<double>(p.n))) {
    throw std::invalid_argument("LFR: avg_degree must lie in (0, n)");
  }
  const std::size_t max_degree =
      p.max_degree != 0 ? std::min(p.max_degree, p.n - 1)
                        : std::min<std::size_t>(p.n - 1, static_cast<std::size_t>(std::ceil(3.0 * p.avg_degree)));
  const std::size_t max_community = p.max_community != 0 ? std::min(p.max_community, p.n) : p.n;
  if (max_community < p.min_community) {
    throw std::invalid_argument("LFR: max_community is below min_community");
  }

  Rng rng(seed);

  // Degree sequence.
  const double cutoff = degree_cutoff(p.tau_degree, p.avg_degree, static_cast<double>(max_degree));
  const TruncatedPowerLaw degree_law(p.tau_degree, cutoff, static_cast<double>(max_degree));
  std::vector<std::size_t> degree(p.n);
  for (auto& k : degree) {
    k = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(degree_law.sample(rng))), 1,
                                max_degree);
  }
  // Internal degree (1-mu)k, rounded stochastically so the expected mixing
  // of every node is exactly mu.
  std::vector<std::size_t> internal(p.n);
  for (std::size_t i = 0; i < p.n; ++i) {
    const double target = (1.0 - p.mu) * static_cast<double>(degree[i]);
    const double base = std::floor(target);
    internal[i] = static_cast<std::size_t>(base) + (rng.bernoulli(target - base) ? 1 : 0);
  }

  // Unbalanced community sizes can leave external stubs without a partner in
  // another community, which lowers the realized mixing; such draws are
  // discarded.
  double last_mixing = 0.0;
  for (int round = 0; round < kRetryCap; ++round) {
    auto attempt = wire_communities(p, max_community, degree, internal, rng);
    last_mixing = mean_mixing(attempt.graph, attempt.labels);
    if (std::abs(last_mixing - p.mu) <= kMixingTolerance) return attempt;
  }
  throw std::runtime_error("LFR: realized mixing " + std::to_string(last_mixing) + " stayed more than " +
                           std::to_string(kMixingTolerance) + " from mu=" + std::to_string(p.mu) + " after " +
                           std::to_string(kRetryCap) + " attempts");
}

}  // namespace netpoison
