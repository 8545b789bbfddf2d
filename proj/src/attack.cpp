#include "netpoison/attack.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "netpoison/downstream.hpp"
#include "netpoison/random.hpp"

namespace netpoison {

namespace {

// Post-flip theta values closer than 2^-kRankGridBits rank as ties.
constexpr int kRankGridBits = 40;

double ratio_of(double same, double mass) { return mass > 0.0 ? same / mass : 0.0; }

std::uint64_t edge_key(NodeId u, NodeId v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

void require_flip_consistent(const Graph& g, const FlipCandidate& f) {
  if (f.u == f.v || f.u >= g.node_count() || f.v >= g.node_count()) {
    throw std::invalid_argument("flip (" + std::to_string(f.u) + "," + std::to_string(f.v) +
                                ") is not a valid vertex pair");
  }
  const bool present = g.has_edge(f.u, f.v);
  if ((f.kind == FlipKind::Add) == present) {
    throw std::invalid_argument("flip " + to_string(f.kind) + " (" + std::to_string(f.u) + "," +
                                std::to_string(f.v) + ") is inconsistent with the graph");
  }
}

}  // namespace

std::string to_string(CandidateMode mode) {
  switch (mode) {
    case CandidateMode::Add: return "add";
    case CandidateMode::Remove: return "remove";
    case CandidateMode::Combined: return "combined";
  }
  return "combined";
}

CandidateMode candidate_mode_from_string(const std::string& text) {
  if (text == "add") return CandidateMode::Add;
  if (text == "remove") return CandidateMode::Remove;
  if (text == "combined") return CandidateMode::Combined;
  throw std::invalid_argument("unknown candidate mode '" + text + "' (add, remove, combined)");
}

CandidateSet build_candidates(const Graph& g, CandidateMode mode, double add_multiplier,
                              std::uint64_t seed) {
  const bool with_add = mode != CandidateMode::Remove;
  const bool with_remove = mode != CandidateMode::Add;
  if (with_add && !(add_multiplier > 0.0)) {
    throw std::invalid_argument("add multiplier must be positive when additions are requested");
  }
  CandidateSet cs;
  cs.mode = mode;
  cs.add_multiplier = add_multiplier;

  Rng rng(seed);
  std::unordered_set<std::uint64_t> safe;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    const auto nb = g.neighbors(u);
    if (nb.empty()) continue;
    const NodeId v = nb[rng.below(nb.size())];
    if (safe.insert(edge_key(u, v)).second) cs.safe_edges.push_back({std::min(u, v), std::max(u, v)});
  }
  std::sort(cs.safe_edges.begin(), cs.safe_edges.end());

  if (with_remove) {
    for (const auto& e : g.edges()) {
      if (!safe.contains(edge_key(e.u, e.v))) cs.candidates.push_back({e.u, e.v, FlipKind::Remove});
    }
  }
  if (with_add) {
    const auto wanted = static_cast<std::uint64_t>(
        std::floor(add_multiplier * static_cast<double>(g.edge_count())));
    const std::uint64_t count = std::min(wanted, g.non_edge_count());
    auto additions = sample_complement(g, count, rng.next());
    cs.candidates.insert(cs.candidates.end(), additions.begin(), additions.end());
  }
  return cs;
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)), mass_(rows, 0.0) {
  if (values_.size() != rows * cols) throw std::invalid_argument("feature matrix size mismatch");
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t d = 0; d < cols; ++d) {
      const double x = values_[i * cols + d];
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw std::invalid_argument("feature matrix entries must be finite and non-negative");
      }
      mass_[i] += x;
    }
  }
}

FeatureMatrix FeatureMatrix::one_hot(const LabelAssignment& labels) {
  std::vector<double> values(labels.size() * labels.class_count(), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) values[i * labels.class_count() + labels[i]] = 1.0;
  return FeatureMatrix(labels.size(), labels.class_count(), std::move(values));
}

double FeatureMatrix::overlap(std::size_t i, std::size_t j) const {
  double s = 0.0;
  const double* a = values_.data() + i * cols_;
  const double* b = values_.data() + j * cols_;
  for (std::size_t d = 0; d < cols_; ++d) s += a[d] * b[d];
  return s;
}

HomophilyState::HomophilyState(const Graph& g, FeatureMatrix features)
    : features_(std::move(features)),
      mass_(g.node_count(), 0.0),
      same_(g.node_count(), 0.0),
      ratio_(g.node_count(), 0.0) {
  if (features_.rows() != g.node_count()) {
    throw std::invalid_argument("feature matrix has " + std::to_string(features_.rows()) +
                                " rows for " + std::to_string(g.node_count()) + " nodes");
  }
  for (NodeId u = 0; u < g.node_count(); ++u) {
    for (NodeId v : g.neighbors(u)) {
      mass_[u] += features_.mass(v);
      same_[u] += features_.overlap(u, v);
    }
    ratio_[u] = ratio_of(same_[u], mass_[u]);
    theta_squared_ += ratio_[u] * ratio_[u];
  }
  clean_theta_ = std::sqrt(theta_squared_);
}

double HomophilyState::theta() const { return std::sqrt(std::max(0.0, theta_squared_)); }

double HomophilyState::theta_after(const FlipCandidate& f) const {
  const double sign = f.kind == FlipKind::Add ? 1.0 : -1.0;
  const double shared = features_.overlap(f.u, f.v);
  const double ru = ratio_of(same_[f.u] + sign * shared, mass_[f.u] + sign * features_.mass(f.v));
  const double rv = ratio_of(same_[f.v] + sign * shared, mass_[f.v] + sign * features_.mass(f.u));
  // Endpoint terms are combined commutatively so that flips with equal
  // endpoint states score bit-identically regardless of orientation.
  const double delta_u = ru * ru - ratio_[f.u] * ratio_[f.u];
  const double delta_v = rv * rv - ratio_[f.v] * ratio_[f.v];
  return std::sqrt(std::max(0.0, theta_squared_ + (delta_u + delta_v)));
}

void HomophilyState::apply(const FlipCandidate& f) {
  const double sign = f.kind == FlipKind::Add ? 1.0 : -1.0;
  const double shared = features_.overlap(f.u, f.v);
  theta_squared_ -= ratio_[f.u] * ratio_[f.u] + ratio_[f.v] * ratio_[f.v];
  mass_[f.u] += sign * features_.mass(f.v);
  mass_[f.v] += sign * features_.mass(f.u);
  same_[f.u] += sign * shared;
  same_[f.v] += sign * shared;
  ratio_[f.u] = ratio_of(same_[f.u], mass_[f.u]);
  ratio_[f.v] = ratio_of(same_[f.v], mass_[f.v]);
  theta_squared_ += ratio_[f.u] * ratio_[f.u] + ratio_[f.v] * ratio_[f.v];
}

HomophilyState homophily_state(const Graph& g, const LabelAssignment& labels) {
  if (labels.size() != g.node_count()) {
    throw std::invalid_argument("label count " + std::to_string(labels.size()) +
                                " does not match node count " + std::to_string(g.node_count()));
  }
  return HomophilyState(g, FeatureMatrix::one_hot(labels));
}

double homophily_theta(const Graph& g, const FeatureMatrix& features) {
  return HomophilyState(g, features).clean_theta();
}

double flip_importance(const HomophilyState& state, const Graph& g, const FlipCandidate& f) {
  require_flip_consistent(g, f);
  return state.clean_theta() - state.theta_after(f);
}

std::vector<ScoredFlip> rank_candidates(const Graph& g, const HomophilyState& state,
                                        const CandidateSet& cs) {
  struct Keyed {
    double key;
    ScoredFlip scored;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(cs.candidates.size());
  for (const auto& f : cs.candidates) {
    require_flip_consistent(g, f);
    const double after = state.theta_after(f);
    keyed.push_back({std::round(std::ldexp(after, kRankGridBits)), {f, state.clean_theta() - after}});
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.scored.flip < b.scored.flip;
  });
  std::vector<ScoredFlip> scored;
  scored.reserve(keyed.size());
  for (const auto& k : keyed) scored.push_back(k.scored);
  return scored;
}

AttackResult viking_attack(const Graph& g, const FeatureMatrix& features, std::size_t budget,
                           const CandidateSet& cs) {
  const HomophilyState state(g, features);
  auto ranked = rank_candidates(g, state, cs);

  AttackResult result;
  result.requested_budget = budget;
  result.truncated = budget > ranked.size();
  ranked.resize(std::min(budget, ranked.size()));
  result.flips = std::move(ranked);

  std::vector<FlipCandidate> chosen;
  chosen.reserve(result.flips.size());
  for (const auto& s : result.flips) chosen.push_back(s.flip);
  result.poisoned = apply_flips(g, chosen);
  result.theta_before = state.clean_theta();
  result.theta_after = homophily_theta(result.poisoned, state.features());
  return result;
}

AttackResult viking_attack(const Graph& g, const LabelAssignment& labels, std::size_t budget,
                           const CandidateSet& cs) {
  if (labels.size() != g.node_count()) {
    throw std::invalid_argument("label count does not match node count");
  }
  return viking_attack(g, FeatureMatrix::one_hot(labels), budget, cs);
}

AttackResult random_attack(const Graph& g, std::size_t budget, const CandidateSet& cs,
                           std::uint64_t seed) {
  Rng rng(seed);
  std::vector<FlipCandidate> pool = cs.candidates;
  const std::size_t take = std::min(budget, pool.size());
  for (std::size_t i = 0; i < take; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  pool.resize(take);

  AttackResult result;
  result.requested_budget = budget;
  result.truncated = budget > cs.candidates.size();
  result.poisoned = apply_flips(g, pool);
  for (const auto& f : pool) result.flips.push_back({f, 0.0});
  return result;
}

void annotate_attack(AttackResult& result, const Graph& clean, const LabelAssignment& labels) {
  const auto state = homophily_state(clean, labels);
  for (auto& s : result.flips) s.importance = flip_importance(state, clean, s.flip);
  result.theta_before = state.clean_theta();
  result.theta_after = homophily_theta(result.poisoned, state.features());
}

SurrogateLabels surrogate_labels(const Graph& g, const LabelAssignment& truth,
                                 double known_fraction, std::uint64_t seed,
                                 const EmbedderConfig& embedder) {
  if (!(known_fraction > 0.0 && known_fraction <= 1.0)) {
    throw std::invalid_argument("known fraction must lie in (0, 1]");
  }
  if (truth.size() != g.node_count()) throw std::invalid_argument("label count does not match node count");

  SurrogateLabels out;
  out.known_nodes = stratified_sample(truth, known_fraction, derive_seed(seed, 1));
  std::vector<char> is_known(g.node_count(), 0);
  std::vector<char> class_seen(truth.class_count(), 0);
  for (NodeId u : out.known_nodes) {
    is_known[u] = 1;
    class_seen[truth[u]] = 1;
  }
  const auto sizes = truth.class_sizes();
  for (Label c = 0; c < truth.class_count(); ++c) {
    if (!class_seen[c] && sizes[c] > 0) out.unseen_classes.push_back(c);
  }

  if (out.known_nodes.size() == g.node_count()) {
    out.labels = truth;
    return out;
  }

  const Embedding z = embed(g, embedder, derive_seed(seed, 2));
  Eigen::MatrixXd x(out.known_nodes.size(), z.dim());
  std::vector<Label> y;
  y.reserve(out.known_nodes.size());
  for (std::size_t i = 0; i < out.known_nodes.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = z.vectors.row(out.known_nodes[i]);
    y.push_back(truth[out.known_nodes[i]]);
  }
  const auto model = fit_logreg(x, y, truth.class_count());
  const auto predicted = model.predict(z.vectors);

  std::vector<Label> values(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) values[u] = is_known[u] ? truth[u] : predicted[u];
  out.labels = LabelAssignment(std::move(values), truth.class_count());
  return out;
}

AttackResult viking_s_attack(const Graph& g, const LabelAssignment& truth, double known_fraction,
                             std::size_t budget, const CandidateSet& cs, std::uint64_t seed,
                             const EmbedderConfig& embedder) {
  const auto surrogate = surrogate_labels(g, truth, known_fraction, seed, embedder);
  return viking_attack(g, surrogate.labels, budget, cs);
}

}  // namespace netpoison
