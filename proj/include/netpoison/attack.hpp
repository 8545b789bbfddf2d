#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netpoison/embeddings.hpp"
#include "netpoison/graph.hpp"

namespace netpoison {

enum class CandidateMode { Add, Remove, Combined };

std::string to_string(CandidateMode mode);
CandidateMode candidate_mode_from_string(const std::string& text);

/// Pool of legal flips. Removal candidates exclude every safe edge (one random
/// incident edge per non-isolated node); addition candidates are distinct
/// sampled non-edges.
struct CandidateSet {
  CandidateMode mode = CandidateMode::Combined;
  double add_multiplier = 2.0;
  std::vector<FlipCandidate> candidates;
  std::vector<Edge> safe_edges;
};

/// Removal pool first (edge order), then the addition pool (sample order).
/// The addition pool has min(floor(k*|E|), available non-edges) entries.
CandidateSet build_candidates(const Graph& g, CandidateMode mode, double add_multiplier,
                              std::uint64_t seed);

/// Dense non-negative node feature matrix F (|V| x D). The label one-hot view
/// is the common case; any non-negative features are accepted.
class FeatureMatrix {
 public:
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static FeatureMatrix one_hot(const LabelAssignment& labels);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
  double at(std::size_t i, std::size_t d) const { return values_[i * cols_ + d]; }

  /// Sum of row i.
  double mass(std::size_t i) const { return mass_[i]; }
  /// <F_i, F_j>.
  double overlap(std::size_t i, std::size_t j) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
  std::vector<double> mass_;
};

/// Per-node neighbor feature aggregates for the homophily loss
///   theta(F, A) = || diag(rowsum(A F))^-1 rowsum((A F) o F) ||_2.
/// mass s_i = rowsum(A F)_i, same t_i = rowsum((A F) o F)_i, ratio r_i = t_i / s_i
/// (0 when s_i = 0). For one-hot labels s_i is the degree and t_i the number of
/// same-label neighbors. clean_theta (the constant C) is fixed at construction.
class HomophilyState {
 public:
  HomophilyState(const Graph& g, FeatureMatrix features);

  std::span<const double> mass() const noexcept { return mass_; }
  std::span<const double> same() const noexcept { return same_; }
  std::span<const double> ratio() const noexcept { return ratio_; }
  double theta() const;
  double theta_squared() const noexcept { return theta_squared_; }
  double clean_theta() const noexcept { return clean_theta_; }
  const FeatureMatrix& features() const noexcept { return features_; }

  /// theta of the graph with f applied, touching only rows u and v.
  /// The caller guarantees f is consistent with the tracked graph.
  double theta_after(const FlipCandidate& f) const;

  /// Applies f to the tracked aggregates. clean_theta is unchanged.
  void apply(const FlipCandidate& f);

 private:
  FeatureMatrix features_;
  std::vector<double> mass_;
  std::vector<double> same_;
  std::vector<double> ratio_;
  double theta_squared_ = 0.0;
  double clean_theta_ = 0.0;
};

HomophilyState homophily_state(const Graph& g, const LabelAssignment& labels);

/// Full recomputation of theta on g.
double homophily_theta(const Graph& g, const FeatureMatrix& features);

/// Importance C - theta(F, A_f) of a single flip against the clean graph.
/// Throws std::invalid_argument if f is inconsistent with g.
double flip_importance(const HomophilyState& state, const Graph& g, const FlipCandidate& f);

struct ScoredFlip {
  FlipCandidate flip;
  double importance = 0.0;
};

/// Scores every candidate independently against the clean graph and sorts by
/// importance descending, ties by (kind, u, v). Importances that differ by
/// less than 2^-40 count as ties.
std::vector<ScoredFlip> rank_candidates(const Graph& g, const HomophilyState& state,
                                        const CandidateSet& cs);

struct AttackResult {
  Graph poisoned;
  std::vector<ScoredFlip> flips;
  std::optional<double> theta_before;
  std::optional<double> theta_after;
  std::size_t requested_budget = 0;
  /// True when the budget exceeded the candidate pool.
  bool truncated = false;
};

/// Greedy budgeted attack: top-b ranked flips applied simultaneously.
AttackResult viking_attack(const Graph& g, const FeatureMatrix& features, std::size_t budget,
                           const CandidateSet& cs);
AttackResult viking_attack(const Graph& g, const LabelAssignment& labels, std::size_t budget,
                           const CandidateSet& cs);

/// Uniform sample of min(b, |CS|) candidates, in sample order. Importance and
/// theta fields are left empty; see annotate_attack.
AttackResult random_attack(const Graph& g, std::size_t budget, const CandidateSet& cs,
                           std::uint64_t seed);

/// Fills theta_before/theta_after and per-flip importance from labels.
void annotate_attack(AttackResult& result, const Graph& clean, const LabelAssignment& labels);

struct SurrogateLabels {
  LabelAssignment labels;
  std::vector<NodeId> known_nodes;
  /// Classes absent from the known sample; the classifier never predicts them.
  std::vector<Label> unseen_classes;
};

/// Labels predicted by a logistic regression trained on a stratified sample
/// of ceil(known_fraction * |V|) true labels over an unsupervised embedding of
/// the clean graph. Known nodes keep their true label.
SurrogateLabels surrogate_labels(const Graph& g, const LabelAssignment& truth,
                                 double known_fraction, std::uint64_t seed,
                                 const EmbedderConfig& embedder = EmbedderConfig{});

/// surrogate_labels followed by viking_attack on the surrogate.
AttackResult viking_s_attack(const Graph& g, const LabelAssignment& truth, double known_fraction,
                             std::size_t budget, const CandidateSet& cs, std::uint64_t seed,
                             const EmbedderConfig& embedder = EmbedderConfig{});

}  // namespace netpoison
