#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netpoison/attack.hpp"
#include "netpoison/embeddings.hpp"
#include "netpoison/graph.hpp"

namespace netpoison {

// ---------------------------------------------------------------------------
// Node classification

struct LogRegParams {
  double l2 = 1e-4;
  std::size_t max_iterations = 500;
  /// Stop once the gradient norm falls below this.
  double gradient_tolerance = 1e-6;
};

/// Multinomial logistic regression on features centered and divided by their
/// overall root-mean-square.
class ClassifierModel {
 public:
  ClassifierModel() = default;
  ClassifierModel(Eigen::MatrixXd weights, Eigen::VectorXd bias, Eigen::RowVectorXd feature_mean,
                  Eigen::RowVectorXd feature_scale);

  std::size_t class_count() const noexcept { return static_cast<std::size_t>(weights_.rows()); }
  const Eigen::MatrixXd& weights() const noexcept { return weights_; }
  const Eigen::VectorXd& bias() const noexcept { return bias_; }

  Label predict(std::span<const double> features) const;
  std::vector<Label> predict(const Eigen::MatrixXd& rows) const;

  // Training metadata.
  std::size_t iterations = 0;
  double l2 = 0.0;
  std::vector<double> loss_history;
  std::vector<NodeId> train_nodes;

 private:
  Eigen::MatrixXd weights_;  // D x K
  Eigen::VectorXd bias_;     // D
  Eigen::RowVectorXd feature_mean_;
  Eigen::RowVectorXd feature_scale_;
};

/// Mean cross-entropy plus (l2/2)||W||^2 and its gradient (bias unpenalized).
struct LogRegObjective {
  double loss = 0.0;
  Eigen::MatrixXd grad_weights;
  Eigen::VectorXd grad_bias;
};

LogRegObjective logreg_objective(const Eigen::MatrixXd& x, std::span<const Label> y,
                                 const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                                 double l2);

/// Full-batch gradient descent with backtracking line search on the rows of
/// x. The accepted loss sequence is non-increasing. Throws
/// std::runtime_error if the loss becomes non-finite.
ClassifierModel fit_logreg(const Eigen::MatrixXd& x, std::span<const Label> y,
                           std::size_t class_count, const LogRegParams& params = {});

/// Seeded stratified sample of ceil(fraction * |V|) nodes, allocated to
/// classes proportionally (largest remainder). Classes with fewer than two
/// members go entirely to the sample; every other non-empty class gets at
/// least one node. Returned sorted.
std::vector<NodeId> stratified_sample(const LabelAssignment& labels, double fraction,
                                      std::uint64_t seed);

ClassifierModel train_logreg(const Embedding& z, const LabelAssignment& labels,
                             double train_fraction, double l2, std::uint64_t seed);

/// Micro-averaged F1 over classes. Throws on length mismatch.
double micro_f1(std::span<const Label> predicted, std::span<const Label> truth);
double accuracy(std::span<const Label> predicted, std::span<const Label> truth);

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation over runs
  std::vector<double> values;
};

MetricSummary summarize(std::vector<double> values);

struct EvalOptions {
  std::size_t runs = 10;
  double train_fraction = 0.1;
  double holdout_fraction = 0.1;
  LogRegParams logreg;
};

/// Per run: embed g (once in total for deterministic embedders), stratified
/// split, train_logreg, micro-F1 on the held-out nodes.
MetricSummary node_classification_eval(const Graph& g, const LabelAssignment& labels,
                                       const EmbedderConfig& embedder, const EvalOptions& options,
                                       std::uint64_t seed);

/// The same protocol on a fixed, externally produced embedding.
MetricSummary node_classification_eval(const Embedding& z, const LabelAssignment& labels,
                                       const EvalOptions& options, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Link prediction

struct LinkPredictionSplit {
  Graph residual;
  std::vector<Edge> test_positive;
  std::vector<Edge> test_negative;
};

/// Holds out max(1, round(fraction * |E|)) edges whose removal leaves no
/// endpoint isolated, plus as many non-edges of g. Throws std::runtime_error
/// if no valid holdout is found within the retry cap.
LinkPredictionSplit make_lp_split(const Graph& g, double holdout_fraction, std::uint64_t seed);

struct ScoredPair {
  Edge pair;
  double score = 0.0;
};

/// Mean precision at the rank of each positive, ranking by score descending
/// and then by pair. Throws std::invalid_argument if a positive is not scored.
double average_precision(std::span<const ScoredPair> scores, std::span<const Edge> positives);

MetricSummary link_prediction_eval(const Graph& g, const EmbedderConfig& embedder,
                                   const EvalOptions& options, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Adversarial edge diagnostics

/// Raw betweenness of every edge of g (g.edges() order), counting each
/// unordered source/target pair once.
std::vector<double> edge_betweenness(const Graph& g);

/// Normalization applied to raw edge betweenness: (n-1)(n-2), or 1 when n < 3.
double edge_betweenness_scale(std::size_t node_count);
inline constexpr const char* kBetweennessConvention =
    "raw unordered-pair edge betweenness divided by (n-1)(n-2)";

/// Two-sample Kolmogorov-Smirnov statistic. 0 if either sample is empty.
double ks_statistic(std::vector<double> a, std::vector<double> b);

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
};

struct FlipDiagnostic {
  ScoredFlip flip;
  std::size_t degree_u = 0;
  std::size_t degree_v = 0;
  std::optional<double> betweenness;  // absent for additions
};

struct DiagnosticsReport {
  std::vector<FlipDiagnostic> flips;
  std::vector<HistogramBin> adversarial_degree;
  std::vector<HistogramBin> other_degree;
  std::vector<HistogramBin> adversarial_betweenness;
  std::vector<HistogramBin> other_betweenness;
  /// KS between removed edges and the remaining clean edges; empty when no
  /// removal was selected.
  std::optional<double> ks_betweenness;
};

/// Degrees and betweenness on the clean graph for each selected flip, plus
/// logarithmically binned histograms of adversarial vs. untouched edges.
DiagnosticsReport adversarial_edge_diagnostics(const Graph& clean, const AttackResult& result);

void write_diagnostics_csv(std::ostream& flips_out, std::ostream& histogram_out,
                           const DiagnosticsReport& report);

}  // namespace netpoison
