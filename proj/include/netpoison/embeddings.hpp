#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "netpoison/graph.hpp"

namespace netpoison {

/// Node vectors, one row per node.
struct Embedding {
  Eigen::MatrixXd vectors;

  std::size_t node_count() const noexcept { return static_cast<std::size_t>(vectors.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(vectors.cols()); }
  bool all_finite() const { return vectors.allFinite(); }
};

/// Text format: "|V| K" header, then "node_id v1 ... vK" per node.
void write_embedding(std::ostream& out, const Embedding& z);
void write_embedding(const std::filesystem::path& path, const Embedding& z);
Embedding read_embedding(std::istream& in, const std::string& source = "<stream>");
Embedding read_embedding(const std::filesystem::path& path);

struct WalkParams {
  std::size_t walks_per_node = 10;
  std::size_t walk_length = 80;
  double p = 1.0;  // return bias
  double q = 1.0;  // in-out bias
};

struct WalkCorpus {
  std::vector<std::vector<NodeId>> walks;
  WalkParams params;
};

/// walks_per_node rounds; each round visits every root once in a shuffled
/// order. Each walk draws from its own seed derived from (seed, round, root),
/// so the corpus does not depend on scheduling. Second-order bias follows
/// weights 1/p (return), 1 (neighbor of previous), 1/q (outward), sampled by
/// rejection so no transition tables are stored.
WalkCorpus generate_walks(const Graph& g, const WalkParams& params, std::uint64_t seed);

struct SgnsParams {
  std::size_t dim = 128;
  std::size_t window = 10;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  /// >1 enables unsynchronized parallel updates; results then depend on
  /// scheduling.
  std::size_t threads = 1;
};

struct SgnsResult {
  Embedding embedding;
  /// Mean pair loss on a fixed, seeded sample of (center, context, negatives)
  /// examples, evaluated after each epoch.
  std::vector<double> epoch_loss;
  /// Mean loss of the examples as they were trained on during each epoch.
  /// It lags the model and can rise while epoch_loss falls.
  std::vector<double> epoch_online_loss;
};

/// Skip-gram with negative sampling over (center, context) pairs inside a
/// randomly shrunk window. Negatives follow the unigram^0.75 node
/// distribution; the learning rate decays linearly to 1e-4 of its start.
/// Returns the center (input) vectors, which start uniform in
/// [-0.5/dim, 0.5/dim) drawn from derive_seed(seed, 0); output vectors start at
/// zero. Throws std::runtime_error on a non-finite loss.
SgnsResult sgns_train(const WalkCorpus& corpus, std::size_t node_count, const SgnsParams& params,
                      std::uint64_t seed);

/// Loss and gradients of one SGNS example:
///   -log s(in . pos) - sum_k log s(-in . neg_k).
struct SgnsPairGradient {
  double loss = 0.0;
  std::vector<double> input;
  std::vector<double> positive;
  std::vector<std::vector<double>> negatives;
};

SgnsPairGradient sgns_pair_gradient(std::span<const double> input, std::span<const double> positive,
                                    const std::vector<std::vector<double>>& negatives);

struct SvdParams {
  std::size_t dim = 128;
  std::size_t window = 10;  // T
  double negatives = 1.0;   // b
};

/// Dense factorization target
///   M = log(max(1, vol(G) / (b T) * sum_{r=1..T} (D^-1 A)^r D^-1)).
/// Zero-degree rows and columns are zero. Memory is |V|^2 doubles.
Eigen::MatrixXd deepwalk_matrix(const Graph& g, std::size_t window, double negatives);

struct SvdFactors {
  Eigen::MatrixXd left;          // U_K
  Eigen::VectorXd singular;      // Sigma_K, descending
  Eigen::MatrixXd right;         // V_K
  Embedding embedding;           // U_K sqrt(Sigma_K)
};

/// Rank-K SVD of the (symmetric) deepwalk matrix via a partial symmetric
/// eigensolve. Column signs are canonical: the largest-magnitude entry of
/// each embedding column is positive. Throws std::invalid_argument when the
/// graph is edgeless, dim >= |V|, or dim exceeds the numerical rank.
SvdFactors svd_deepwalk_factors(const Graph& g, const SvdParams& params);
Embedding svd_deepwalk(const Graph& g, const SvdParams& params);

/// Cosine similarity; 0 when either vector is zero. Throws on size mismatch.
double cosine(std::span<const double> a, std::span<const double> b);
double cosine(const Embedding& z, NodeId u, NodeId v);

enum class EmbedderKind { Skipgram, Svd, Node2Vec };

std::string to_string(EmbedderKind kind);
EmbedderKind embedder_kind_from_string(const std::string& text);

/// Which embedder to run and its hyperparameters. Skipgram ignores walks.p and
/// walks.q (always 1).
struct EmbedderConfig {
  EmbedderKind kind = EmbedderKind::Skipgram;
  WalkParams walks;
  SgnsParams sgns;
  SvdParams svd;
};

/// True when the embedder output does not depend on the seed.
bool is_deterministic(const EmbedderConfig& config);

Embedding embed(const Graph& g, const EmbedderConfig& config, std::uint64_t seed);

}  // namespace netpoison
