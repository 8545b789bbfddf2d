#include "netpoison/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "netpoison/random.hpp"

namespace netpoison {

void write_embedding(std::ostream& out, const Embedding& z) {
  out << z.node_count() << ' ' << z.dim() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < z.vectors.rows(); ++i) {
    out << i;
    for (Eigen::Index d = 0; d < z.vectors.cols(); ++d) out << ' ' << z.vectors(i, d);
    out << '\n';
  }
}

void write_embedding(const std::filesystem::path& path, const Embedding& z) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_embedding(out, z);
}

Embedding read_embedding(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_number = 0;
  auto fail = [&](const std::string& why) {
    throw std::runtime_error(source + ":" + std::to_string(line_number) + ": " + why);
  };
  std::size_t rows = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream header(line);
    if (!(header >> rows >> dim)) fail("expected '|V| K' header");
    break;
  }
  if (dim == 0) fail("missing or empty header");
  Embedding z;
  z.vectors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  std::vector<char> seen(rows, 0);
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::size_t node = 0;
    if (!(fields >> node) || node >= rows) fail("bad node id");
    if (seen[node]) fail("duplicate node " + std::to_string(node));
    seen[node] = 1;
    for (std::size_t d = 0; d < dim; ++d) {
      double x = 0.0;
      if (!(fields >> x)) fail("expected " + std::to_string(dim) + " values");
      z.vectors(static_cast<Eigen::Index>(node), static_cast<Eigen::Index>(d)) = x;
    }
  }
  for (std::size_t i = 0; i < rows; ++i) {
    if (!seen[i]) throw std::runtime_error(source + ": no vector for node " + std::to_string(i));
  }
  return z;
}

Embedding read_embedding(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_embedding(in, path.string());
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine: dimension mismatch " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  }
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

double cosine(const Embedding& z, NodeId u, NodeId v) {
  const Eigen::RowVectorXd a = z.vectors.row(u);
  const Eigen::RowVectorXd b = z.vectors.row(v);
  return cosine(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
                std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
}

std::string to_string(EmbedderKind kind) {
  switch (kind) {
    case EmbedderKind::Skipgram: return "skipgram";
    case EmbedderKind::Svd: return "svd";
    case EmbedderKind::Node2Vec: return "node2vec";
  }
  return "skipgram";
}

EmbedderKind embedder_kind_from_string(const std::string& text) {
  if (text == "skipgram" || text == "deepwalk") return EmbedderKind::Skipgram;
  if (text == "svd" || text == "svd_deepwalk") return EmbedderKind::Svd;
  if (text == "node2vec") return EmbedderKind::Node2Vec;
  throw std::invalid_argument("unknown embedder '" + text + "' (skipgram, svd, node2vec)");
}

bool is_deterministic(const EmbedderConfig& config) { return config.kind == EmbedderKind::Svd; }

Embedding embed(const Graph& g, const EmbedderConfig& config, std::uint64_t seed) {
  switch (config.kind) {
    case EmbedderKind::Svd:
      return svd_deepwalk(g, config.svd);
    case EmbedderKind::Skipgram:
    case EmbedderKind::Node2Vec: {
      WalkParams walks = config.walks;
      if (config.kind == EmbedderKind::Skipgram) walks.p = walks.q = 1.0;
      const auto corpus = generate_walks(g, walks, derive_seed(seed, 0));
      return sgns_train(corpus, g.node_count(), config.sgns, derive_seed(seed, 1)).embedding;
    }
  }
  throw std::logic_error("unhandled embedder kind");
}

}  // namespace netpoison
