#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <lapacke.h>

#include "netpoison/embeddings.hpp"

namespace netpoison {

namespace {

struct Eigenpairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

void check_lapack(lapack_int info, const char* routine) {
  if (info != 0) {
    throw std::runtime_error(std::string("svd deepwalk: ") + routine + " failed with info " +
                             std::to_string(info));
  }
}

// The `count` eigenpairs of symmetric m with largest |lambda|, ordered by
// |lambda| descending. One tridiagonal reduction, MRRR on the two spectrum
// ends, then a single back-transformation.
Eigenpairs top_magnitude_eigenpairs(Eigen::MatrixXd m, std::size_t count) {
  const auto n = static_cast<lapack_int>(m.rows());
  std::vector<double> diag(n);
  std::vector<double> offdiag(std::max<lapack_int>(n, 1));
  std::vector<double> tau(std::max<lapack_int>(n - 1, 1));
  check_lapack(LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'L', n, m.data(), n, diag.data(), offdiag.data(), tau.data()),
               "dsytrd");

  struct Pair {
    double value;
    std::vector<double> vector;
  };
  std::vector<Pair> found;
  auto solve_range = [&](lapack_int il, lapack_int iu) {
    std::vector<double> d = diag;
    std::vector<double> e = offdiag;
    const lapack_int want = iu - il + 1;
    std::vector<double> w(n);
    Eigen::MatrixXd z(n, want);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(want));
    lapack_int got = 0;
    lapack_logical tryrac = 1;
    check_lapack(LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0, il, iu, &got,
                                w.data(), z.data(), n, want, support.data(), &tryrac),
                 "dstemr");
    for (lapack_int k = 0; k < got; ++k) {
      found.push_back({w[k], std::vector<double>(z.col(k).data(), z.col(k).data() + n)});
    }
  };
  const auto k = static_cast<lapack_int>(count);
  if (2 * k >= n) {
    solve_range(1, n);
  } else {
    solve_range(1, k);
    solve_range(n - k + 1, n);
  }
  std::stable_sort(found.begin(), found.end(), [](const Pair& a, const Pair& b) {
    if (std::abs(a.value) != std::abs(b.value)) return std::abs(a.value) > std::abs(b.value);
    return a.value > b.value;
  });
  found.resize(count);

  Eigenpairs out;
  out.values.resize(k);
  out.vectors.resize(n, k);
  for (lapack_int c = 0; c < k; ++c) {
    out.values(c) = found[c].value;
    out.vectors.col(c) = Eigen::Map<const Eigen::VectorXd>(found[c].vector.data(), n);
  }
  if (n > 1) {
    check_lapack(LAPACKE_dormtr(LAPACK_COL_MAJOR, 'L', 'L', 'N', n, k, m.data(), n, tau.data(),
                                out.vectors.data(), n),
                 "dormtr");
  }
  return out;
}

}  // namespace

Eigen::MatrixXd deepwalk_matrix(const Graph& g, std::size_t window, double negatives) {
  if (g.edge_count() == 0) throw std::invalid_argument("svd deepwalk: graph has no edges");
  if (window == 0) throw std::invalid_argument("svd deepwalk: window must be positive");
  if (!(negatives > 0.0)) throw std::invalid_argument("svd deepwalk: negatives must be positive");
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::VectorXd inv_degree(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto d = g.degree(static_cast<NodeId>(i));
    inv_degree(i) = d > 0 ? 1.0 / static_cast<double>(d) : 0.0;
  }

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(2 * g.edge_count());
  for (NodeId u = 0; u < g.node_count(); ++u) {
    for (NodeId v : g.neighbors(u)) entries.emplace_back(u, v, inv_degree(u));
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> transition(n, n);
  transition.setFromTriplets(entries.begin(), entries.end());

  // power = P^r D^-1, accumulated into sum.
  Eigen::MatrixXd power = Eigen::MatrixXd::Zero(n, n);
  for (NodeId u = 0; u < g.node_count(); ++u) {
    for (NodeId v : g.neighbors(u)) power(u, v) = inv_degree(u) * inv_degree(v);
  }
  Eigen::MatrixXd sum = power;
  Eigen::MatrixXd next(n, n);
  for (std::size_t r = 2; r <= window; ++r) {
    next.noalias() = transition * power;
    power.swap(next);
    sum += power;
  }

  const double volume = 2.0 * static_cast<double>(g.edge_count());
  const double scale = volume / (negatives * static_cast<double>(window));
  return (sum * scale).array().max(1.0).log().matrix();
}

SvdFactors svd_deepwalk_factors(const Graph& g, const SvdParams& params) {
  if (params.dim == 0 || params.dim >= g.node_count()) {
    throw std::invalid_argument("svd deepwalk: dim must lie in 1..|V|-1");
  }
  const Eigen::MatrixXd target = deepwalk_matrix(g, params.window, params.negatives);
  const auto pairs = top_magnitude_eigenpairs(target, params.dim);

  const double largest = std::abs(pairs.values(0));
  const double tolerance =
      static_cast<double>(g.node_count()) * std::numeric_limits<double>::epsilon() * largest;
  const auto k = static_cast<Eigen::Index>(params.dim);
  if (!(largest > 0.0) || std::abs(pairs.values(k - 1)) <= tolerance) {
    throw std::invalid_argument("svd deepwalk: dim " + std::to_string(params.dim) +
                                " exceeds the numerical rank of the target matrix");
  }

  SvdFactors f;
  f.singular = pairs.values.cwiseAbs();
  f.left = pairs.vectors;
  f.right = pairs.vectors;
  for (Eigen::Index c = 0; c < k; ++c) {
    if (pairs.values(c) < 0.0) f.right.col(c) *= -1.0;
    Eigen::Index at = 0;
    f.left.col(c).cwiseAbs().maxCoeff(&at);
    if (f.left(at, c) < 0.0) {
      f.left.col(c) *= -1.0;
      f.right.col(c) *= -1.0;
    }
  }
  f.embedding.vectors = f.left * f.singular.cwiseSqrt().asDiagonal();
  return f;
}

Embedding svd_deepwalk(const Graph& g, const SvdParams& params) {
  return svd_deepwalk_factors(g, params).embedding;
}

}  // namespace netpoison
