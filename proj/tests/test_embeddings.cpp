#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>
#include <sstream>

#include "netpoison/downstream.hpp"
#include "netpoison/embeddings.hpp"
#include "oracles.hpp"

using namespace netpoison;

namespace {

struct CosineSplit {
  double intra = 0.0;
  double inter = 0.0;
};

CosineSplit block_cosines(const Embedding& z, const LabelAssignment& labels) {
  double intra = 0.0, inter = 0.0;
  std::size_t n_intra = 0, n_inter = 0;
  for (NodeId u = 0; u < z.node_count(); ++u) {
    for (NodeId v = u + 1; v < z.node_count(); ++v) {
      const double c = cosine(z, u, v);
      if (labels[u] == labels[v]) {
        intra += c;
        ++n_intra;
      } else {
        inter += c;
        ++n_inter;
      }
    }
  }
  return {intra / static_cast<double>(n_intra), inter / static_cast<double>(n_inter)};
}

Graph path3() {
  const std::vector<Edge> e{{0, 1}, {1, 2}};
  return build_graph(3, e);
}

double max_relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-8});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
  }
  return worst;
}

}  // namespace

TEST_SUITE("embeddings") {
  TEST_CASE("walks follow edges, start at their root and stop at isolated nodes") {
    Rng rng(50);
    for (int trial = 0; trial < 30; ++trial) {
      const Graph g = oracle::random_graph(2 + rng.below(30), 0.1 + 0.3 * rng.uniform(), rng);
      WalkParams params;
      params.walks_per_node = 3;
      params.walk_length = 1 + rng.below(20);
      params.p = 0.25 + 4.0 * rng.uniform();
      params.q = 0.25 + 4.0 * rng.uniform();
      const auto corpus = generate_walks(g, params, rng.next());
      REQUIRE(corpus.walks.size() == 3 * g.node_count());
      std::vector<std::size_t> rooted(g.node_count(), 0);
      for (const auto& walk : corpus.walks) {
        REQUIRE_FALSE(walk.empty());
        ++rooted[walk.front()];
        if (g.degree(walk.front()) == 0) {
          CHECK(walk.size() == 1);
        } else {
          CHECK(walk.size() == params.walk_length);
        }
        for (std::size_t i = 1; i < walk.size(); ++i) REQUIRE(g.has_edge(walk[i - 1], walk[i]));
      }
      for (std::size_t count : rooted) CHECK(count == 3);
    }
    WalkParams bad;
    bad.walk_length = 0;
    CHECK_THROWS_AS(generate_walks(path3(), bad, 0), std::invalid_argument);
    bad = WalkParams{};
    bad.q = 0.0;
    CHECK_THROWS_AS(generate_walks(path3(), bad, 0), std::invalid_argument);
  }

  TEST_CASE("walks are deterministic in the seed") {
    Rng rng(51);
    const Graph g = oracle::random_graph(30, 0.2, rng);
    WalkParams params;
    params.p = 0.5;
    params.q = 2.0;
    CHECK(generate_walks(g, params, 4).walks == generate_walks(g, params, 4).walks);
    CHECK(generate_walks(g, params, 4).walks != generate_walks(g, params, 5).walks);
  }

  TEST_CASE("first step from the middle of a path is fair") {
    WalkParams params;
    params.walks_per_node = 10000;
    params.walk_length = 2;
    const auto corpus = generate_walks(path3(), params, 8);
    std::size_t from_middle = 0, to_zero = 0;
    for (const auto& walk : corpus.walks) {
      if (walk[0] != 1) continue;
      ++from_middle;
      to_zero += walk[1] == 0;
    }
    REQUIRE(from_middle == 10000);
    CHECK(std::abs(static_cast<double>(to_zero) / 10000.0 - 0.5) <= 0.05);
  }

  TEST_CASE("in-out bias shifts second steps between local and outward moves") {
    // 0-1-2 triangle plus pendant 3 on node 1. After 0 -> 1, node 2 is a
    // neighbor of the previous node (weight 1), 0 is a return (1/p) and 3 is
    // outward (1/q).
    const std::vector<Edge> e{{0, 1}, {1, 2}, {0, 2}, {1, 3}};
    const Graph g = build_graph(4, e);
    auto local_share = [&](double q) {
      WalkParams params;
      params.walks_per_node = 20000;
      params.walk_length = 3;
      params.q = q;
      std::size_t through = 0, local = 0, outward = 0;
      for (const auto& walk : generate_walks(g, params, 12).walks) {
        if (walk[0] != 0 || walk[1] != 1) continue;
        ++through;
        local += walk[2] == 2;
        outward += walk[2] == 3;
      }
      return std::pair{static_cast<double>(local) / static_cast<double>(through),
                       static_cast<double>(outward) / static_cast<double>(through)};
    };
    const auto [local_low_q, outward_low_q] = local_share(0.25);
    const auto [local_high_q, outward_high_q] = local_share(4.0);
    CHECK(local_high_q > local_low_q);
    CHECK(outward_high_q < outward_low_q);
    // Exact transition probabilities: q=4 -> local 1/2.25; q=0.25 -> local 1/6, outward 4/6.
    CHECK(std::abs(local_high_q - 1.0 / 2.25) < 0.03);
    CHECK(std::abs(local_low_q - 1.0 / 6.0) < 0.03);
    CHECK(std::abs(outward_low_q - 4.0 / 6.0) < 0.03);
  }

  TEST_CASE("sgns separates disjoint cliques") {
    const Graph g = oracle::cliques(2, 10);
    const auto labels = oracle::block_labels(2, 10);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto corpus = generate_walks(g, WalkParams{}, seed);
      SgnsParams params;
      params.dim = 16;
      const auto r = sgns_train(corpus, 20, params, seed);
      CHECK(r.embedding.all_finite());
      const auto split = block_cosines(r.embedding, labels);
      CHECK(split.intra > split.inter);
    }
  }

  TEST_CASE("sgns pair gradient matches central differences") {
    Rng rng(52);
    const double h = 1e-4;
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t dim = 1 + rng.below(12);
      auto draw = [&] {
        std::vector<double> v(dim);
        for (auto& x : v) x = 2.0 * rng.uniform() - 1.0;
        return v;
      };
      auto input = draw();
      auto positive = draw();
      std::vector<std::vector<double>> negatives(1 + rng.below(5));
      for (auto& n : negatives) n = draw();
      const auto g = sgns_pair_gradient(input, positive, negatives);

      auto numeric = [&](std::vector<double>& target) {
        std::vector<double> out(dim);
        for (std::size_t d = 0; d < dim; ++d) {
          const double keep = target[d];
          target[d] = keep + h;
          const double up = sgns_pair_gradient(input, positive, negatives).loss;
          target[d] = keep - h;
          const double down = sgns_pair_gradient(input, positive, negatives).loss;
          target[d] = keep;
          out[d] = (up - down) / (2.0 * h);
        }
        return out;
      };
      worst = std::max(worst, max_relative_error(g.input, numeric(input)));
      worst = std::max(worst, max_relative_error(g.positive, numeric(positive)));
      for (std::size_t k = 0; k < negatives.size(); ++k) {
        worst = std::max(worst, max_relative_error(g.negatives[k], numeric(negatives[k])));
      }
    }
    CHECK(worst < 1e-4);
  }

  TEST_CASE("zero epochs returns the initialization") {
    const Graph g = oracle::cliques(2, 5);
    const auto corpus = generate_walks(g, WalkParams{}, 1);
    SgnsParams params;
    params.dim = 4;
    params.epochs = 0;
    const auto r = sgns_train(corpus, 10, params, 77);
    CHECK(r.epoch_loss.empty());
    Rng init(derive_seed(77, 0));
    for (Eigen::Index v = 0; v < 10; ++v) {
      for (Eigen::Index d = 0; d < 4; ++d) {
        const auto expected = static_cast<float>((init.uniform() - 0.5) / 4.0);
        CHECK(r.embedding.vectors(v, d) == static_cast<double>(expected));
      }
    }
  }

  TEST_CASE("sgns loss decreases epoch over epoch") {
    Rng rng(53);
    const Graph g = oracle::planted_partition(60, 0.3, 0.02, rng);
    const auto corpus = generate_walks(g, WalkParams{}, 3);
    SgnsParams params;
    params.dim = 16;
    params.epochs = 5;
    const auto r = sgns_train(corpus, 60, params, 3);
    REQUIRE(r.epoch_loss.size() == 5);
    CHECK(r.epoch_online_loss.size() == 5);
    for (std::size_t e = 1; e < r.epoch_loss.size(); ++e) CHECK(r.epoch_loss[e] < r.epoch_loss[e - 1]);
  }

  TEST_CASE("sgns failures") {
    const Graph g = oracle::cliques(2, 5);
    const auto corpus = generate_walks(g, WalkParams{}, 1);
    SgnsParams params;
    params.dim = 4;
    params.learning_rate = 1e30;
    try {
      sgns_train(corpus, 10, params, 1);
      FAIL("expected divergence");
    } catch (const std::runtime_error& e) {
      const std::string what = e.what();
      CHECK(what.find("epoch 1") != std::string::npos);
      CHECK(what.find("learning rate") != std::string::npos);
    }
    CHECK_THROWS_AS(sgns_train(WalkCorpus{}, 10, SgnsParams{}, 1), std::invalid_argument);
  }

  TEST_CASE("svd deepwalk is bit-for-bit deterministic") {
    Rng rng(54);
    const Graph g = oracle::planted_partition(60, 0.3, 0.05, rng);
    SvdParams params;
    params.dim = 8;
    const auto a = svd_deepwalk(g, params);
    const auto b = svd_deepwalk(g, params);
    CHECK(a.vectors == b.vectors);
    CHECK(a.all_finite());
    for (Eigen::Index c = 0; c < a.vectors.cols(); ++c) {
      Eigen::Index at = 0;
      a.vectors.col(c).cwiseAbs().maxCoeff(&at);
      CHECK(a.vectors(at, c) > 0.0);
    }
  }

  TEST_CASE("deepwalk matrix matches the dense formula") {
    Rng rng(55);
    for (int trial = 0; trial < 10; ++trial) {
      Graph g = oracle::random_graph(8 + rng.below(15), 0.3, rng);
      if (g.edge_count() == 0) continue;
      const std::size_t t = 1 + rng.below(6);
      const double b = 0.5 + rng.uniform();
      const auto a = oracle::dense_adjacency(g);
      const auto n = a.rows();
      Eigen::MatrixXd dinv = Eigen::MatrixXd::Zero(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = a.row(i).sum();
        if (d > 0) dinv(i, i) = 1.0 / d;
      }
      const Eigen::MatrixXd p = dinv * a;
      Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
      Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
      for (std::size_t r = 0; r < t; ++r) {
        power = power * p;
        sum += power;
      }
      const double vol = a.sum();
      Eigen::MatrixXd expected = sum * dinv * (vol / (b * static_cast<double>(t)));
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) expected(i, j) = std::log(std::max(1.0, expected(i, j)));
      }
      CHECK((deepwalk_matrix(g, t, b) - expected).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  TEST_CASE("svd truncation identity") {
    Rng rng(56);
    for (int trial = 0; trial < 5; ++trial) {
      const Graph g = oracle::planted_partition(40, 0.4, 0.05, rng);
      const Eigen::MatrixXd m = deepwalk_matrix(g, 10, 1.0);
      const Eigen::JacobiSVD<Eigen::MatrixXd> full(m);
      const Eigen::VectorXd sigma = full.singularValues();
      for (std::size_t k : {2, 5, 10}) {
        SvdParams params;
        params.dim = k;
        const auto f = svd_deepwalk_factors(g, params);
        const auto kk = static_cast<Eigen::Index>(k);
        CHECK((f.singular - sigma.head(kk)).cwiseAbs().maxCoeff() < 1e-9 * sigma(0));
        const Eigen::MatrixXd approx = f.left * f.singular.asDiagonal() * f.right.transpose();
        const double residual = (approx - m).norm();
        const double tail = sigma.tail(sigma.size() - kk).norm();
        CHECK(std::abs(residual - tail) < 1e-8 * m.norm());
        CHECK(residual <= m.norm() * tail / sigma.norm() + 1e-8 * m.norm());
        const Eigen::MatrixXd z = f.left * f.singular.cwiseSqrt().asDiagonal();
        for (Eigen::Index c = 0; c < kk; ++c) {
          const double sign = z.col(c).dot(f.embedding.vectors.col(c)) >= 0 ? 1.0 : -1.0;
          CHECK((sign * z.col(c) - f.embedding.vectors.col(c)).cwiseAbs().maxCoeff() < 1e-12);
        }
      }
    }
  }

  TEST_CASE("svd deepwalk rejects impossible dimensions") {
    const Graph cliques = oracle::cliques(2, 5);
    SvdParams params;
    params.dim = 10;
    CHECK_THROWS_AS(svd_deepwalk(cliques, params), std::invalid_argument);
    params.dim = 0;
    CHECK_THROWS_AS(svd_deepwalk(cliques, params), std::invalid_argument);
    // A triangle plus three isolated nodes has rank at most 3.
    const std::vector<Edge> e{{0, 1}, {1, 2}, {0, 2}};
    params.dim = 4;
    CHECK_THROWS_AS(svd_deepwalk(build_graph(6, e), params), std::invalid_argument);
    CHECK_THROWS_AS(svd_deepwalk(Graph(5), SvdParams{2, 10, 1.0}), std::invalid_argument);
  }

  TEST_CASE("svd deepwalk separates disjoint cliques") {
    const Graph g = oracle::cliques(2, 10);
    SvdParams params;
    params.dim = 4;
    const auto split = block_cosines(svd_deepwalk(g, params), oracle::block_labels(2, 10));
    CHECK(split.intra > split.inter);
  }

  TEST_CASE("cosine examples") {
    const std::vector<double> a{1.0, 2.0, 3.0};
    CHECK(cosine(a, a) == doctest::Approx(1.0));
    CHECK(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
    CHECK(cosine(std::vector<double>{1, 1}, std::vector<double>{1, 0}) == doctest::Approx(std::sqrt(2.0) / 2.0));
    CHECK(cosine(std::vector<double>{0, 0}, std::vector<double>{1, 0}) == 0.0);
    CHECK_THROWS_AS(cosine(std::vector<double>{1, 0}, std::vector<double>{1, 0, 0}), std::invalid_argument);
    Rng rng(57);
    for (int i = 0; i < 100; ++i) {
      std::vector<double> x(5), y(5);
      for (auto& v : x) v = rng.uniform() - 0.5;
      for (auto& v : y) v = rng.uniform() - 0.5;
      const double c = cosine(x, y);
      CHECK(c >= -1.0);
      CHECK(c <= 1.0);
    }
  }

  TEST_CASE("embedding files round-trip") {
    Embedding z;
    z.vectors = Eigen::MatrixXd::Random(5, 3);
    std::stringstream buffer;
    write_embedding(buffer, z);
    const auto back = read_embedding(buffer);
    CHECK(back.vectors == z.vectors);

    std::istringstream truncated("2 2\n0 1 2\n");
    CHECK_THROWS(read_embedding(truncated));
  }

  TEST_CASE("every embedder clears the planted-partition quality floor") {
    Rng rng(58);
    const Graph g = oracle::planted_partition(100, 0.3, 0.02, rng);
    const auto labels = oracle::block_labels(2, 50);
    EvalOptions options;
    options.runs = 3;
    options.train_fraction = 0.1;
    for (auto kind : {EmbedderKind::Skipgram, EmbedderKind::Svd, EmbedderKind::Node2Vec}) {
      CAPTURE(to_string(kind));
      EmbedderConfig config;
      config.kind = kind;
      config.sgns.dim = 32;
      config.svd.dim = 32;
      if (kind == EmbedderKind::Node2Vec) {
        config.walks.p = 1.0;
        config.walks.q = 0.5;
      }
      CHECK(node_classification_eval(g, labels, config, options, 5).mean >= 0.9);
    }
  }
}
