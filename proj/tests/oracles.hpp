#pragma once

// Independent reference computations used by the unit and acceptance tests.
// They share no code with the library beyond the Graph container.

#include <Eigen/Dense>
#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <vector>

#include "netpoison/attack.hpp"
#include "netpoison/graph.hpp"
#include "netpoison/random.hpp"

namespace oracle {

using netpoison::Edge;
using netpoison::FlipCandidate;
using netpoison::FlipKind;
using netpoison::Graph;
using netpoison::LabelAssignment;
using netpoison::NodeId;
using Rational = boost::multiprecision::cpp_rational;

inline Eigen::MatrixXd dense_adjacency(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) a(e.u, e.v) = a(e.v, e.u) = 1.0;
  return a;
}

inline Eigen::MatrixXd one_hot(const LabelAssignment& labels) {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()),
                                            static_cast<Eigen::Index>(labels.class_count()));
  for (std::size_t i = 0; i < labels.size(); ++i) f(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  return f;
}

inline Eigen::MatrixXd dense_features(const netpoison::FeatureMatrix& f) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(f.rows()), static_cast<Eigen::Index>(f.cols()));
  for (std::size_t i = 0; i < f.rows(); ++i) {
    for (std::size_t d = 0; d < f.cols(); ++d) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = f.at(i, d);
  }
  return out;
}

/// || diag(rowsum(A F))^-1 rowsum((A F) o F) ||_2 with 0 for empty rows.
inline double dense_theta(const Eigen::MatrixXd& a, const Eigen::MatrixXd& f) {
  const Eigen::MatrixXd af = a * f;
  const Eigen::VectorXd mass = af.rowwise().sum();
  const Eigen::VectorXd same = af.cwiseProduct(f).rowwise().sum();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(mass.size());
  for (Eigen::Index i = 0; i < mass.size(); ++i) {
    if (mass(i) != 0.0) r(i) = same(i) / mass(i);
  }
  return r.norm();
}

inline Eigen::MatrixXd flipped(Eigen::MatrixXd a, const FlipCandidate& f) {
  const double value = f.kind == FlipKind::Add ? 1.0 : 0.0;
  a(f.u, f.v) = a(f.v, f.u) = value;
  return a;
}

/// Exact theta^2 for one-hot labels: sum_i (same-label neighbours / degree)^2.
inline Rational exact_theta_squared(const Graph& g, const LabelAssignment& labels, const FlipCandidate* f = nullptr) {
  std::vector<long> degree(g.node_count());
  std::vector<long> same(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) {
    for (NodeId v : g.neighbors(u)) {
      ++degree[u];
      if (labels[u] == labels[v]) ++same[u];
    }
  }
  if (f) {
    const long sign = f->kind == FlipKind::Add ? 1 : -1;
    degree[f->u] += sign;
    degree[f->v] += sign;
    if (labels[f->u] == labels[f->v]) {
      same[f->u] += sign;
      same[f->v] += sign;
    }
  }
  Rational total = 0;
  for (std::size_t i = 0; i < degree.size(); ++i) {
    if (degree[i] > 0) {
      const Rational r(same[i], degree[i]);
      total += r * r;
    }
  }
  return total;
}

/// The `budget` best candidates by exact post-flip theta (smaller is better),
/// ties by (kind, u, v).
inline std::vector<FlipCandidate> exhaustive_top(const Graph& g, const LabelAssignment& labels,
                                                 const std::vector<FlipCandidate>& candidates, std::size_t budget) {
  std::vector<std::pair<Rational, FlipCandidate>> scored;
  for (const auto& f : candidates) scored.emplace_back(exact_theta_squared(g, labels, &f), f);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
  });
  std::vector<FlipCandidate> out;
  for (std::size_t i = 0; i < std::min(budget, scored.size()); ++i) out.push_back(scored[i].second);
  return out;
}

inline Graph random_graph(std::size_t n, double p, netpoison::Rng& rng) {
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (rng.bernoulli(p)) edges.push_back({u, v});
    }
  }
  return netpoison::build_graph(n, edges);
}

inline LabelAssignment random_labels(std::size_t n, std::size_t classes, netpoison::Rng& rng) {
  std::vector<netpoison::Label> values(n);
  for (auto& v : values) v = static_cast<netpoison::Label>(rng.below(classes));
  return LabelAssignment(std::move(values), classes);
}

inline Graph cliques(std::size_t count, std::size_t size) {
  std::vector<Edge> edges;
  for (std::size_t c = 0; c < count; ++c) {
    for (std::size_t i = 0; i < size; ++i) {
      for (std::size_t j = i + 1; j < size; ++j) {
        edges.push_back({static_cast<NodeId>(c * size + i), static_cast<NodeId>(c * size + j)});
      }
    }
  }
  return netpoison::build_graph(count * size, edges);
}

inline LabelAssignment block_labels(std::size_t count, std::size_t size) {
  std::vector<netpoison::Label> values(count * size);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<netpoison::Label>(i / size);
  return LabelAssignment(std::move(values), count);
}

/// Two-block planted partition.
inline Graph planted_partition(std::size_t n, double p_in, double p_out, netpoison::Rng& rng) {
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      const bool same = (u < n / 2) == (v < n / 2);
      if (rng.bernoulli(same ? p_in : p_out)) edges.push_back({u, v});
    }
  }
  return netpoison::build_graph(n, edges);
}

}  // namespace oracle
