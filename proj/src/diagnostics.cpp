#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "netpoison/downstream.hpp"

namespace netpoison {

std::vector<double> edge_betweenness(const Graph& g) {
  const std::size_t n = g.node_count();
  const auto edges = g.edges();
  // Edge id of each adjacency entry.
  std::vector<std::vector<std::size_t>> edge_id(n);
  for (NodeId u = 0; u < n; ++u) {
    const auto nbrs = g.neighbors(u);
    edge_id[u].resize(nbrs.size());
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      const Edge e{std::min(u, nbrs[i]), std::max(u, nbrs[i])};
      edge_id[u][i] = static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), e) - edges.begin());
    }
  }

  std::vector<double> score(edges.size(), 0.0);
  std::vector<double> sigma(n);
  std::vector<double> delta(n);
  std::vector<std::int64_t> dist(n);
  std::vector<NodeId> order;
  order.reserve(n);
  for (NodeId s = 0; s < n; ++s) {
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    order.clear();
    sigma[s] = 1.0;
    dist[s] = 0;
    order.push_back(s);
    for (std::size_t head = 0; head < order.size(); ++head) {
      const NodeId v = order[head];
      for (NodeId w : g.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          order.push_back(w);
        }
        if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
      }
    }
    for (std::size_t idx = order.size(); idx-- > 0;) {
      const NodeId w = order[idx];
      const auto nbrs = g.neighbors(w);
      for (std::size_t i = 0; i < nbrs.size(); ++i) {
        const NodeId v = nbrs[i];
        if (dist[v] != dist[w] - 1) continue;
        const double c = sigma[v] / sigma[w] * (1.0 + delta[w]);
        score[edge_id[w][i]] += c;
        delta[v] += c;
      }
    }
  }
  // Every unordered pair was counted from both ends.
  for (double& x : score) x *= 0.5;
  return score;
}

double edge_betweenness_scale(std::size_t node_count) {
  if (node_count < 3) return 1.0;
  return static_cast<double>(node_count - 1) * static_cast<double>(node_count - 2);
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) return 0.0;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

namespace {

// Degree bins [0,1), [1,2), [2,4), ... keyed by bit width.
std::vector<HistogramBin> degree_histogram(const std::vector<std::size_t>& values, std::size_t max_value) {
  const std::size_t bins = static_cast<std::size_t>(std::bit_width(max_value)) + 1;
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lower = b == 0 ? 0.0 : std::ldexp(1.0, static_cast<int>(b) - 1);
    out[b].upper = std::ldexp(1.0, static_cast<int>(b));
  }
  for (std::size_t v : values) ++out[static_cast<std::size_t>(std::bit_width(v))].count;
  return out;
}

constexpr double kBinsPerDecade = 4.0;

int betweenness_bin(double x) {
  // Nudge so exact decade boundaries land in the upper bin.
  return static_cast<int>(std::floor(kBinsPerDecade * std::log10(x) + 1e-9));
}

// Quarter-decade bins spanning [lo, hi], plus a [0,0] bin when zeros occur.
std::vector<HistogramBin> betweenness_histogram(const std::vector<double>& values, int lo, int hi, bool zero_bin) {
  std::vector<HistogramBin> out;
  if (zero_bin) out.push_back({0.0, 0.0, 0});
  const std::size_t offset = out.size();
  for (int b = lo; b <= hi; ++b) {
    out.push_back({std::pow(10.0, b / kBinsPerDecade), std::pow(10.0, (b + 1) / kBinsPerDecade), 0});
  }
  for (double v : values) {
    if (v <= 0.0) {
      ++out[0].count;
    } else {
      ++out[offset + static_cast<std::size_t>(betweenness_bin(v) - lo)].count;
    }
  }
  return out;
}

}  // namespace

DiagnosticsReport adversarial_edge_diagnostics(const Graph& clean, const AttackResult& result) {
  DiagnosticsReport report;
  if (result.flips.empty()) return report;

  const auto edges = clean.edges();
  const auto raw = edge_betweenness(clean);
  const double scale = edge_betweenness_scale(clean.node_count());
  std::vector<char> adversarial_edge(edges.size(), 0);
  std::vector<char> adversarial_node(clean.node_count(), 0);

  std::vector<std::size_t> adv_degree;
  std::vector<double> adv_betweenness;
  for (const auto& sf : result.flips) {
    const auto& f = sf.flip;
    if (f.u >= clean.node_count() || f.v >= clean.node_count()) {
      throw std::invalid_argument("diagnostics: flip endpoint outside the clean graph");
    }
    FlipDiagnostic d{sf, clean.degree(f.u), clean.degree(f.v), std::nullopt};
    if (f.kind == FlipKind::Remove) {
      const Edge e{std::min(f.u, f.v), std::max(f.u, f.v)};
      const auto it = std::lower_bound(edges.begin(), edges.end(), e);
      if (it == edges.end() || *it != e) {
        throw std::invalid_argument("diagnostics: removed pair is not an edge of the clean graph");
      }
      const auto id = static_cast<std::size_t>(it - edges.begin());
      adversarial_edge[id] = 1;
      d.betweenness = raw[id] / scale;
      adv_betweenness.push_back(*d.betweenness);
    }
    adversarial_node[f.u] = 1;
    adversarial_node[f.v] = 1;
    report.flips.push_back(d);
  }
  for (NodeId v = 0; v < clean.node_count(); ++v) {
    if (adversarial_node[v]) adv_degree.push_back(clean.degree(v));
  }

  std::vector<std::size_t> other_degree;
  for (NodeId v = 0; v < clean.node_count(); ++v) {
    if (!adversarial_node[v]) other_degree.push_back(clean.degree(v));
  }
  std::vector<double> other_betweenness;
  for (std::size_t id = 0; id < edges.size(); ++id) {
    if (!adversarial_edge[id]) other_betweenness.push_back(raw[id] / scale);
  }

  std::size_t max_degree = 0;
  for (NodeId v = 0; v < clean.node_count(); ++v) max_degree = std::max(max_degree, clean.degree(v));
  report.adversarial_degree = degree_histogram(adv_degree, max_degree);
  report.other_degree = degree_histogram(other_degree, max_degree);

  int lo = std::numeric_limits<int>::max();
  int hi = std::numeric_limits<int>::min();
  bool zeros = false;
  for (const auto* list : {&adv_betweenness, &other_betweenness}) {
    for (double v : *list) {
      if (v <= 0.0) {
        zeros = true;
      } else {
        lo = std::min(lo, betweenness_bin(v));
        hi = std::max(hi, betweenness_bin(v));
      }
    }
  }
  if (lo <= hi || zeros) {
    if (lo > hi) lo = hi = 0;
    report.adversarial_betweenness = betweenness_histogram(adv_betweenness, lo, hi, zeros);
    report.other_betweenness = betweenness_histogram(other_betweenness, lo, hi, zeros);
  }
  if (!adv_betweenness.empty()) report.ks_betweenness = ks_statistic(adv_betweenness, other_betweenness);
  return report;
}

void write_diagnostics_csv(std::ostream& flips_out, std::ostream& histogram_out, const DiagnosticsReport& report) {
  flips_out << "# betweenness: " << kBetweennessConvention << '\n';
  flips_out << "u,v,kind,importance,degree_u,degree_v,betweenness\n";
  flips_out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& d : report.flips) {
    flips_out << d.flip.flip.u << ',' << d.flip.flip.v << ',' << to_string(d.flip.flip.kind) << ','
              << d.flip.importance << ',' << d.degree_u << ',' << d.degree_v << ',';
    if (d.betweenness) flips_out << *d.betweenness;
    flips_out << '\n';
  }

  histogram_out << "# betweenness: " << kBetweennessConvention << '\n';
  if (report.ks_betweenness) {
    histogram_out << std::setprecision(std::numeric_limits<double>::max_digits10) << "# ks_betweenness: "
                  << *report.ks_betweenness << '\n';
  }
  histogram_out << "quantity,group,lower,upper,count\n";
  histogram_out << std::setprecision(std::numeric_limits<double>::max_digits10);
  auto emit = [&](const char* quantity, const char* group, const std::vector<HistogramBin>& bins) {
    for (const auto& b : bins) {
      histogram_out << quantity << ',' << group << ',' << b.lower << ',' << b.upper << ',' << b.count << '\n';
    }
  };
  emit("degree", "adversarial", report.adversarial_degree);
  emit("degree", "other", report.other_degree);
  emit("betweenness", "adversarial", report.adversarial_betweenness);
  emit("betweenness", "other", report.other_betweenness);
}

}  // namespace netpoison
