// Acceptance criteria, one PASS / FAIL / SKIP line each.
//
//   netpoison_acceptance                 run every criterion
//   netpoison_acceptance --criterion N   run one; exit 0 pass, 1 fail, 77 skip
//
// Dataset criteria read <name>.edges / <name>.labels from $NETPOISON_DATA_DIR
// (default: the data/ directory of the source tree) and skip when absent.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "netpoison/experiment.hpp"
#include "netpoison/graph_io.hpp"
#include "oracles.hpp"

using namespace netpoison;

namespace {

// Tolerances and bands.
constexpr double kOracleTolerance = 1e-10;
constexpr double kCriterion1Seconds = 30.0;
constexpr double kCriterion2Seconds = 10.0;
constexpr double kDatasetSeconds = 300.0;
constexpr double kCoraCleanLow = 0.78;
constexpr double kCoraCleanHigh = 0.86;
constexpr double kCoraVikingDrop = 0.06;
constexpr double kCoraVikingOverRandom = 0.02;
constexpr double kPolblogsCleanFloor = 0.92;
constexpr double kPolblogsVikingDrop = 0.08;
constexpr double kPolblogsSurrogateGap = 0.03;
constexpr double kCiteseerVikingDrop = 0.12;
constexpr double kBudgetNoise = 0.02;
constexpr double kLfrVikingDrop = 0.04;
constexpr double kKsCeiling = 0.2;
constexpr double kLogregGradientTolerance = 1e-5;
constexpr double kSgnsGradientTolerance = 1e-4;

constexpr int kSkip = 77;

enum class Outcome { Pass, Fail, Skip };

struct Verdict {
  Outcome outcome = Outcome::Pass;
  std::string detail;
};

std::string fixed(double x, int digits = 4) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << x;
  return out.str();
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("NETPOISON_DATA_DIR")) return env;
  return NETPOISON_ACCEPTANCE_DATA;
}

std::optional<LoadedData> load_named(const std::string& name, std::string& why) {
  const auto edges = data_dir() / (name + ".edges");
  const auto labels = data_dir() / (name + ".labels");
  if (!std::filesystem::exists(edges) || !std::filesystem::exists(labels)) {
    why = name + " dataset not found (" + edges.string() + ", " + labels.string() + ")";
    return std::nullopt;
  }
  auto d = load_dataset(edges, labels);
  return LoadedData{std::move(d.graph), std::move(d.labels), std::move(d.original_ids)};
}

ExperimentConfig dataset_config(const std::string& name, AttackKind attack, EmbedderKind embedder,
                                std::size_t runs, std::optional<std::size_t> budget = std::nullopt) {
  ExperimentConfig c;
  c.dataset.source = DatasetSource::Files;
  c.dataset.name = name;
  c.attack = attack;
  c.mode = CandidateMode::Combined;
  c.budget = budget;
  c.embedder.kind = embedder;
  c.eval.runs = runs;
  c.seed = 2024;
  return c;
}

double nc_mean(const ExperimentConfig& c, const LoadedData& data) {
  return run_experiment(c, data).rows.at(0).summary.mean;
}

std::vector<FlipCandidate> scored_flips(const AttackResult& r) {
  std::vector<FlipCandidate> out;
  for (const auto& s : r.flips) out.push_back(s.flip);
  return out;
}

// 1. Incremental importance equals C - theta(dense recompute) for every candidate.
Verdict criterion_oracle() {
  Rng rng(1001);
  double worst = 0.0;
  std::size_t checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(99);
    const std::size_t classes = 1 + rng.below(6);
    const double p = std::min(1.0, (1.0 + 8.0 * rng.uniform()) / static_cast<double>(n));
    const Graph g = oracle::random_graph(n, p, rng);
    const auto labels = oracle::random_labels(n, classes, rng);
    const auto cs = build_candidates(g, CandidateMode::Combined, 2.0, rng.next());
    const auto state = homophily_state(g, labels);
    const auto a = oracle::dense_adjacency(g);
    const auto f = oracle::one_hot(labels);
    const double c = oracle::dense_theta(a, f);
    for (const auto& flip : cs.candidates) {
      const double expected = c - oracle::dense_theta(oracle::flipped(a, flip), f);
      worst = std::max(worst, std::abs(flip_importance(state, g, flip) - expected));
      ++checked;
    }
  }
  const bool ok = worst < kOracleTolerance;
  std::ostringstream detail;
  detail << checked << " candidates, max |delta| " << std::scientific << std::setprecision(2) << worst;
  return {ok ? Outcome::Pass : Outcome::Fail, detail.str()};
}

// 2. Selected b=3 flips equal the exact top-3.
Verdict criterion_greedy() {
  Rng rng(1002);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng.below(38);
    const Graph g = oracle::random_graph(n, 0.05 + 0.3 * rng.uniform(), rng);
    const auto labels = oracle::random_labels(n, 1 + rng.below(5), rng);
    const auto cs = build_candidates(g, CandidateMode::Combined, 2.0, rng.next());
    const auto result = viking_attack(g, labels, 3, cs);
    if (scored_flips(result) != oracle::exhaustive_top(g, labels, cs.candidates, 3)) ++mismatches;
  }
  return {mismatches == 0 ? Outcome::Pass : Outcome::Fail, std::to_string(mismatches) + "/50 graphs mismatched"};
}

// 3. No originally non-isolated node becomes isolated.
Verdict criterion_safety() {
  Rng rng(1003);
  std::size_t attacks = 0, violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(60);
    const Graph g = oracle::random_graph(n, std::min(1.0, (0.5 + 4.0 * rng.uniform()) / static_cast<double>(n)), rng);
    const auto labels = oracle::random_labels(n, 1 + rng.below(4), rng);
    for (auto mode : {CandidateMode::Remove, CandidateMode::Combined}) {
      const auto cs = build_candidates(g, mode, 2.0, rng.next());
      const std::size_t size = cs.candidates.size();
      for (std::size_t budget : {std::size_t{0}, std::size_t{1}, size / 2, size, size + 5}) {
        const auto result = viking_attack(g, labels, budget, cs);
        ++attacks;
        for (NodeId u = 0; u < n; ++u) {
          if (g.degree(u) > 0 && result.poisoned.degree(u) == 0) {
            ++violations;
            break;
          }
        }
      }
    }
  }
  return {violations == 0 ? Outcome::Pass : Outcome::Fail,
          std::to_string(attacks) + " attacks, " + std::to_string(violations) + " isolated a node"};
}

// 4. Cora reproduction band (SVD DeepWalk).
Verdict criterion_cora() {
  std::string why;
  const auto data = load_named("cora", why);
  if (!data) return {Outcome::Skip, why};
  const double clean = nc_mean(dataset_config("cora", AttackKind::Clean, EmbedderKind::Svd, 10), *data);
  const double random = nc_mean(dataset_config("cora", AttackKind::Random, EmbedderKind::Svd, 10, 1000), *data);
  const double viking = nc_mean(dataset_config("cora", AttackKind::Viking, EmbedderKind::Svd, 10, 1000), *data);
  const bool ok = clean >= kCoraCleanLow && clean <= kCoraCleanHigh && clean - viking >= kCoraVikingDrop &&
                  random - viking >= kCoraVikingOverRandom;
  return {ok ? Outcome::Pass : Outcome::Fail,
          "clean " + fixed(clean) + ", random " + fixed(random) + ", viking " + fixed(viking)};
}

// 5. PolBlogs band (skipgram DeepWalk).
Verdict criterion_polblogs() {
  std::string why;
  const auto data = load_named("polblogs", why);
  if (!data) return {Outcome::Skip, why};
  constexpr std::size_t runs = 4;
  const double clean = nc_mean(dataset_config("polblogs", AttackKind::Clean, EmbedderKind::Skipgram, runs), *data);
  const double viking =
      nc_mean(dataset_config("polblogs", AttackKind::Viking, EmbedderKind::Skipgram, runs, 1000), *data);
  const double surrogate =
      nc_mean(dataset_config("polblogs", AttackKind::VikingS, EmbedderKind::Skipgram, runs, 1000), *data);
  const bool ok = clean >= kPolblogsCleanFloor && clean - viking >= kPolblogsVikingDrop &&
                  std::abs(surrogate - viking) <= kPolblogsSurrogateGap;
  return {ok ? Outcome::Pass : Outcome::Fail,
          "clean " + fixed(clean) + ", viking " + fixed(viking) + ", viking_s " + fixed(surrogate)};
}

// 6. CiteSeer band (skipgram DeepWalk).
Verdict criterion_citeseer() {
  std::string why;
  const auto data = load_named("citeseer", why);
  if (!data) return {Outcome::Skip, why};
  constexpr std::size_t runs = 4;
  const double clean = nc_mean(dataset_config("citeseer", AttackKind::Clean, EmbedderKind::Skipgram, runs), *data);
  const double viking =
      nc_mean(dataset_config("citeseer", AttackKind::Viking, EmbedderKind::Skipgram, runs, 1000), *data);
  const bool ok = clean - viking >= kCiteseerVikingDrop;
  return {ok ? Outcome::Pass : Outcome::Fail, "clean " + fixed(clean) + ", viking " + fixed(viking)};
}

// 7. PolBlogs budget monotonicity.
Verdict criterion_budget() {
  std::string why;
  const auto data = load_named("polblogs", why);
  if (!data) return {Outcome::Skip, why};
  constexpr std::size_t runs = 3;
  bool ok = true;
  std::string detail;
  double previous = 2.0;
  for (std::size_t budget : {250, 500, 1000, 2000}) {
    const double viking =
        nc_mean(dataset_config("polblogs", AttackKind::Viking, EmbedderKind::Skipgram, runs, budget), *data);
    const double random =
        nc_mean(dataset_config("polblogs", AttackKind::Random, EmbedderKind::Skipgram, runs, budget), *data);
    if (viking > previous + kBudgetNoise) ok = false;
    if (budget >= 500 && viking >= random) ok = false;
    previous = viking;
    detail += "b=" + std::to_string(budget) + " viking " + fixed(viking) + " random " + fixed(random) + (budget < 2000 ? "; " : "");
  }
  return {ok ? Outcome::Pass : Outcome::Fail, detail};
}

// 8. LFR mixing sensitivity (skipgram DeepWalk).
Verdict criterion_lfr() {
  constexpr std::size_t runs = 3;
  bool ok = true;
  std::string detail;
  for (double mu : {0.1, 0.3, 0.5}) {
    ExperimentConfig base;
    base.dataset.source = DatasetSource::Lfr;
    base.dataset.name = "lfr";
    base.dataset.lfr.mu = mu;
    base.eval.runs = runs;
    base.seed = 2024;
    const auto data = prepare_dataset(base.dataset, base.seed);
    auto with = [&](AttackKind kind) {
      ExperimentConfig c = base;
      c.attack = kind;
      return nc_mean(c, data);
    };
    const double clean = with(AttackKind::Clean);
    const double random = with(AttackKind::Random);
    const double viking = with(AttackKind::Viking);
    if (viking > random) ok = false;
    if (mu == 0.3 && clean - viking < kLfrVikingDrop) ok = false;
    detail += "mu=" + fixed(mu, 1) + " clean " + fixed(clean) + " random " + fixed(random) + " viking " +
              fixed(viking) + (mu < 0.5 ? "; " : "");
  }
  return {ok ? Outcome::Pass : Outcome::Fail, detail};
}

// 9. Betweenness of adversarial removals resembles the rest (Cora).
Verdict criterion_diagnostics() {
  std::string why;
  const auto data = load_named("cora", why);
  if (!data) return {Outcome::Skip, why};
  const auto c = dataset_config("cora", AttackKind::Viking, EmbedderKind::Svd, 1, 1000);
  const auto result = run_attack(c, *data);
  const auto report = adversarial_edge_diagnostics(data->graph, result);
  if (!report.ks_betweenness) return {Outcome::Fail, "no removals selected"};
  const bool ok = *report.ks_betweenness < kKsCeiling;
  return {ok ? Outcome::Pass : Outcome::Fail, "KS " + fixed(*report.ks_betweenness)};
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

// 10. Numerical suites.
Verdict criterion_numerics() {
  Rng rng(1010);
  double logreg_worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng.below(20));
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(5));
    const std::size_t classes = 2 + rng.below(3);
    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 2.0 * rng.uniform() - 1.0;
    std::vector<Label> y(static_cast<std::size_t>(n));
    for (auto& v : y) v = static_cast<Label>(rng.below(classes));
    Eigen::MatrixXd w(static_cast<Eigen::Index>(classes), d);
    Eigen::VectorXd b(static_cast<Eigen::Index>(classes));
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform() - 0.5;
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform() - 0.5;
    const double l2 = 0.3 * rng.uniform();
    const auto obj = logreg_objective(x, y, w, b, l2);
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      Eigen::MatrixXd up = w, down = w;
      up.data()[i] += h;
      down.data()[i] -= h;
      const double num = (logreg_objective(x, y, up, b, l2).loss - logreg_objective(x, y, down, b, l2).loss) / (2 * h);
      logreg_worst = std::max(logreg_worst, relative_error(obj.grad_weights.data()[i], num));
    }
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      Eigen::VectorXd up = b, down = b;
      up(i) += h;
      down(i) -= h;
      const double num = (logreg_objective(x, y, w, up, l2).loss - logreg_objective(x, y, w, down, l2).loss) / (2 * h);
      logreg_worst = std::max(logreg_worst, relative_error(obj.grad_bias(i), num));
    }
  }

  double sgns_worst = 0.0;
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
    for (auto& v : negatives) v = draw();
    const auto g = sgns_pair_gradient(input, positive, negatives);
    const double h = 1e-4;
    auto check = [&](std::vector<double>& target, const std::vector<double>& analytic) {
      for (std::size_t i = 0; i < dim; ++i) {
        const double keep = target[i];
        target[i] = keep + h;
        const double up = sgns_pair_gradient(input, positive, negatives).loss;
        target[i] = keep - h;
        const double down = sgns_pair_gradient(input, positive, negatives).loss;
        target[i] = keep;
        sgns_worst = std::max(sgns_worst, relative_error(analytic[i], (up - down) / (2 * h)));
      }
    };
    check(input, g.input);
    check(positive, g.positive);
    for (std::size_t k = 0; k < negatives.size(); ++k) check(negatives[k], g.negatives[k]);
  }

  std::size_t identity_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(100);
    const std::size_t classes = 1 + rng.below(8);
    std::vector<Label> a(n), b(n);
    for (auto& v : a) v = static_cast<Label>(rng.below(classes));
    for (auto& v : b) v = static_cast<Label>(rng.below(classes));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += a[i] == b[i];
    const double direct = static_cast<double>(hits) / static_cast<double>(n);
    if (std::abs(micro_f1(a, b) - direct) > 1e-15) ++identity_failures;
  }

  const std::vector<ScoredPair> ranking{{{0, 1}, 0.9}, {{0, 2}, 0.8}, {{0, 3}, 0.7}, {{0, 4}, 0.1}};
  const std::vector<Edge> positives{{0, 1}, {0, 3}};
  const double ap = average_precision(ranking, positives);
  const bool ap_exact = ap == 0.5 * (1.0 + 2.0 / 3.0);

  const bool ok = logreg_worst < kLogregGradientTolerance && sgns_worst < kSgnsGradientTolerance &&
                  identity_failures == 0 && ap_exact;
  std::ostringstream detail;
  detail << std::scientific << std::setprecision(2) << "logreg grad rel err " << logreg_worst << ", sgns grad rel err "
         << sgns_worst << ", micro-F1 identity failures " << identity_failures << "/1000, AP "
         << std::setprecision(17) << std::defaultfloat << ap << (ap_exact ? " (exact)" : " (inexact)");
  return {ok ? Outcome::Pass : Outcome::Fail, detail.str()};
}

struct Criterion {
  int id;
  const char* title;
  std::function<Verdict()> run;
  double budget_seconds;  // 0: no runtime bound
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "oracle equivalence", criterion_oracle, kCriterion1Seconds},
      {2, "greedy correctness", criterion_greedy, kCriterion2Seconds},
      {3, "safety invariant", criterion_safety, 0.0},
      {4, "Cora reproduction band", criterion_cora, kDatasetSeconds},
      {5, "PolBlogs band", criterion_polblogs, kDatasetSeconds},
      {6, "CiteSeer band", criterion_citeseer, kDatasetSeconds},
      {7, "budget monotonicity", criterion_budget, 0.0},
      {8, "LFR mixing sensitivity", criterion_lfr, 0.0},
      {9, "betweenness diagnostics", criterion_diagnostics, 0.0},
      {10, "numerical suites", criterion_numerics, 0.0},
  };
  return all;
}

Outcome run_one(const Criterion& c) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = c.run();
  } catch (const std::exception& e) {
    v = {Outcome::Fail, std::string("exception: ") + e.what()};
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (v.outcome == Outcome::Pass && c.budget_seconds > 0.0 && seconds > c.budget_seconds) {
    v.outcome = Outcome::Fail;
    v.detail += "; exceeded " + fixed(c.budget_seconds, 0) + " s";
  }
  const char* tag = v.outcome == Outcome::Pass ? "PASS" : v.outcome == Outcome::Fail ? "FAIL" : "SKIP";
  std::cout << tag << " criterion " << c.id << " (" << c.title << "): " << v.detail << " [" << fixed(seconds, 1)
            << " s]" << std::endl;
  return v.outcome;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: " << argv[0] << " [--criterion N]\n";
      return 2;
    }
  }
  if (only != 0) {
    for (const auto& c : criteria()) {
      if (c.id != only) continue;
      const Outcome o = run_one(c);
      return o == Outcome::Pass ? 0 : o == Outcome::Skip ? kSkip : 1;
    }
    std::cerr << "no criterion " << only << "\n";
    return 2;
  }
  bool failed = false;
  for (const auto& c : criteria()) failed |= run_one(c) == Outcome::Fail;
  return failed ? 1 : 0;
}
