#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "netpoison/embeddings.hpp"
#include "netpoison/random.hpp"

namespace netpoison {

namespace {

template <typename T>
T logistic(T x) {
  return x >= 0 ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x));
}

// -log(logistic(x)), stable for large |x|.
template <typename T>
T neg_log_logistic(T x) {
  return x >= 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// d loss / d score for one output vector: logistic(score) - label.
template <typename T>
T score_gradient(T score, bool positive) {
  return logistic(score) - (positive ? T(1) : T(0));
}

template <typename T>
T example_loss(T score, bool positive) {
  return neg_log_logistic(positive ? score : -score);
}

// Tabulated logistic and -log(logistic) on [-kMaxScore, kMaxScore]; scores
// outside are clamped. Only the training kernel uses it.
class LogisticTable {
 public:
  static constexpr float kMaxScore = 8.0f;
  static constexpr std::size_t kSize = 4096;

  LogisticTable() : sigma_(kSize + 1), nll_(kSize + 1) {
    for (std::size_t i = 0; i <= kSize; ++i) {
      const double x = (2.0 * static_cast<double>(i) / kSize - 1.0) * kMaxScore;
      sigma_[i] = static_cast<float>(logistic(x));
      nll_[i] = static_cast<float>(neg_log_logistic(x));
    }
  }

  // Loss and d loss / d score of one example.
  std::pair<float, float> loss_and_gradient(float score, bool positive) const {
    if (std::isnan(score)) return {score, 0.0f};
    const float x = std::clamp(positive ? score : -score, -kMaxScore, kMaxScore);
    const auto i = static_cast<std::size_t>((x + kMaxScore) * (kSize / (2.0f * kMaxScore)) + 0.5f);
    const float slope = 1.0f - sigma_[i];  // logistic(-x)
    return {nll_[i], positive ? -slope : slope};
  }

 private:
  std::vector<float> sigma_;
  std::vector<float> nll_;
};

using VecMap = Eigen::Map<Eigen::VectorXf>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXf>;

constexpr std::size_t kEvaluationPairs = 20000;

// Vose alias table over node frequencies^0.75.
class AliasTable {
 public:
  explicit AliasTable(const std::vector<double>& weights) : prob_(weights.size()), alias_(weights.size()) {
    const std::size_t n = weights.size();
    double total = 0.0;
    for (double w : weights) total += w;
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small;
    std::vector<std::uint32_t> large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = weights[i] * static_cast<double>(n) / total;
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const auto s = small.back();
      small.pop_back();
      const auto l = large.back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] -= 1.0 - scaled[s];
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (auto i : large) prob_[i] = 1.0;
    for (auto i : small) prob_[i] = 1.0;
  }

  NodeId draw(Rng& rng) const {
    const auto i = static_cast<std::uint32_t>(rng.below(prob_.size()));
    return rng.uniform() < prob_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

struct EvalExample {
  NodeId center;
  NodeId context;
  std::vector<NodeId> negatives;
};

// Pairs drawn like training pairs (uniform walk position, shrunk window) with
// negatives fixed once, so per-epoch losses are comparable.
std::vector<EvalExample> evaluation_sample(const WalkCorpus& corpus, const SgnsParams& params,
                                           const AliasTable& noise, std::uint64_t seed) {
  std::vector<std::size_t> eligible;
  for (std::size_t w = 0; w < corpus.walks.size(); ++w) {
    if (corpus.walks[w].size() > 1) eligible.push_back(w);
  }
  std::vector<EvalExample> out;
  if (eligible.empty()) return out;
  Rng rng(seed);
  out.reserve(kEvaluationPairs);
  for (std::size_t e = 0; e < kEvaluationPairs; ++e) {
    const auto& walk = corpus.walks[eligible[rng.below(eligible.size())]];
    const std::size_t i = rng.below(walk.size());
    const std::size_t reach = params.window - rng.below(params.window);
    const std::size_t lo = i >= reach ? i - reach : 0;
    const std::size_t hi = std::min(walk.size() - 1, i + reach);
    std::size_t j = lo + rng.below(hi - lo);
    if (j >= i) ++j;
    EvalExample ex{walk[i], walk[j], {}};
    for (std::size_t k = 0; k < params.negatives; ++k) {
      const NodeId t = noise.draw(rng);
      if (t != ex.context) ex.negatives.push_back(t);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

double evaluation_loss(const std::vector<EvalExample>& sample, const std::vector<float>& input,
                       const std::vector<float>& output, std::size_t dim) {
  if (sample.empty()) return 0.0;
  const auto dims = static_cast<Eigen::Index>(dim);
  auto score = [&](NodeId a, NodeId b) {
    const ConstVecMap x(input.data() + static_cast<std::size_t>(a) * dim, dims);
    const ConstVecMap y(output.data() + static_cast<std::size_t>(b) * dim, dims);
    return static_cast<double>(x.dot(y));
  };
  double total = 0.0;
  for (const auto& ex : sample) {
    total += example_loss(score(ex.center, ex.context), true);
    for (NodeId t : ex.negatives) total += example_loss(score(ex.center, t), false);
  }
  return total / static_cast<double>(sample.size());
}

struct Trainer {
  const WalkCorpus& corpus;
  const SgnsParams& params;
  const AliasTable& noise;
  const LogisticTable& table;
  std::vector<float>& input;
  std::vector<float>& output;
  std::uint64_t total_tokens;
  std::atomic<std::uint64_t>& processed;

  // Trains on walks [begin, end) for one epoch; returns (loss sum, pairs).
  std::pair<double, std::uint64_t> run(std::size_t begin, std::size_t end, Rng& rng) const {
    const std::size_t dim = params.dim;
    const auto dims = static_cast<Eigen::Index>(dim);
    Eigen::VectorXf acc(dims);
    double loss = 0.0;
    std::uint64_t pairs = 0;
    const auto lr0 = static_cast<float>(params.learning_rate);
    const float lr_floor = lr0 * 1e-4f;
    for (std::size_t w = begin; w < end; ++w) {
      const auto& walk = corpus.walks[w];
      for (std::size_t i = 0; i < walk.size(); ++i) {
        const std::uint64_t done = processed.fetch_add(1, std::memory_order_relaxed);
        const float lr = std::max(
            lr_floor, lr0 * (1.0f - static_cast<float>(done) / static_cast<float>(total_tokens + 1)));
        const std::size_t reach = params.window - rng.below(params.window);
        const std::size_t lo = i >= reach ? i - reach : 0;
        const std::size_t hi = std::min(walk.size() - 1, i + reach);
        VecMap in(input.data() + static_cast<std::size_t>(walk[i]) * dim, dims);
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          acc.setZero();
          for (std::size_t k = 0; k <= params.negatives; ++k) {
            NodeId target = walk[j];
            const bool positive = k == 0;
            if (!positive) {
              target = noise.draw(rng);
              if (target == walk[j]) continue;
            }
            VecMap out(output.data() + static_cast<std::size_t>(target) * dim, dims);
            const float score = in.dot(out);
            const auto [l, g] = table.loss_and_gradient(score, positive);
            loss += static_cast<double>(l);
            acc.noalias() += (g * lr) * out;
            out.noalias() -= (g * lr) * in;
          }
          in -= acc;
          ++pairs;
        }
      }
    }
    return {loss, pairs};
  }
};

}  // namespace

SgnsPairGradient sgns_pair_gradient(std::span<const double> input, std::span<const double> positive,
                                    const std::vector<std::vector<double>>& negatives) {
  const std::size_t dim = input.size();
  if (positive.size() != dim) throw std::invalid_argument("sgns: positive vector size mismatch");
  SgnsPairGradient out;
  out.input.assign(dim, 0.0);
  out.negatives.resize(negatives.size());

  auto handle = [&](std::span<const double> target, bool is_positive, std::vector<double>& grad) {
    if (target.size() != dim) throw std::invalid_argument("sgns: negative vector size mismatch");
    const double score = dot(input.data(), target.data(), dim);
    out.loss += example_loss(score, is_positive);
    const double g = score_gradient(score, is_positive);
    grad.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      out.input[d] += g * target[d];
      grad[d] = g * input[d];
    }
  };
  handle(positive, true, out.positive);
  for (std::size_t k = 0; k < negatives.size(); ++k) handle(negatives[k], false, out.negatives[k]);
  return out;
}

SgnsResult sgns_train(const WalkCorpus& corpus, std::size_t node_count, const SgnsParams& params,
                      std::uint64_t seed) {
  if (corpus.walks.empty()) throw std::invalid_argument("sgns: empty walk corpus");
  if (params.dim == 0 || params.window == 0) throw std::invalid_argument("sgns: dim and window must be positive");

  std::vector<double> frequency(node_count, 0.0);
  std::uint64_t tokens = 0;
  for (const auto& walk : corpus.walks) {
    for (NodeId v : walk) {
      if (v >= node_count) throw std::invalid_argument("sgns: walk visits node outside the graph");
      frequency[v] += 1.0;
    }
    tokens += walk.size();
  }
  for (auto& f : frequency) f = std::pow(f, 0.75);

  Rng init_rng(derive_seed(seed, 0));
  std::vector<float> input(node_count * params.dim);
  for (auto& x : input) x = static_cast<float>((init_rng.uniform() - 0.5) / static_cast<double>(params.dim));
  std::vector<float> output(node_count * params.dim, 0.0f);

  SgnsResult result;
  if (params.epochs > 0) {
    const AliasTable noise(frequency);
    const LogisticTable table;
    const auto sample = evaluation_sample(corpus, params, noise, derive_seed(seed, 0, 1));
    std::atomic<std::uint64_t> processed{0};
    const Trainer trainer{corpus, params, noise, table, input, output, tokens * params.epochs, processed};
    const std::size_t threads = std::max<std::size_t>(1, params.threads);
    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
      double loss = 0.0;
      std::uint64_t pairs = 0;
      if (threads == 1) {
        Rng rng(derive_seed(seed, epoch + 1));
        std::tie(loss, pairs) = trainer.run(0, corpus.walks.size(), rng);
      } else {
        std::vector<std::pair<double, std::uint64_t>> partial(threads);
        std::vector<std::thread> pool;
        const std::size_t chunk = (corpus.walks.size() + threads - 1) / threads;
        for (std::size_t t = 0; t < threads; ++t) {
          pool.emplace_back([&, t] {
            Rng rng(derive_seed(seed, epoch + 1, t));
            const std::size_t begin = std::min(corpus.walks.size(), t * chunk);
            const std::size_t end = std::min(corpus.walks.size(), begin + chunk);
            partial[t] = trainer.run(begin, end, rng);
          });
        }
        for (auto& th : pool) th.join();
        for (const auto& [l, p] : partial) {
          loss += l;
          pairs += p;
        }
      }
      const double mean = pairs > 0 ? loss / static_cast<double>(pairs) : 0.0;
      if (!std::isfinite(mean)) {
        throw std::runtime_error("sgns: non-finite loss in epoch " + std::to_string(epoch + 1) +
                                 " with learning rate " + std::to_string(params.learning_rate));
      }
      result.epoch_online_loss.push_back(mean);
      result.epoch_loss.push_back(evaluation_loss(sample, input, output, params.dim));
    }
  }

  result.embedding.vectors.resize(static_cast<Eigen::Index>(node_count), static_cast<Eigen::Index>(params.dim));
  for (std::size_t v = 0; v < node_count; ++v) {
    for (std::size_t d = 0; d < params.dim; ++d) {
      result.embedding.vectors(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(d)) =
          input[v * params.dim + d];
    }
  }
  return result;
}

}  // namespace netpoison
