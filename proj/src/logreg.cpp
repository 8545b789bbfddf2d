#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "netpoison/downstream.hpp"
#include "netpoison/random.hpp"

namespace netpoison {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-20;
constexpr double kMaxStep = 1e6;

void check_labels(const Eigen::MatrixXd& x, std::span<const Label> y, std::size_t class_count) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw std::invalid_argument("logreg: " + std::to_string(x.rows()) + " rows but " +
                                std::to_string(y.size()) + " labels");
  }
  for (Label c : y) {
    if (c >= class_count) {
      throw std::invalid_argument("logreg: label " + std::to_string(c) + " outside 0.." +
                                  std::to_string(class_count - 1));
    }
  }
}

}  // namespace

ClassifierModel::ClassifierModel(Eigen::MatrixXd weights, Eigen::VectorXd bias,
                                 Eigen::RowVectorXd feature_mean, Eigen::RowVectorXd feature_scale)
    : weights_(std::move(weights)),
      bias_(std::move(bias)),
      feature_mean_(std::move(feature_mean)),
      feature_scale_(std::move(feature_scale)) {
  if (bias_.size() != weights_.rows() || feature_mean_.size() != weights_.cols() ||
      feature_scale_.size() != weights_.cols()) {
    throw std::invalid_argument("classifier: inconsistent parameter shapes");
  }
  if (!weights_.allFinite() || !bias_.allFinite()) {
    throw std::invalid_argument("classifier: non-finite parameters");
  }
}

Label ClassifierModel::predict(std::span<const double> features) const {
  if (static_cast<Eigen::Index>(features.size()) != weights_.cols()) {
    throw std::invalid_argument("classifier: expected " + std::to_string(weights_.cols()) +
                                " features, got " + std::to_string(features.size()));
  }
  const Eigen::Map<const Eigen::RowVectorXd> raw(features.data(), static_cast<Eigen::Index>(features.size()));
  const Eigen::VectorXd scaled = ((raw - feature_mean_).cwiseQuotient(feature_scale_)).transpose();
  const Eigen::VectorXd logits = weights_ * scaled + bias_;
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < logits.size(); ++c) {
    if (logits(c) > logits(best)) best = c;
  }
  return static_cast<Label>(best);
}

std::vector<Label> ClassifierModel::predict(const Eigen::MatrixXd& rows) const {
  std::vector<Label> out(static_cast<std::size_t>(rows.rows()));
  Eigen::RowVectorXd row(rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    row = rows.row(i);
    out[static_cast<std::size_t>(i)] = predict(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
  }
  return out;
}

LogRegObjective logreg_objective(const Eigen::MatrixXd& x, std::span<const Label> y,
                                 const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                                 double l2) {
  check_labels(x, y, static_cast<std::size_t>(weights.rows()));
  if (x.rows() == 0) throw std::invalid_argument("logreg: no training rows");
  const double n = static_cast<double>(x.rows());
  Eigen::MatrixXd logits = x * weights.transpose();
  logits.rowwise() += bias.transpose();

  LogRegObjective out;
  Eigen::MatrixXd residual(logits.rows(), logits.cols());
  double data_loss = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double top = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd shifted = logits.row(i).array() - top;
    const double log_norm = std::log(shifted.array().exp().sum());
    const auto yi = static_cast<Eigen::Index>(y[static_cast<std::size_t>(i)]);
    data_loss += log_norm - shifted(yi);
    residual.row(i) = (shifted.array() - log_norm).exp().matrix();
    residual(i, yi) -= 1.0;
  }
  residual /= n;
  out.loss = data_loss / n + 0.5 * l2 * weights.squaredNorm();
  out.grad_weights = residual.transpose() * x + l2 * weights;
  out.grad_bias = residual.colwise().sum().transpose();
  return out;
}

ClassifierModel fit_logreg(const Eigen::MatrixXd& x, std::span<const Label> y, std::size_t class_count,
                           const LogRegParams& params) {
  if (class_count == 0) throw std::invalid_argument("logreg: class_count must be positive");
  if (x.rows() == 0) throw std::invalid_argument("logreg: no training rows");
  if (!(params.l2 >= 0.0)) throw std::invalid_argument("logreg: l2 must be non-negative");
  if (!x.allFinite()) throw std::invalid_argument("logreg: non-finite features");
  check_labels(x, y, class_count);

  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  // One shared scale: per-column scaling would erase the relative weight of
  // embedding dimensions (e.g. singular values).
  double rms = std::sqrt(centered.squaredNorm() / static_cast<double>(x.size()));
  if (!(rms > 0.0)) rms = 1.0;
  const Eigen::RowVectorXd scale = Eigen::RowVectorXd::Constant(x.cols(), rms);
  const Eigen::MatrixXd xs = centered.array().rowwise() / scale.array();

  const auto classes = static_cast<Eigen::Index>(class_count);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(classes, x.cols());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(classes);
  std::vector<double> history;
  std::size_t iterations = 0;
  double step = 1.0;

  auto current = logreg_objective(xs, y, w, b, params.l2);
  history.push_back(current.loss);
  while (iterations < params.max_iterations) {
    const double grad_sq = current.grad_weights.squaredNorm() + current.grad_bias.squaredNorm();
    if (std::sqrt(grad_sq) < params.gradient_tolerance) break;
    bool accepted = false;
    while (step >= kMinStep) {
      const Eigen::MatrixXd w_next = w - step * current.grad_weights;
      const Eigen::VectorXd b_next = b - step * current.grad_bias;
      auto next = logreg_objective(xs, y, w_next, b_next, params.l2);
      if (!std::isfinite(next.loss)) {
        if (step > kMinStep * 2.0) {
          step *= 0.5;
          continue;
        }
        throw std::runtime_error("logreg: non-finite loss at iteration " + std::to_string(iterations) +
                                 " (last loss " + std::to_string(current.loss) + ")");
      }
      if (next.loss <= current.loss - kArmijo * step * grad_sq) {
        w = w_next;
        b = b_next;
        current = std::move(next);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no representable descent step left
    ++iterations;
    history.push_back(current.loss);
    step = std::min(kMaxStep, step * 2.0);
  }

  ClassifierModel model(std::move(w), std::move(b), mean, scale);
  model.iterations = iterations;
  model.l2 = params.l2;
  model.loss_history = std::move(history);
  return model;
}

std::vector<NodeId> stratified_sample(const LabelAssignment& labels, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("stratified sample: fraction must lie in (0, 1], got " + std::to_string(fraction));
  }
  const std::size_t n = labels.size();
  if (n == 0) return {};
  std::vector<std::vector<NodeId>> members(labels.class_count());
  for (NodeId v = 0; v < n; ++v) members[labels[v]].push_back(v);

  const auto total = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  std::vector<std::size_t> take(members.size(), 0);
  std::vector<double> remainder(members.size(), -1.0);
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < members.size(); ++c) {
    const std::size_t size = members[c].size();
    if (size == 0) continue;
    if (size < 2) {
      take[c] = size;
    } else {
      const double ideal = fraction * static_cast<double>(size);
      take[c] = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(ideal)), 1, size);
      remainder[c] = ideal - std::floor(ideal);
    }
    assigned += take[c];
  }
  // Largest remainder first; ties by class id.
  std::vector<std::size_t> order(members.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  while (assigned < total) {
    bool grew = false;
    for (std::size_t c : order) {
      if (assigned >= total) break;
      if (members[c].size() < 2 || take[c] >= members[c].size()) continue;
      ++take[c];
      ++assigned;
      grew = true;
    }
    if (!grew) break;
  }

  Rng rng(seed);
  std::vector<NodeId> out;
  out.reserve(assigned);
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& pool = members[c];
    for (std::size_t i = 0; i < take[c]; ++i) {
      std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
      out.push_back(pool[i]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

Eigen::MatrixXd gather_rows(const Embedding& z, std::span<const NodeId> nodes) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(nodes.size()), z.vectors.cols());
  for (std::size_t i = 0; i < nodes.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = z.vectors.row(nodes[i]);
  return out;
}

}  // namespace

ClassifierModel train_logreg(const Embedding& z, const LabelAssignment& labels, double train_fraction, double l2,
                             std::uint64_t seed) {
  if (z.node_count() != labels.size()) {
    throw std::invalid_argument("train_logreg: embedding has " + std::to_string(z.node_count()) +
                                " rows for " + std::to_string(labels.size()) + " labels");
  }
  const auto train = stratified_sample(labels, train_fraction, seed);
  std::vector<Label> y;
  y.reserve(train.size());
  for (NodeId v : train) y.push_back(labels[v]);
  LogRegParams params;
  params.l2 = l2;
  auto model = fit_logreg(gather_rows(z, train), y, labels.class_count(), params);
  model.train_nodes = train;
  return model;
}

double micro_f1(std::span<const Label> predicted, std::span<const Label> truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("micro_f1: " + std::to_string(predicted.size()) + " predictions for " +
                                std::to_string(truth.size()) + " labels");
  }
  if (truth.empty()) throw std::invalid_argument("micro_f1: empty input");
  // Pooled per-class counts: every wrong prediction is one false positive
  // (for the predicted class) and one false negative (for the true class).
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] == truth[i]) {
      tp += 1.0;
    } else {
      fp += 1.0;
      fn += 1.0;
    }
  }
  return 2.0 * tp / (2.0 * tp + fp + fn);
}

double accuracy(std::span<const Label> predicted, std::span<const Label> truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("accuracy: length mismatch");
  if (truth.empty()) throw std::invalid_argument("accuracy: empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

MetricSummary summarize(std::vector<double> values) {
  MetricSummary s;
  if (!values.empty()) {
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (values.size() > 1) {
      double sq = 0.0;
      for (double v : values) sq += (v - s.mean) * (v - s.mean);
      s.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
    }
  }
  s.values = std::move(values);
  return s;
}

namespace {

double split_micro_f1(const Embedding& z, const LabelAssignment& labels, const EvalOptions& options,
                      std::uint64_t split_seed) {
  const auto train = stratified_sample(labels, options.train_fraction, split_seed);
  std::vector<char> in_train(labels.size(), 0);
  for (NodeId v : train) in_train[v] = 1;
  std::vector<NodeId> test;
  for (NodeId v = 0; v < labels.size(); ++v) {
    if (!in_train[v]) test.push_back(v);
  }
  if (test.empty()) throw std::invalid_argument("node classification: no held-out nodes");
  std::vector<Label> y_train;
  for (NodeId v : train) y_train.push_back(labels[v]);
  const auto model = fit_logreg(gather_rows(z, train), y_train, labels.class_count(), options.logreg);
  const auto predicted = model.predict(gather_rows(z, test));
  std::vector<Label> truth;
  for (NodeId v : test) truth.push_back(labels[v]);
  return micro_f1(predicted, truth);
}

constexpr std::uint64_t kEmbedStage = 0x656d6264;  // shared embedding of deterministic embedders

}  // namespace

MetricSummary node_classification_eval(const Embedding& z, const LabelAssignment& labels,
                                       const EvalOptions& options, std::uint64_t seed) {
  if (options.runs == 0) throw std::invalid_argument("node classification: runs must be positive");
  if (z.node_count() != labels.size()) throw std::invalid_argument("node classification: embedding/label size mismatch");
  std::vector<double> scores;
  for (std::size_t r = 0; r < options.runs; ++r) {
    scores.push_back(split_micro_f1(z, labels, options, derive_seed(derive_seed(seed, r), 1)));
  }
  return summarize(std::move(scores));
}

MetricSummary node_classification_eval(const Graph& g, const LabelAssignment& labels,
                                       const EmbedderConfig& embedder, const EvalOptions& options,
                                       std::uint64_t seed) {
  if (options.runs == 0) throw std::invalid_argument("node classification: runs must be positive");
  if (g.node_count() != labels.size()) throw std::invalid_argument("node classification: graph/label size mismatch");
  std::optional<Embedding> shared;
  if (is_deterministic(embedder)) shared = embed(g, embedder, derive_seed(seed, kEmbedStage));
  std::vector<double> scores;
  for (std::size_t r = 0; r < options.runs; ++r) {
    const std::uint64_t run_seed = derive_seed(seed, r);
    const Embedding z = shared ? *shared : embed(g, embedder, derive_seed(run_seed, 0));
    if (!z.all_finite()) throw std::runtime_error("node classification: embedding has non-finite entries");
    scores.push_back(split_micro_f1(z, labels, options, derive_seed(run_seed, 1)));
  }
  return summarize(std::move(scores));
}

}  // namespace netpoison
