#include "netpoison/experiment.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>

#include "netpoison/graph_io.hpp"
#include "netpoison/random.hpp"

namespace netpoison {

using nlohmann::json;

std::uint64_t stage_seed(std::uint64_t master, Stage stage) {
  return derive_seed(master, static_cast<std::uint64_t>(stage));
}

std::string to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::Clean: return "clean";
    case AttackKind::Random: return "random";
    case AttackKind::Viking: return "viking";
    case AttackKind::VikingS: return "viking_s";
  }
  return "clean";
}

AttackKind attack_kind_from_string(const std::string& text) {
  if (text == "clean") return AttackKind::Clean;
  if (text == "random") return AttackKind::Random;
  if (text == "viking") return AttackKind::Viking;
  if (text == "viking_s") return AttackKind::VikingS;
  throw std::invalid_argument("unknown attack '" + text + "' (clean, random, viking, viking_s)");
}

std::string to_string(Task task) {
  return task == Task::NodeClassification ? "node_classification" : "link_prediction";
}

Task task_from_string(const std::string& text) {
  if (text == "node_classification" || text == "nc") return Task::NodeClassification;
  if (text == "link_prediction" || text == "lp") return Task::LinkPrediction;
  throw std::invalid_argument("unknown task '" + text + "' (node_classification, link_prediction)");
}

std::size_t default_budget(const DatasetSpec& dataset) {
  if (dataset.source == DatasetSource::ForestFire || dataset.name == "forest_fire") return 500;
  return 1000;
}

std::size_t effective_budget(const ExperimentConfig& config) {
  if (config.attack == AttackKind::Clean) return 0;
  return config.budget.value_or(default_budget(config.dataset));
}

namespace {

// Reads known keys of one JSON object and rejects the rest.
class StrictObject {
 public:
  StrictObject(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw std::invalid_argument(where_ + ": expected an object");
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    used_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw std::invalid_argument(where_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw std::invalid_argument(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

DatasetSpec dataset_from_json(const json& j, const std::filesystem::path& base_dir) {
  DatasetSpec d;
  StrictObject o(j, "dataset");
  std::string generator;
  o.read("generator", generator);
  std::string edges;
  std::string labels;
  o.read("edges", edges);
  o.read("labels", labels);
  if (!generator.empty() && (!edges.empty() || !labels.empty())) {
    throw std::invalid_argument("dataset: give either a generator or edge/label files, not both");
  }
  if (generator.empty()) {
    if (edges.empty() || labels.empty()) {
      throw std::invalid_argument("dataset: needs 'generator' or both 'edges' and 'labels'");
    }
    d.source = DatasetSource::Files;
    d.name = std::filesystem::path(edges).stem().string();
    auto resolve = [&](const std::string& p) {
      std::filesystem::path path(p);
      return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    };
    d.edges = resolve(edges);
    d.labels = resolve(labels);
  } else if (generator == "lfr") {
    d.source = DatasetSource::Lfr;
    d.name = "lfr";
    o.read("n", d.lfr.n);
    o.read("tau_degree", d.lfr.tau_degree);
    o.read("tau_community", d.lfr.tau_community);
    o.read("avg_degree", d.lfr.avg_degree);
    o.read("min_community", d.lfr.min_community);
    o.read("mu", d.lfr.mu);
    o.read("max_degree", d.lfr.max_degree);
    o.read("max_community", d.lfr.max_community);
  } else if (generator == "forest_fire") {
    d.source = DatasetSource::ForestFire;
    d.name = "forest_fire";
    o.read("n", d.forest_fire.n);
    o.read("p_forward", d.forest_fire.p_forward);
    o.read("p_backward", d.forest_fire.p_backward);
  } else {
    throw std::invalid_argument("dataset: unknown generator '" + generator + "' (lfr, forest_fire)");
  }
  o.read("name", d.name);
  o.finish();
  if (d.source == DatasetSource::Files) {
    for (const auto& p : {d.edges, d.labels}) {
      if (!std::filesystem::exists(p)) throw std::invalid_argument("dataset: file not found: " + p.string());
    }
  }
  return d;
}

json dataset_to_json(const DatasetSpec& d) {
  switch (d.source) {
    case DatasetSource::Files:
      return {{"name", d.name}, {"edges", d.edges.string()}, {"labels", d.labels.string()}};
    case DatasetSource::Lfr:
      return {{"name", d.name},
              {"generator", "lfr"},
              {"n", d.lfr.n},
              {"tau_degree", d.lfr.tau_degree},
              {"tau_community", d.lfr.tau_community},
              {"avg_degree", d.lfr.avg_degree},
              {"min_community", d.lfr.min_community},
              {"mu", d.lfr.mu},
              {"max_degree", d.lfr.max_degree},
              {"max_community", d.lfr.max_community}};
    case DatasetSource::ForestFire:
      return {{"name", d.name},
              {"generator", "forest_fire"},
              {"n", d.forest_fire.n},
              {"p_forward", d.forest_fire.p_forward},
              {"p_backward", d.forest_fire.p_backward}};
  }
  return {};
}

EmbedderConfig embedder_from_json(const json& j) {
  EmbedderConfig e;
  StrictObject o(j, "embedder");
  std::string kind = to_string(e.kind);
  o.read("kind", kind);
  e.kind = embedder_kind_from_string(kind);
  std::size_t dim = e.sgns.dim;
  std::size_t window = e.sgns.window;
  o.read("dim", dim);
  o.read("window", window);
  e.sgns.dim = e.svd.dim = dim;
  e.sgns.window = e.svd.window = window;
  o.read("negatives", e.sgns.negatives);
  o.read("epochs", e.sgns.epochs);
  o.read("learning_rate", e.sgns.learning_rate);
  o.read("threads", e.sgns.threads);
  o.read("walks_per_node", e.walks.walks_per_node);
  o.read("walk_length", e.walks.walk_length);
  o.read("p", e.walks.p);
  o.read("q", e.walks.q);
  o.read("svd_negatives", e.svd.negatives);
  o.finish();
  return e;
}

json embedder_to_json(const EmbedderConfig& e) {
  return {{"kind", to_string(e.kind)},
          {"dim", e.sgns.dim},
          {"window", e.sgns.window},
          {"negatives", e.sgns.negatives},
          {"epochs", e.sgns.epochs},
          {"learning_rate", e.sgns.learning_rate},
          {"threads", e.sgns.threads},
          {"walks_per_node", e.walks.walks_per_node},
          {"walk_length", e.walks.walk_length},
          {"p", e.walks.p},
          {"q", e.walks.q},
          {"svd_negatives", e.svd.negatives}};
}

}  // namespace

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  StrictObject o(j, "config");
  if (const json* d = o.child("dataset")) c.dataset = dataset_from_json(*d, base_dir);
  std::string attack = to_string(c.attack);
  std::string mode = to_string(c.mode);
  o.read("attack", attack);
  o.read("mode", mode);
  c.attack = attack_kind_from_string(attack);
  c.mode = candidate_mode_from_string(mode);
  if (const json* b = o.child("budget")) {
    if (!b->is_number_integer() || b->get<std::int64_t>() < 0) {
      throw std::invalid_argument("config.budget must be a non-negative integer");
    }
    c.budget = b->get<std::size_t>();
  }
  o.read("k", c.add_multiplier);
  o.read("known_fraction", c.known_fraction);
  if (const json* e = o.child("embedder")) c.embedder = embedder_from_json(*e);
  if (const json* t = o.child("tasks")) {
    if (!t->is_array() || t->empty()) throw std::invalid_argument("config.tasks must be a non-empty list");
    c.tasks.clear();
    for (const auto& item : *t) c.tasks.push_back(task_from_string(item.get<std::string>()));
  }
  o.read("runs", c.eval.runs);
  o.read("train_fraction", c.eval.train_fraction);
  o.read("holdout_fraction", c.eval.holdout_fraction);
  o.read("l2", c.eval.logreg.l2);
  o.read("max_iterations", c.eval.logreg.max_iterations);
  o.read("seed", c.seed);
  o.read("include_timings", c.include_timings);
  o.finish();

  if (c.eval.runs == 0) throw std::invalid_argument("config.runs must be positive");
  if (!(c.add_multiplier >= 0.0)) throw std::invalid_argument("config.k must be non-negative");
  if (!(c.known_fraction > 0.0 && c.known_fraction <= 1.0)) {
    throw std::invalid_argument("config.known_fraction must lie in (0, 1]");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

json to_json(const ExperimentConfig& c) {
  json tasks = json::array();
  for (Task t : c.tasks) tasks.push_back(to_string(t));
  return {{"dataset", dataset_to_json(c.dataset)},
          {"attack", to_string(c.attack)},
          {"mode", to_string(c.mode)},
          {"budget", effective_budget(c)},
          {"k", c.add_multiplier},
          {"known_fraction", c.known_fraction},
          {"embedder", embedder_to_json(c.embedder)},
          {"tasks", tasks},
          {"runs", c.eval.runs},
          {"train_fraction", c.eval.train_fraction},
          {"holdout_fraction", c.eval.holdout_fraction},
          {"l2", c.eval.logreg.l2},
          {"max_iterations", c.eval.logreg.max_iterations},
          {"seed", c.seed},
          {"include_timings", c.include_timings}};
}

LoadedData prepare_dataset(const DatasetSpec& dataset, std::uint64_t master_seed) {
  LoadedData data;
  switch (dataset.source) {
    case DatasetSource::Files: {
      auto loaded = load_dataset(dataset.edges, dataset.labels);
      data.graph = std::move(loaded.graph);
      data.labels = std::move(loaded.labels);
      data.original_ids = std::move(loaded.original_ids);
      break;
    }
    case DatasetSource::Lfr: {
      auto generated = generate_lfr(dataset.lfr, stage_seed(master_seed, Stage::Dataset));
      data.graph = std::move(generated.graph);
      data.labels = std::move(generated.labels);
      break;
    }
    case DatasetSource::ForestFire:
      data.graph = generate_forest_fire(dataset.forest_fire, stage_seed(master_seed, Stage::Dataset));
      data.labels = louvain(data.graph, stage_seed(master_seed, Stage::Communities));
      break;
  }
  return data;
}

namespace {

CandidateSet candidates_for(const ExperimentConfig& config, const Graph& g) {
  return build_candidates(g, config.mode, config.add_multiplier, stage_seed(config.seed, Stage::Candidates));
}

AttackResult attack_with(const ExperimentConfig& config, const LoadedData& data, const CandidateSet& cs) {
  const std::size_t budget = effective_budget(config);
  AttackResult result;
  switch (config.attack) {
    case AttackKind::Clean:
      result.poisoned = data.graph;
      annotate_attack(result, data.graph, data.labels);
      return result;
    case AttackKind::Random:
      result = random_attack(data.graph, budget, cs, stage_seed(config.seed, Stage::Attack));
      break;
    case AttackKind::Viking:
      result = viking_attack(data.graph, data.labels, budget, cs);
      break;
    case AttackKind::VikingS:
      result = viking_s_attack(data.graph, data.labels, config.known_fraction, budget, cs,
                               stage_seed(config.seed, Stage::Surrogate));
      break;
  }
  // Report homophily under the true labels for every attack.
  annotate_attack(result, data.graph, data.labels);
  return result;
}

}  // namespace

AttackResult run_attack(const ExperimentConfig& config, const LoadedData& data) {
  if (config.attack == AttackKind::Clean) return attack_with(config, data, CandidateSet{});
  return attack_with(config, data, candidates_for(config, data.graph));
}

json attack_to_json(const AttackResult& result) {
  json flips = json::array();
  for (const auto& f : result.flips) {
    flips.push_back({{"u", f.flip.u}, {"v", f.flip.v}, {"kind", to_string(f.flip.kind)}, {"importance", f.importance}});
  }
  json out = {{"requested_budget", result.requested_budget},
              {"applied", result.flips.size()},
              {"truncated", result.truncated},
              {"flips", flips}};
  out["theta_before"] = result.theta_before ? json(*result.theta_before) : json(nullptr);
  out["theta_after"] = result.theta_after ? json(*result.theta_after) : json(nullptr);
  return out;
}

AttackResult attack_from_json(const json& j, const Graph& clean) {
  AttackResult result;
  try {
    std::vector<FlipCandidate> flips;
    for (const auto& item : j.at("flips")) {
      ScoredFlip sf;
      sf.flip = {item.at("u").get<NodeId>(), item.at("v").get<NodeId>(),
                 flip_kind_from_string(item.at("kind").get<std::string>())};
      sf.importance = item.value("importance", 0.0);
      result.flips.push_back(sf);
      flips.push_back(sf.flip);
    }
    result.poisoned = apply_flips(clean, flips);
    result.requested_budget = j.value("requested_budget", flips.size());
    result.truncated = j.value("truncated", false);
    if (j.contains("theta_before") && !j["theta_before"].is_null()) result.theta_before = j["theta_before"].get<double>();
    if (j.contains("theta_after") && !j["theta_after"].is_null()) result.theta_after = j["theta_after"].get<double>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("attack file: ") + e.what());
  }
  return result;
}

ExperimentError::ExperimentError(std::string stage, const std::string& what, const ExperimentConfig& config)
    : std::runtime_error("stage '" + stage + "': " + what + "\nconfig: " + to_json(config).dump()),
      stage_(std::move(stage)) {}

namespace {

template <typename F>
auto timed_stage(const char* stage, const ExperimentConfig& config, std::map<std::string, double>& timings, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      timings[stage] += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    } else {
      auto value = body();
      timings[stage] += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      return value;
    }
  } catch (const ExperimentError&) {
    throw;
  } catch (const std::exception& e) {
    throw ExperimentError(stage, e.what(), config);
  }
}

}  // namespace

Report run_experiment(const ExperimentConfig& config, const LoadedData& data) {
  Report report;
  report.config = config;
  report.node_count = data.graph.node_count();
  report.edge_count = data.graph.edge_count();
  report.class_count = data.labels.class_count();
  auto& timings = report.timings_seconds;

  CandidateSet cs;
  if (config.attack != AttackKind::Clean) {
    cs = timed_stage("candidates", config, timings, [&] { return candidates_for(config, data.graph); });
  }
  report.candidate_count = cs.candidates.size();
  report.attack = timed_stage("attack", config, timings, [&] { return attack_with(config, data, cs); });
  report.poisoned_edge_count = report.attack.poisoned.edge_count();

  const std::size_t budget = effective_budget(config);
  for (Task task : config.tasks) {
    MetricRow row{config.dataset.name, to_string(config.attack), to_string(config.mode), budget,
                  to_string(config.embedder.kind), to_string(task), {}, config.seed};
    const auto& g = report.attack.poisoned;
    if (task == Task::NodeClassification) {
      row.summary = timed_stage("node_classification", config, timings, [&] {
        return node_classification_eval(g, data.labels, config.embedder, config.eval,
                                        stage_seed(config.seed, Stage::NodeClassification));
      });
    } else {
      row.summary = timed_stage("link_prediction", config, timings, [&] {
        return link_prediction_eval(g, config.embedder, config.eval, stage_seed(config.seed, Stage::LinkPrediction));
      });
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

Report run_experiment(const ExperimentConfig& config) {
  std::map<std::string, double> load_time;
  const auto data =
      timed_stage("dataset", config, load_time, [&] { return prepare_dataset(config.dataset, config.seed); });
  Report report = run_experiment(config, data);
  report.timings_seconds["dataset"] = load_time["dataset"];
  return report;
}

std::vector<Report> budget_sweep(const ExperimentConfig& config, const std::vector<std::size_t>& budgets) {
  if (budgets.empty()) throw std::invalid_argument("budget sweep: empty budget list");
  std::map<std::string, double> load_time;
  const auto data =
      timed_stage("dataset", config, load_time, [&] { return prepare_dataset(config.dataset, config.seed); });
  std::vector<Report> out;
  for (std::size_t b : budgets) {
    ExperimentConfig c = config;
    c.budget = b;
    out.push_back(run_experiment(c, data));
  }
  return out;
}

json report_to_json(const Report& report) {
  json metrics = json::array();
  for (const auto& row : report.rows) {
    metrics.push_back({{"task", row.task},
                       {"mean", row.summary.mean},
                       {"stddev", row.summary.stddev},
                       {"runs", row.summary.values.size()},
                       {"values", row.summary.values}});
  }
  json attack = attack_to_json(report.attack);
  attack["candidates"] = report.candidate_count;
  attack["poisoned_edges"] = report.poisoned_edge_count;
  json out = {{"config", to_json(report.config)},
              {"dataset",
               {{"name", report.config.dataset.name},
                {"nodes", report.node_count},
                {"edges", report.edge_count},
                {"classes", report.class_count}}},
              {"attack", attack},
              {"metrics", metrics}};
  if (report.config.include_timings) out["timings_seconds"] = report.timings_seconds;
  return out;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows) {
  out << "dataset,attack,mode,budget,embedder,task,mean,stddev,runs,seed\n";
  const auto precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rows) {
    out << r.dataset << ',' << r.attack << ',' << r.mode << ',' << r.budget << ',' << r.embedder << ',' << r.task
        << ',' << r.summary.mean << ',' << r.summary.stddev << ',' << r.summary.values.size() << ',' << r.seed
        << '\n';
  }
  out.precision(precision);
}

}  // namespace netpoison
