#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "netpoison/attack.hpp"
#include "netpoison/downstream.hpp"
#include "netpoison/embeddings.hpp"
#include "netpoison/generators.hpp"
#include "netpoison/graph.hpp"

namespace netpoison {

/// Stage tags for seed derivation: stage s of master seed m draws from
/// derive_seed(m, s).
enum class Stage : std::uint64_t {
  Dataset = 1,
  Candidates = 2,
  Attack = 3,
  Surrogate = 4,
  NodeClassification = 5,
  LinkPrediction = 6,
  Communities = 7,
};

std::uint64_t stage_seed(std::uint64_t master, Stage stage);

enum class DatasetSource { Files, Lfr, ForestFire };

struct DatasetSpec {
  DatasetSource source = DatasetSource::Lfr;
  /// Used in reports and to pick the default budget.
  std::string name = "lfr";
  std::filesystem::path edges;
  std::filesystem::path labels;
  LfrParams lfr;
  ForestFireParams forest_fire;
};

enum class AttackKind { Clean, Random, Viking, VikingS };
std::string to_string(AttackKind kind);
AttackKind attack_kind_from_string(const std::string& text);

enum class Task { NodeClassification, LinkPrediction };
std::string to_string(Task task);
Task task_from_string(const std::string& text);

struct ExperimentConfig {
  DatasetSpec dataset;
  AttackKind attack = AttackKind::Viking;
  CandidateMode mode = CandidateMode::Combined;
  /// Absent means the dataset default (see default_budget).
  std::optional<std::size_t> budget;
  double add_multiplier = 2.0;
  double known_fraction = 0.1;
  EmbedderConfig embedder;
  std::vector<Task> tasks{Task::NodeClassification};
  EvalOptions eval;
  std::uint64_t seed = 0;
  /// Wall-clock timings make reports differ between runs; off by default.
  bool include_timings = false;
};

/// 500 for forest_fire, 1000 otherwise (lfr, cora, polblogs, citeseer, files).
std::size_t default_budget(const DatasetSpec& dataset);
std::size_t effective_budget(const ExperimentConfig& config);

/// Parses a config object. Missing fields take their defaults; unknown keys
/// are rejected. Relative dataset paths resolve against base_dir.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
/// Full config with every default filled in.
nlohmann::json to_json(const ExperimentConfig& config);

struct LoadedData {
  Graph graph;
  LabelAssignment labels;
  std::vector<std::int64_t> original_ids;  // empty for generated graphs
};

/// Reads the dataset files, or generates LFR / Forest Fire graphs. Forest
/// Fire labels are Louvain communities.
LoadedData prepare_dataset(const DatasetSpec& dataset, std::uint64_t master_seed);

/// Applies the configured attack to a prepared graph.
AttackResult run_attack(const ExperimentConfig& config, const LoadedData& data);

nlohmann::json attack_to_json(const AttackResult& result);
/// Rebuilds an AttackResult by applying the recorded flips to clean.
AttackResult attack_from_json(const nlohmann::json& j, const Graph& clean);

struct MetricRow {
  std::string dataset;
  std::string attack;
  std::string mode;
  std::size_t budget = 0;
  std::string embedder;
  std::string task;
  MetricSummary summary;
  std::uint64_t seed = 0;
};

struct Report {
  ExperimentConfig config;
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::size_t class_count = 0;
  std::size_t poisoned_edge_count = 0;
  std::size_t candidate_count = 0;
  AttackResult attack;
  std::vector<MetricRow> rows;
  std::map<std::string, double> timings_seconds;
};

/// A stage failure, tagged with the stage name and the config echo.
class ExperimentError : public std::runtime_error {
 public:
  ExperimentError(std::string stage, const std::string& what, const ExperimentConfig& config);
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// load/generate -> candidates -> attack -> evaluation. A pure function of
/// the config (timings aside).
Report run_experiment(const ExperimentConfig& config);
Report run_experiment(const ExperimentConfig& config, const LoadedData& data);

/// run_experiment once per budget on the same data. Throws on an empty list.
std::vector<Report> budget_sweep(const ExperimentConfig& config, const std::vector<std::size_t>& budgets);

nlohmann::json report_to_json(const Report& report);

/// CSV with header `dataset,attack,mode,budget,embedder,task,mean,stddev,runs,seed`.
void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows);

}  // namespace netpoison
