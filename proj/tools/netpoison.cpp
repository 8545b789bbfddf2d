#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "netpoison/experiment.hpp"
#include "netpoison/graph_io.hpp"
#include "netpoison/random.hpp"

using namespace netpoison;
using nlohmann::json;

namespace {

// Thrown with the subcommand stage that failed.
struct StageFailure : std::runtime_error {
  StageFailure(const std::string& stage, const std::string& what) : std::runtime_error(what), stage(stage) {}
  std::string stage;
};

template <typename F>
auto stage(const std::string& name, F&& body) {
  try {
    return body();
  } catch (const ExperimentError&) {
    throw;
  } catch (const StageFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw StageFailure(name, e.what());
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

// Writes to the file, or stdout when path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    open_out(path) << text;
  }
}

struct EmbedderFlags {
  std::string kind = "skipgram";
  EmbedderConfig config;

  void attach(CLI::App* app) {
    app->add_option("--embedder", kind, "skipgram, svd or node2vec")->capture_default_str();
    app->add_option("--dim", config.sgns.dim, "embedding dimension")->capture_default_str();
    app->add_option("--window", config.sgns.window, "context window")->capture_default_str();
    app->add_option("--negatives", config.sgns.negatives, "SGNS negative samples")->capture_default_str();
    app->add_option("--epochs", config.sgns.epochs, "SGNS epochs")->capture_default_str();
    app->add_option("--learning-rate", config.sgns.learning_rate)->capture_default_str();
    app->add_option("--threads", config.sgns.threads, "SGNS threads (>1 is nondeterministic)")->capture_default_str();
    app->add_option("--walks-per-node", config.walks.walks_per_node)->capture_default_str();
    app->add_option("--walk-length", config.walks.walk_length)->capture_default_str();
    app->add_option("--p", config.walks.p, "node2vec return parameter")->capture_default_str();
    app->add_option("--q", config.walks.q, "node2vec in-out parameter")->capture_default_str();
    app->add_option("--svd-negatives", config.svd.negatives, "SVD negative-sampling constant")->capture_default_str();
  }

  EmbedderConfig resolve() const {
    EmbedderConfig c = config;
    c.kind = embedder_kind_from_string(kind);
    c.svd.dim = c.sgns.dim;
    c.svd.window = c.sgns.window;
    return c;
  }
};

struct GraphInput {
  std::string edges;
  std::string labels;
  bool compact = false;

  void attach(CLI::App* app, bool labels_required) {
    app->add_option("--edges", edges, "edge list")->required()->check(CLI::ExistingFile);
    auto* l = app->add_option("--labels", labels, "node label file")->check(CLI::ExistingFile);
    if (labels_required) l->required();
    app->add_flag("--compact", compact, "input uses arbitrary ids; compact them (labels required)");
  }

  LoadedData load() const {
    LoadedData data;
    if (compact) {
      if (labels.empty()) throw std::invalid_argument("--compact needs --labels");
      auto d = load_dataset(edges, labels);
      data.graph = std::move(d.graph);
      data.labels = std::move(d.labels);
      data.original_ids = std::move(d.original_ids);
    } else {
      data.graph = read_graph(edges);
      if (!labels.empty()) data.labels = read_labels(labels, data.graph.node_count());
    }
    return data;
  }
};

void write_dataset(const LoadedData& data, const std::string& edges_out, const std::string& labels_out) {
  write_graph(std::filesystem::path(edges_out), data.graph);
  if (!labels_out.empty()) write_labels(std::filesystem::path(labels_out), data.labels);
}

std::vector<std::size_t> parse_budgets(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    const long long value = std::stoll(item, &pos);
    if (pos != item.size() || value < 0) throw std::invalid_argument("bad budget '" + item + "'");
    out.push_back(static_cast<std::size_t>(value));
  }
  return out;
}

// Overrides config fields given on the command line.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> budget;
  std::optional<std::size_t> runs;
  std::optional<std::string> attack;
  std::optional<std::string> mode;
  std::optional<std::string> embedder;
  bool timings = false;

  void attach(CLI::App* app) {
    app->add_option("--seed", seed, "override master seed");
    app->add_option("--budget", budget, "override flip budget");
    app->add_option("--runs", runs, "override evaluation runs");
    app->add_option("--attack", attack, "override attack");
    app->add_option("--mode", mode, "override candidate mode");
    app->add_option("--embedder", embedder, "override embedder kind");
    app->add_flag("--timings", timings, "include wall-clock timings in the report");
  }

  void apply(ExperimentConfig& c) const {
    if (seed) c.seed = *seed;
    if (budget) c.budget = *budget;
    if (runs) c.eval.runs = *runs;
    if (attack) c.attack = attack_kind_from_string(*attack);
    if (mode) c.mode = candidate_mode_from_string(*mode);
    if (embedder) c.embedder.kind = embedder_kind_from_string(*embedder);
    if (timings) c.include_timings = true;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network poisoning attacks on unsupervised node embeddings"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "generate an LFR or Forest Fire graph with labels");
  std::string gen_model;
  std::string gen_edges_out;
  std::string gen_labels_out;
  std::uint64_t gen_seed = 0;
  LfrParams lfr;
  ForestFireParams ff;
  std::size_t gen_n = 1000;
  gen->add_option("model", gen_model, "lfr or forest_fire")->required()->check(CLI::IsMember({"lfr", "forest_fire"}));
  gen->add_option("--n", gen_n, "node count")->capture_default_str();
  gen->add_option("--mu", lfr.mu, "LFR mixing parameter")->capture_default_str();
  gen->add_option("--avg-degree", lfr.avg_degree)->capture_default_str();
  gen->add_option("--tau-degree", lfr.tau_degree)->capture_default_str();
  gen->add_option("--tau-community", lfr.tau_community)->capture_default_str();
  gen->add_option("--min-community", lfr.min_community)->capture_default_str();
  gen->add_option("--max-degree", lfr.max_degree, "0 = min(n-1, 3*avg_degree)")->capture_default_str();
  gen->add_option("--max-community", lfr.max_community, "0 = n")->capture_default_str();
  gen->add_option("--p-forward", ff.p_forward)->capture_default_str();
  gen->add_option("--p-backward", ff.p_backward)->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--edges-out", gen_edges_out)->required();
  gen->add_option("--labels-out", gen_labels_out)->required();

  // attack
  auto* atk = app.add_subcommand("attack", "poison a graph");
  GraphInput atk_in;
  atk_in.attach(atk, true);
  std::string atk_kind = "viking";
  std::string atk_mode = "combined";
  std::size_t atk_budget = 1000;
  double atk_k = 2.0;
  double atk_known = 0.1;
  std::uint64_t atk_seed = 0;
  std::string atk_out;
  std::string atk_labels_out;
  std::string atk_flips_out;
  atk->add_option("--attack", atk_kind, "random, viking or viking_s")->capture_default_str();
  atk->add_option("--mode", atk_mode, "add, remove or combined")->capture_default_str();
  atk->add_option("--budget", atk_budget)->capture_default_str();
  atk->add_option("--k", atk_k, "addition candidates per edge")->capture_default_str();
  atk->add_option("--known-fraction", atk_known, "labels known to viking_s")->capture_default_str();
  atk->add_option("--seed", atk_seed)->capture_default_str();
  atk->add_option("--out", atk_out, "poisoned edge list")->required();
  atk->add_option("--labels-out", atk_labels_out, "labels over the output ids");
  atk->add_option("--flips-out", atk_flips_out, "selected flips as JSON");

  // embed
  auto* emb = app.add_subcommand("embed", "embed a graph");
  GraphInput emb_in;
  emb_in.attach(emb, false);
  EmbedderFlags emb_flags;
  emb_flags.attach(emb);
  std::uint64_t emb_seed = 0;
  std::string emb_out;
  emb->add_option("--seed", emb_seed)->capture_default_str();
  emb->add_option("--out", emb_out, "embedding file")->required();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "node classification or link prediction on a graph");
  GraphInput ev_in;
  ev->add_option("--edges", ev_in.edges, "edge list")->check(CLI::ExistingFile);
  ev->add_option("--labels", ev_in.labels, "node label file")->check(CLI::ExistingFile);
  std::string ev_embedding;
  ev->add_option("--embedding", ev_embedding, "precomputed embedding (node classification only)")
      ->check(CLI::ExistingFile);
  EmbedderFlags ev_flags;
  ev_flags.attach(ev);
  std::string ev_task = "node_classification";
  EvalOptions ev_opts;
  std::uint64_t ev_seed = 0;
  std::string ev_out;
  std::string ev_name = "graph";
  ev->add_option("--task", ev_task, "node_classification or link_prediction")->capture_default_str();
  ev->add_option("--runs", ev_opts.runs)->capture_default_str();
  ev->add_option("--train-fraction", ev_opts.train_fraction)->capture_default_str();
  ev->add_option("--holdout-fraction", ev_opts.holdout_fraction)->capture_default_str();
  ev->add_option("--seed", ev_seed)->capture_default_str();
  ev->add_option("--name", ev_name, "dataset name for the CSV row")->capture_default_str();
  ev->add_option("--out", ev_out, "metrics CSV (default stdout)");

  // experiment
  auto* ex = app.add_subcommand("experiment", "run one configured experiment");
  std::string ex_config;
  std::string ex_out;
  std::string ex_csv;
  std::string ex_poisoned;
  ConfigOverrides ex_over;
  ex->add_option("--config", ex_config, "experiment JSON")->required()->check(CLI::ExistingFile);
  ex->add_option("--out", ex_out, "report JSON (default stdout)");
  ex->add_option("--csv", ex_csv, "metrics CSV");
  ex->add_option("--poisoned-out", ex_poisoned, "poisoned edge list");
  ex_over.attach(ex);

  // sweep
  auto* sw = app.add_subcommand("sweep", "run one experiment per budget");
  std::string sw_config;
  std::string sw_budgets;
  std::string sw_out;
  std::string sw_reports;
  ConfigOverrides sw_over;
  sw->add_option("--config", sw_config, "experiment JSON")->required()->check(CLI::ExistingFile);
  sw->add_option("--budgets", sw_budgets, "comma-separated budgets")->required();
  sw->add_option("--out", sw_out, "metrics CSV (default stdout)");
  sw->add_option("--reports", sw_reports, "JSON array of the full reports");
  sw_over.attach(sw);

  // diagnose
  auto* dg = app.add_subcommand("diagnose", "degree and betweenness of the selected flips");
  GraphInput dg_in;
  dg_in.attach(dg, false);
  std::string dg_flips;
  std::string dg_flips_out;
  std::string dg_hist_out;
  std::string dg_mode = "combined";
  std::size_t dg_budget = 1000;
  double dg_k = 2.0;
  std::uint64_t dg_seed = 0;
  dg->add_option("--flips", dg_flips, "flips JSON from `attack --flips-out`; otherwise VIKING is run")
      ->check(CLI::ExistingFile);
  dg->add_option("--mode", dg_mode)->capture_default_str();
  dg->add_option("--budget", dg_budget)->capture_default_str();
  dg->add_option("--k", dg_k)->capture_default_str();
  dg->add_option("--seed", dg_seed)->capture_default_str();
  dg->add_option("--flips-out", dg_flips_out, "per-flip CSV")->required();
  dg->add_option("--hist-out", dg_hist_out, "histogram CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      LoadedData data = stage("generate", [&] {
        LoadedData d;
        if (gen_model == "lfr") {
          lfr.n = gen_n;
          auto g = generate_lfr(lfr, gen_seed);
          d.graph = std::move(g.graph);
          d.labels = std::move(g.labels);
        } else {
          ff.n = gen_n;
          d.graph = generate_forest_fire(ff, derive_seed(gen_seed, static_cast<std::uint64_t>(Stage::Dataset)));
          d.labels = louvain(d.graph, derive_seed(gen_seed, static_cast<std::uint64_t>(Stage::Communities)));
        }
        return d;
      });
      stage("write", [&] {
        write_dataset(data, gen_edges_out, gen_labels_out);
        return 0;
      });
      std::cerr << "generated " << data.graph.node_count() << " nodes, " << data.graph.edge_count() << " edges, "
                << data.labels.class_count() << " classes\n";
    } else if (*atk) {
      const LoadedData data = stage("load", [&] { return atk_in.load(); });
      ExperimentConfig cfg;
      cfg.attack = attack_kind_from_string(atk_kind);
      cfg.mode = candidate_mode_from_string(atk_mode);
      cfg.budget = atk_budget;
      cfg.add_multiplier = atk_k;
      cfg.known_fraction = atk_known;
      cfg.seed = atk_seed;
      const AttackResult result = stage("attack", [&] { return run_attack(cfg, data); });
      stage("write", [&] {
        write_graph(std::filesystem::path(atk_out), result.poisoned);
        if (!atk_labels_out.empty()) write_labels(std::filesystem::path(atk_labels_out), data.labels);
        if (!atk_flips_out.empty()) open_out(atk_flips_out) << attack_to_json(result).dump(2) << '\n';
        return 0;
      });
      std::cerr << "applied " << result.flips.size() << " flips, theta " << result.theta_before.value_or(0.0)
                << " -> " << result.theta_after.value_or(0.0) << '\n';
    } else if (*emb) {
      const LoadedData data = stage("load", [&] { return emb_in.load(); });
      const Embedding z = stage("embed", [&] { return embed(data.graph, emb_flags.resolve(), emb_seed); });
      stage("write", [&] {
        write_embedding(std::filesystem::path(emb_out), z);
        return 0;
      });
    } else if (*ev) {
      const Task task = task_from_string(ev_task);
      const EmbedderConfig embedder = ev_flags.resolve();
      MetricRow row{ev_name, "none", "none", 0, to_string(embedder.kind), to_string(task), {}, ev_seed};
      if (!ev_embedding.empty()) {
        if (task != Task::NodeClassification) {
          throw StageFailure("evaluate", "a fixed embedding supports node classification only");
        }
        if (ev_in.labels.empty()) throw StageFailure("evaluate", "--labels is required");
        const Embedding z = stage("load", [&] { return read_embedding(std::filesystem::path(ev_embedding)); });
        const LabelAssignment labels = stage("load", [&] { return read_labels(ev_in.labels, z.node_count()); });
        row.embedder = "external";
        row.summary = stage("evaluate", [&] { return node_classification_eval(z, labels, ev_opts, ev_seed); });
      } else {
        if (ev_in.edges.empty()) throw StageFailure("evaluate", "--edges or --embedding is required");
        const LoadedData data = stage("load", [&] { return ev_in.load(); });
        if (task == Task::NodeClassification) {
          if (ev_in.labels.empty()) throw StageFailure("evaluate", "--labels is required");
          row.summary = stage("evaluate", [&] {
            return node_classification_eval(data.graph, data.labels, embedder, ev_opts, ev_seed);
          });
        } else {
          row.summary =
              stage("evaluate", [&] { return link_prediction_eval(data.graph, embedder, ev_opts, ev_seed); });
        }
      }
      std::ostringstream csv;
      write_metrics_csv(csv, {row});
      emit(ev_out, csv.str());
    } else if (*ex) {
      ExperimentConfig cfg = stage("config", [&] { return load_config(ex_config); });
      stage("config", [&] {
        ex_over.apply(cfg);
        return 0;
      });
      const Report report = run_experiment(cfg);
      stage("write", [&] {
        emit(ex_out, report_to_json(report).dump(2) + "\n");
        if (!ex_csv.empty()) {
          auto out = open_out(ex_csv);
          write_metrics_csv(out, report.rows);
        }
        if (!ex_poisoned.empty()) write_graph(std::filesystem::path(ex_poisoned), report.attack.poisoned);
        return 0;
      });
    } else if (*sw) {
      ExperimentConfig cfg = stage("config", [&] { return load_config(sw_config); });
      const auto budgets = stage("config", [&] {
        sw_over.apply(cfg);
        return parse_budgets(sw_budgets);
      });
      const auto reports = budget_sweep(cfg, budgets);
      stage("write", [&] {
        std::vector<MetricRow> rows;
        json all = json::array();
        for (const auto& r : reports) {
          rows.insert(rows.end(), r.rows.begin(), r.rows.end());
          all.push_back(report_to_json(r));
        }
        std::ostringstream csv;
        write_metrics_csv(csv, rows);
        emit(sw_out, csv.str());
        if (!sw_reports.empty()) open_out(sw_reports) << all.dump(2) << '\n';
        return 0;
      });
    } else if (*dg) {
      const LoadedData data = stage("load", [&] { return dg_in.load(); });
      const AttackResult result = stage("attack", [&] {
        if (!dg_flips.empty()) {
          std::ifstream in(dg_flips);
          json j;
          in >> j;
          return attack_from_json(j, data.graph);
        }
        if (dg_in.labels.empty()) throw std::invalid_argument("--labels is required unless --flips is given");
        ExperimentConfig cfg;
        cfg.mode = candidate_mode_from_string(dg_mode);
        cfg.budget = dg_budget;
        cfg.add_multiplier = dg_k;
        cfg.seed = dg_seed;
        return run_attack(cfg, data);
      });
      const DiagnosticsReport report = stage("diagnose", [&] { return adversarial_edge_diagnostics(data.graph, result); });
      stage("write", [&] {
        auto flips = open_out(dg_flips_out);
        auto hist = open_out(dg_hist_out);
        write_diagnostics_csv(flips, hist, report);
        return 0;
      });
      if (report.ks_betweenness) std::cerr << "ks_betweenness " << *report.ks_betweenness << '\n';
    }
  } catch (const ExperimentError& e) {
    std::cerr << "netpoison " << app.get_subcommands().front()->get_name() << ": " << e.what() << '\n';
    return 1;
  } catch (const StageFailure& e) {
    std::cerr << "netpoison " << app.get_subcommands().front()->get_name() << ": stage '" << e.stage
              << "': " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "netpoison: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
