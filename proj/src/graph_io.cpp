#include "netpoison/graph_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace netpoison {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

NodeId checked_node(std::int64_t id, const std::string& what) {
  if (id < 0 || id > static_cast<std::int64_t>(UINT32_MAX - 1)) {
    throw std::runtime_error(what + ": node id " + std::to_string(id) + " out of range");
  }
  return static_cast<NodeId>(id);
}

// Node count hint from a leading "# nodes N ..." comment, 0 when absent.
std::size_t header_node_count(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] != '#') break;
    std::istringstream fields(line.substr(1));
    std::string key;
    std::size_t n = 0;
    if (fields >> key >> n && key == "nodes") return n;
  }
  return 0;
}

}  // namespace

std::vector<RawPair> read_int_pairs(std::istream& in, const std::string& source) {
  std::vector<RawPair> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    RawPair p;
    std::string rest;
    if (!(fields >> p.first >> p.second) || (fields >> rest)) {
      throw std::runtime_error(source + ":" + std::to_string(line_number) +
                               ": expected two integers, got '" + line + "'");
    }
    out.push_back(p);
  }
  return out;
}

std::vector<RawPair> read_int_pairs(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_int_pairs(in, path.string());
}

Graph read_graph(const std::filesystem::path& path, std::size_t node_count) {
  const auto pairs = read_int_pairs(path);
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  std::size_t n = std::max(node_count, header_node_count(path));
  for (const auto& p : pairs) {
    const Edge e{checked_node(p.first, path.string()), checked_node(p.second, path.string())};
    n = std::max<std::size_t>(n, std::max(e.u, e.v) + std::size_t{1});
    edges.push_back(e);
  }
  return build_graph(n, edges);
}

LabelAssignment read_labels(const std::filesystem::path& path, std::size_t node_count) {
  const auto pairs = read_int_pairs(path);
  std::vector<std::int64_t> labels(node_count, -1);
  for (const auto& p : pairs) {
    const NodeId node = checked_node(p.first, path.string());
    if (node >= node_count) {
      throw std::runtime_error(path.string() + ": node " + std::to_string(node) +
                               " exceeds graph size " + std::to_string(node_count));
    }
    if (p.second < 0) {
      throw std::runtime_error(path.string() + ": negative label for node " + std::to_string(node));
    }
    labels[node] = p.second;
  }
  std::vector<Label> values(node_count);
  std::string missing;
  for (std::size_t i = 0; i < node_count; ++i) {
    if (labels[i] < 0) {
      missing += (missing.empty() ? "" : ",") + std::to_string(i);
    } else {
      values[i] = static_cast<Label>(labels[i]);
    }
  }
  if (!missing.empty()) throw std::runtime_error(path.string() + ": nodes without label: " + missing);
  return LabelAssignment::from_values(std::move(values));
}

Dataset load_dataset(const std::filesystem::path& edge_path,
                     const std::filesystem::path& label_path) {
  const auto edge_pairs = read_int_pairs(edge_path);
  const auto label_pairs = read_int_pairs(label_path);

  std::map<std::int64_t, std::int64_t> label_of;
  for (const auto& p : label_pairs) label_of[p.first] = p.second;

  std::vector<std::int64_t> ids;
  ids.reserve(edge_pairs.size() * 2 + label_pairs.size());
  for (const auto& p : edge_pairs) {
    ids.push_back(p.first);
    ids.push_back(p.second);
  }
  for (const auto& p : label_pairs) ids.push_back(p.first);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  std::string missing;
  for (auto id : ids) {
    if (!label_of.contains(id)) missing += (missing.empty() ? "" : ",") + std::to_string(id);
  }
  if (!missing.empty()) {
    throw std::runtime_error(label_path.string() + ": nodes without label: " + missing);
  }

  auto index_of = [&ids](std::int64_t id) {
    return static_cast<NodeId>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };

  std::vector<Edge> edges;
  edges.reserve(edge_pairs.size());
  for (const auto& p : edge_pairs) {
    if (p.first == p.second) {
      throw std::runtime_error(edge_path.string() + ": self-loop on node " + std::to_string(p.first));
    }
    edges.push_back({index_of(p.first), index_of(p.second)});
  }

  std::vector<std::int64_t> label_values;
  for (auto id : ids) label_values.push_back(label_of[id]);
  std::vector<std::int64_t> distinct = label_values;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<Label> compact(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    compact[i] = static_cast<Label>(
        std::lower_bound(distinct.begin(), distinct.end(), label_values[i]) - distinct.begin());
  }

  Dataset d;
  d.graph = build_graph(ids.size(), edges);
  d.labels = LabelAssignment(std::move(compact), std::max<std::size_t>(distinct.size(), 1));
  d.original_ids = std::move(ids);
  d.original_labels = std::move(distinct);
  return d;
}

void write_graph(std::ostream& out, const Graph& g) {
  out << "# nodes " << g.node_count() << " edges " << g.edge_count() << '\n';
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

void write_graph(const std::filesystem::path& path, const Graph& g) {
  auto out = open_output(path);
  write_graph(out, g);
}

void write_labels(std::ostream& out, const LabelAssignment& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << ' ' << labels[i] << '\n';
}

void write_labels(const std::filesystem::path& path, const LabelAssignment& labels) {
  auto out = open_output(path);
  write_labels(out, labels);
}

}  // namespace netpoison
