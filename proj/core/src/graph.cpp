#include "mvembed/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "mvembed/errors.hpp"
#include "mvembed/log.hpp"
#include "mvembed/rng.hpp"

namespace mvembed {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  // also tolerate space-separated input
  if (out.size() == 1) {
    out.clear();
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
  }
  return out;
}

bool is_comment_or_blank(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

bool parse_index(const std::string& s, NodeId& out) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return false;
  out = static_cast<NodeId>(v);
  return true;
}

struct EdgeSink {
  std::set<std::pair<NodeId, NodeId>> edges;
  std::size_t dup_warned = 0, loop_warned = 0;

  void add(NodeId a, NodeId b, const std::string& where) {
    if (a == b) {
      if (loop_warned++ < 10)
        log::warn("dropping self-loop on node " + std::to_string(a) + " (" +
                  where + ")");
      return;
    }
    if (a > b) std::swap(a, b);
    if (!edges.insert({a, b}).second) {
      if (dup_warned++ < 10)
        log::warn("ignoring duplicate edge " + std::to_string(a) + "-" +
                  std::to_string(b) + " (" + where + ")");
    }
  }
};

void finalize_view(MultiViewGraph& g, std::size_t view, const EdgeSink& sink) {
  auto& adj = g.adjacency[view];
  adj.assign(g.num_nodes, {});
  for (auto [a, b] : sink.edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
  g.edge_counts[view] = sink.edges.size();
}

}  // namespace

bool MultiViewGraph::has_edge(std::size_t view, NodeId a, NodeId b) const {
  const auto& nbrs = adjacency[view][a];
  return std::binary_search(nbrs.begin(), nbrs.end(), b);
}

std::size_t MultiViewGraph::total_edges() const {
  return std::accumulate(edge_counts.begin(), edge_counts.end(),
                         std::size_t{0});
}

void MultiViewGraph::validate() const {
  if (adjacency.size() != edge_counts.size())
    throw InternalError("graph: view count mismatch");
  for (std::size_t v = 0; v < adjacency.size(); ++v) {
    if (adjacency[v].size() != num_nodes)
      throw InternalError("graph: adjacency size mismatch in view " +
                          std::to_string(v));
    std::size_t half_degree_sum = 0;
    for (NodeId i = 0; i < num_nodes; ++i) {
      const auto& nbrs = adjacency[v][i];
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        NodeId j = nbrs[k];
        if (j >= num_nodes)
          throw InternalError("graph: edge endpoint out of range");
        if (j == i) throw InternalError("graph: self-loop survived");
        if (k > 0 && nbrs[k - 1] >= j)
          throw InternalError("graph: neighbor list not strictly sorted");
        if (!has_edge(v, j, i))
          throw InternalError("graph: asymmetric adjacency");
      }
      half_degree_sum += nbrs.size();
    }
    if (half_degree_sum != 2 * edge_counts[v])
      throw InternalError("graph: edge count does not match degree sum");
  }
}

MultiViewGraph load_graph(const std::vector<std::string>& edge_files,
                          NodeMapPolicy policy) {
  if (edge_files.empty()) throw InputError("no edge files given");

  MultiViewGraph g;
  auto intern = [&](const std::string& name) -> NodeId {
    if (policy == NodeMapPolicy::Strict) {
      NodeId idx;
      if (!parse_index(name, idx))
        throw InputError("strict node map: '" + name +
                         "' is not a non-negative integer index");
      return idx;
    }
    auto it = g.node_index.find(name);
    if (it != g.node_index.end()) return it->second;
    NodeId idx = static_cast<NodeId>(g.node_names.size());
    g.node_index.emplace(name, idx);
    g.node_names.push_back(name);
    return idx;
  };

  // parse all views first so the node namespace is the union over views
  std::vector<std::vector<std::pair<NodeId, NodeId>>> raw(edge_files.size());
  NodeId max_index = 0;
  bool any_edge = false;
  std::size_t extra_col_warned = 0;
  for (std::size_t v = 0; v < edge_files.size(); ++v) {
    std::ifstream in(edge_files[v]);
    if (!in) throw InputError("cannot read edge file: " + edge_files[v]);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (is_comment_or_blank(line)) continue;
      auto fields = split_fields(line);
      if (fields.size() < 2)
        throw InputError(edge_files[v] + ":" + std::to_string(lineno) +
                         ": expected 'src<TAB>dst'");
      if (fields.size() > 2 && extra_col_warned++ < 10)
        log::warn(edge_files[v] + ":" + std::to_string(lineno) +
                  ": ignoring columns beyond src/dst (edges are unweighted)");
      NodeId a = intern(fields[0]);
      NodeId b = intern(fields[1]);
      max_index = std::max({max_index, a, b});
      any_edge = true;
      raw[v].emplace_back(a, b);
    }
  }

  if (policy == NodeMapPolicy::Strict) {
    g.num_nodes = any_edge ? static_cast<std::size_t>(max_index) + 1 : 0;
    g.node_names.resize(g.num_nodes);
    for (NodeId i = 0; i < g.num_nodes; ++i) {
      g.node_names[i] = std::to_string(i);
      g.node_index.emplace(g.node_names[i], i);
    }
  } else {
    g.num_nodes = g.node_names.size();
  }

  g.adjacency.resize(edge_files.size());
  g.edge_counts.resize(edge_files.size());
  g.view_names = edge_files;
  for (std::size_t v = 0; v < raw.size(); ++v) {
    EdgeSink sink;
    for (auto [a, b] : raw[v]) sink.add(a, b, edge_files[v]);
    finalize_view(g, v, sink);
  }
  g.validate();
  return g;
}

MultiViewGraph build_graph(
    std::size_t num_nodes,
    const std::vector<std::vector<std::pair<NodeId, NodeId>>>& view_edges) {
  MultiViewGraph g;
  g.num_nodes = num_nodes;
  g.node_names.resize(num_nodes);
  for (NodeId i = 0; i < num_nodes; ++i) {
    g.node_names[i] = std::to_string(i);
    g.node_index.emplace(g.node_names[i], i);
  }
  g.adjacency.resize(view_edges.size());
  g.edge_counts.resize(view_edges.size());
  for (std::size_t v = 0; v < view_edges.size(); ++v) {
    g.view_names.push_back("view" + std::to_string(v + 1));
    EdgeSink sink;
    for (auto [a, b] : view_edges[v]) {
      if (a >= num_nodes || b >= num_nodes)
        throw InputError("edge endpoint out of range");
      sink.add(a, b, g.view_names[v]);
    }
    finalize_view(g, v, sink);
  }
  g.validate();
  return g;
}

void write_edge_lists(const MultiViewGraph& g,
                      const std::vector<std::string>& paths) {
  if (paths.size() != g.num_views())
    throw InputError("need one output path per view");
  for (std::size_t v = 0; v < paths.size(); ++v) {
    std::ofstream out(paths[v]);
    if (!out) throw InputError("cannot write " + paths[v]);
    for (NodeId i = 0; i < g.num_nodes; ++i)
      for (NodeId j : g.adjacency[v][i])
        if (i < j) out << g.node_names[i] << '\t' << g.node_names[j] << '\n';
  }
}

void write_node_map(const MultiViewGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  for (NodeId i = 0; i < g.num_nodes; ++i)
    out << g.node_names[i] << '\t' << i << '\n';
}

LabelSet make_label_set(TaskKind task_kind,
                        std::vector<std::pair<NodeId, NodeId>> items,
                        std::vector<int> classes, std::size_t num_folds,
                        std::uint64_t seed) {
  if (num_folds < 2) throw InputError("num_folds must be >= 2");
  if (items.size() != classes.size())
    throw InternalError("labels: item/class size mismatch");
  if (items.empty()) throw InputError("label set is empty");

  LabelSet ls;
  ls.task_kind = task_kind;
  ls.items = std::move(items);
  ls.classes = std::move(classes);
  ls.num_folds = num_folds;
  ls.num_classes =
      static_cast<std::size_t>(
          *std::max_element(ls.classes.begin(), ls.classes.end())) +
      1;
  ls.folds.assign(ls.items.size(), -1);

  // stratified assignment: shuffle each class's items, deal them out
  // round-robin starting from a per-class random offset
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < ls.items.size(); ++i)
    by_class[ls.classes[i]].push_back(i);

  for (auto& [cls, idxs] : by_class) {
    auto rng = make_stream(seed, "folds", static_cast<std::uint64_t>(cls));
    std::shuffle(idxs.begin(), idxs.end(), rng);
    if (idxs.size() < num_folds)
      log::warn("class " + std::to_string(cls) + " has " +
                std::to_string(idxs.size()) + " items for " +
                std::to_string(num_folds) + " folds; assigning round-robin");
    std::size_t offset = uniform_index(rng, num_folds);
    for (std::size_t k = 0; k < idxs.size(); ++k)
      ls.folds[idxs[k]] = static_cast<int>((offset + k) % num_folds);
  }
  return ls;
}

LabelSet load_labels(const std::string& path, TaskKind task_kind,
                     const MultiViewGraph& graph, std::size_t num_folds,
                     std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read label file: " + path);

  auto lookup = [&](const std::string& name) -> NodeId {
    auto it = graph.node_index.find(name);
    if (it == graph.node_index.end())
      throw InputError("label file references unknown node '" + name + "'");
    return it->second;
  };

  std::vector<std::pair<NodeId, NodeId>> items;
  std::vector<int> classes;
  std::map<std::string, int> class_ids;
  std::string line;
  std::size_t lineno = 0;
  const std::size_t want =
      task_kind == TaskKind::NodeClass ? std::size_t{2} : std::size_t{3};
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_comment_or_blank(line)) continue;
    auto fields = split_fields(line);
    if (fields.size() < want)
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": expected " + std::to_string(want) + " fields");
    NodeId a = lookup(fields[0]);
    NodeId b = task_kind == TaskKind::PairClass ? lookup(fields[1]) : a;
    const std::string& cls = fields[want - 1];
    auto [it, _] =
        class_ids.emplace(cls, static_cast<int>(class_ids.size()));
    items.emplace_back(a, b);
    classes.push_back(it->second);
  }
  return make_label_set(task_kind, std::move(items), std::move(classes),
                        num_folds, seed);
}

}  // namespace mvembed
