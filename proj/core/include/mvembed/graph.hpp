#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mvembed {

using NodeId = std::uint32_t;

enum class NodeMapPolicy {
  DenseReindex,  // string names mapped to contiguous indices in first-seen order
  Strict,        // names must already be integer indices
};

// One node set, one undirected edge set per view. Read-only after
// construction; safe to share across threads.
struct MultiViewGraph {
  std::size_t num_nodes = 0;
  std::vector<std::string> view_names;
  // adjacency[v][i] = sorted neighbor list of node i in view v
  std::vector<std::vector<std::vector<NodeId>>> adjacency;
  std::vector<std::size_t> edge_counts;  // |E^(v)|, undirected
  // name <-> index table (identity names under Strict)
  std::vector<std::string> node_names;
  std::unordered_map<std::string, NodeId> node_index;

  std::size_t num_views() const { return adjacency.size(); }
  std::size_t degree(std::size_t view, NodeId node) const {
    return adjacency[view][node].size();
  }
  bool has_edge(std::size_t view, NodeId a, NodeId b) const;
  std::size_t total_edges() const;

  // Throws InternalError if any structural invariant is broken.
  void validate() const;
};

// Reads one tab-separated edge list per view; views share a node namespace.
// Self-loops are dropped and duplicate undirected edges ignored, each with a
// warning. Extra columns beyond src/dst are ignored with a warning.
MultiViewGraph load_graph(const std::vector<std::string>& edge_files,
                          NodeMapPolicy policy);

// Build directly from edge lists over an already-indexed node set.
// Symmetrizes, drops self-loops, dedups.
MultiViewGraph build_graph(
    std::size_t num_nodes,
    const std::vector<std::vector<std::pair<NodeId, NodeId>>>& view_edges);

void write_edge_lists(const MultiViewGraph& g,
                      const std::vector<std::string>& paths);
void write_node_map(const MultiViewGraph& g, const std::string& path);

enum class TaskKind { NodeClass, PairClass };

struct LabelSet {
  TaskKind task_kind = TaskKind::NodeClass;
  // node task: items are (node, node) with second unused; pair task: (src, dst)
  std::vector<std::pair<NodeId, NodeId>> items;
  std::vector<int> classes;       // class id per item
  std::vector<int> folds;         // fold index per item, in [0, num_folds)
  std::size_t num_folds = 0;
  std::size_t num_classes = 0;
};

// Tab-separated "node<TAB>class" or "src<TAB>dst<TAB>class". Stratified fold
// assignment, deterministic given seed. Classes with fewer items than folds
// are spread round-robin with a warning.
LabelSet load_labels(const std::string& path, TaskKind task_kind,
                     const MultiViewGraph& graph, std::size_t num_folds,
                     std::uint64_t seed);

// Same stratification applied to in-memory labels (used by the synthetic
// generator and the eval harness).
LabelSet make_label_set(TaskKind task_kind,
                        std::vector<std::pair<NodeId, NodeId>> items,
                        std::vector<int> classes, std::size_t num_folds,
                        std::uint64_t seed);

}  // namespace mvembed
