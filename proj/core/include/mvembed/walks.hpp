#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvembed/graph.hpp"

namespace mvembed {

struct WalkConfig {
  std::size_t walk_length = 10;    // steps per walk (number of nodes)
  std::size_t walks_per_node = 5;
  std::size_t window = 3;          // context radius
  std::uint64_t seed = 42;
  int threads = 1;

  void validate() const;
};

// (center, context) pair
struct Pair {
  NodeId center;
  NodeId context;
};

// The materialized intra-view pair sets, one per view. Materialized rather
// than streamed because training shuffles each view's pairs every epoch.
struct PairCorpus {
  std::vector<std::vector<Pair>> pairs;  // per view

  std::size_t num_views() const { return pairs.size(); }
  std::size_t count(std::size_t view) const { return pairs[view].size(); }
  std::size_t total() const;
};

// Truncated uniform random walks in one view, walks_per_node per node with
// degree >= 1. Each walk's RNG stream is derived from (seed, view, node,
// walk index), so output is independent of scheduling.
std::vector<std::vector<NodeId>> sample_walks(const MultiViewGraph& graph,
                                              std::size_t view,
                                              const WalkConfig& cfg);

// Skip-gram pair extraction: for each position p emit (walk[p], walk[q]) for
// all q != p with |q - p| <= window.
std::vector<Pair> generate_pairs(const std::vector<std::vector<NodeId>>& walks,
                                 std::size_t window);

// sample_walks + generate_pairs over every view.
PairCorpus build_corpus(const MultiViewGraph& graph, const WalkConfig& cfg);

// One walk per line, space-separated node indices.
void write_walks(const std::vector<std::vector<NodeId>>& walks,
                 const std::string& path);

}  // namespace mvembed
