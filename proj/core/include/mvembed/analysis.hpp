#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mvembed/graph.hpp"

namespace mvembed {

enum class RatioFlag { Defined, UndefinedNumerator, UndefinedDenominator };

struct RatioEntry {
  std::size_t view_a = 0;
  std::size_t view_b = 0;
  RatioFlag flag = RatioFlag::Defined;
  double value = 0;  // meaningful only when flag == Defined
};

// Link co-occurrence ratio between ordered views (v, v'):
//   P(edge in v' | edge in v) / P(edge in v' | edge not in v)
// estimated by exhaustive counting over all node pairs. Returns the
// undefined-numerator flag when |E^(v)| = 0 and the undefined-denominator
// flag when E^(v') is contained in E^(v).
RatioEntry second_order_ratio(const MultiViewGraph& g, std::size_t v,
                              std::size_t v_other);

struct RatioMatrix {
  std::size_t num_views = 0;
  std::vector<RatioEntry> entries;  // all ordered pairs, row-major
  // summary over defined entries
  double min = 0, max = 0, median = 0;
  std::size_t defined_count = 0;
};

RatioMatrix ratio_matrix(const MultiViewGraph& g);

void write_ratio_csv(const RatioMatrix& m, const std::string& path);
void write_ratio_summary_json(const RatioMatrix& m, const std::string& path);

// Community-planted multi-view generator. View 1 is an SBM-style base view;
// every later view copies each base edge with probability cross_copy and adds
// independent noise edges with probability noise.
struct SynthSpec {
  std::size_t num_nodes = 500;
  std::size_t num_views = 2;
  std::size_t num_communities = 2;
  double p_intra = 0.05;    // base-view edge prob inside a community
  double p_inter = 0.005;   // base-view edge prob across communities
  double cross_copy = 0.5;  // prob a base edge is replicated into a later view
  double noise = 0.005;     // independent edge prob in later views
  std::size_t label_folds = 5;
  std::uint64_t seed = 42;

  void validate() const;
};

struct SynthResult {
  MultiViewGraph graph;
  LabelSet labels;               // node labels = community ids
  std::vector<int> communities;  // per node
};

SynthResult generate_synthetic(const SynthSpec& spec);

}  // namespace mvembed
