#include "mvembed/analysis.hpp"

#include <algorithm>
#include <fstream>

#include "mvembed/errors.hpp"
#include "mvembed/log.hpp"
#include "mvembed/rng.hpp"

namespace mvembed {

RatioEntry second_order_ratio(const MultiViewGraph& g, std::size_t v,
                              std::size_t v_other) {
  if (v == v_other) throw InputError("second-order ratio needs two distinct views");
  if (v >= g.num_views() || v_other >= g.num_views())
    throw InputError("view index out of range");

  RatioEntry e;
  e.view_a = v;
  e.view_b = v_other;

  const std::size_t n = g.num_nodes;
  const std::size_t total_pairs = n * (n - 1) / 2;
  const std::size_t in_v = g.edge_counts[v];
  if (in_v == 0) {
    e.flag = RatioFlag::UndefinedNumerator;
    return e;
  }

  // count |E^(v) intersect E^(v')| by scanning the smaller view
  std::size_t both = 0;
  const std::size_t scan = g.edge_counts[v] <= g.edge_counts[v_other] ? v : v_other;
  const std::size_t probe = scan == v ? v_other : v;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j : g.adjacency[scan][i])
      if (i < j && g.has_edge(probe, i, j)) ++both;

  const std::size_t only_vp = g.edge_counts[v_other] - both;
  const std::size_t not_in_v = total_pairs - in_v;
  if (only_vp == 0 || not_in_v == 0) {
    e.flag = RatioFlag::UndefinedDenominator;
    return e;
  }
  const double p_given_in =
      static_cast<double>(both) / static_cast<double>(in_v);
  const double p_given_out =
      static_cast<double>(only_vp) / static_cast<double>(not_in_v);
  e.value = p_given_in / p_given_out;
  return e;
}

RatioMatrix ratio_matrix(const MultiViewGraph& g) {
  if (g.num_views() < 2)
    throw InputError("ratio matrix needs >= 2 views");
  RatioMatrix m;
  m.num_views = g.num_views();
  std::vector<double> defined;
  for (std::size_t v = 0; v < m.num_views; ++v)
    for (std::size_t vo = 0; vo < m.num_views; ++vo) {
      if (v == vo) continue;
      RatioEntry e = second_order_ratio(g, v, vo);
      if (e.flag == RatioFlag::Defined)
        defined.push_back(e.value);
      else
        log::warn("ratio(" + std::to_string(v) + "," + std::to_string(vo) +
                  ") undefined");
      m.entries.push_back(e);
    }
  m.defined_count = defined.size();
  if (!defined.empty()) {
    std::sort(defined.begin(), defined.end());
    m.min = defined.front();
    m.max = defined.back();
    const std::size_t k = defined.size();
    m.median = k % 2 ? defined[k / 2]
                     : 0.5 * (defined[k / 2 - 1] + defined[k / 2]);
  }
  return m;
}

void write_ratio_csv(const RatioMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "view,view_other,ratio,flag\n";
  for (const RatioEntry& e : m.entries) {
    out << e.view_a << ',' << e.view_b << ',';
    switch (e.flag) {
      case RatioFlag::Defined:
        out << e.value << ",defined\n";
        break;
      case RatioFlag::UndefinedNumerator:
        out << ",undefined-numerator\n";
        break;
      case RatioFlag::UndefinedDenominator:
        out << ",undefined-denominator\n";
        break;
    }
  }
}

void write_ratio_summary_json(const RatioMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "{\"min\": " << m.min << ", \"max\": " << m.max
      << ", \"median\": " << m.median
      << ", \"defined\": " << m.defined_count << "}\n";
}

void SynthSpec::validate() const {
  if (num_nodes < 4) throw InputError("synthetic graph needs >= 4 nodes");
  if (num_views < 1) throw InputError("need >= 1 view");
  if (num_communities < 1) throw InputError("need >= 1 community");
  for (double p : {p_intra, p_inter, cross_copy, noise})
    if (p < 0 || p > 1) throw InputError("probabilities must be in [0,1]");
  const double expected_degree =
      p_intra * static_cast<double>(num_nodes) /
      static_cast<double>(num_communities);
  if (expected_degree < 1.0)
    log::warn("synthetic spec implies expected intra-community degree < 1");
}

SynthResult generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n = spec.num_nodes;

  SynthResult out;
  out.communities.resize(n);
  auto comm_rng = make_stream(spec.seed, "synth_comm");
  for (std::size_t i = 0; i < n; ++i)
    out.communities[i] =
        static_cast<int>(uniform_index(comm_rng, spec.num_communities));

  std::vector<std::vector<std::pair<NodeId, NodeId>>> views(spec.num_views);
  auto base_rng = make_stream(spec.seed, "synth_base");
  std::vector<std::pair<NodeId, NodeId>> base;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) {
      const double p = out.communities[i] == out.communities[j] ? spec.p_intra
                                                                : spec.p_inter;
      if (uniform_unit(base_rng) < p) base.emplace_back(i, j);
    }
  views[0] = base;

  for (std::size_t v = 1; v < spec.num_views; ++v) {
    auto rng = make_stream(spec.seed, "synth_view", v);
    for (auto [i, j] : base)
      if (uniform_unit(rng) < spec.cross_copy) views[v].emplace_back(i, j);
    auto noise_rng = make_stream(spec.seed, "synth_noise", v);
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = i + 1; j < n; ++j)
        if (uniform_unit(noise_rng) < spec.noise) views[v].emplace_back(i, j);
  }

  out.graph = build_graph(n, views);
  std::vector<std::pair<NodeId, NodeId>> items;
  std::vector<int> classes;
  for (NodeId i = 0; i < n; ++i) {
    items.emplace_back(i, i);
    classes.push_back(out.communities[i]);
  }
  out.labels = make_label_set(TaskKind::NodeClass, std::move(items),
                              std::move(classes), spec.label_folds, spec.seed);
  return out;
}

}  // namespace mvembed
