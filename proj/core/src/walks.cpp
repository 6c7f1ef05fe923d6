#include "mvembed/walks.hpp"

#include <fstream>
#include <numeric>
#include <thread>

#include "mvembed/errors.hpp"
#include "mvembed/rng.hpp"

namespace mvembed {

void WalkConfig::validate() const {
  if (walk_length < 1) throw InputError("walk_length must be >= 1");
  if (walks_per_node < 1) throw InputError("walks_per_node must be >= 1");
  if (window < 1) throw InputError("window must be >= 1");
  if (threads < 1) throw InputError("threads must be >= 1");
}

std::size_t PairCorpus::total() const {
  std::size_t n = 0;
  for (const auto& p : pairs) n += p.size();
  return n;
}

namespace {

void walk_from(const MultiViewGraph& graph, std::size_t view, NodeId start,
               std::size_t length, std::mt19937_64& rng,
               std::vector<NodeId>& out) {
  out.clear();
  out.push_back(start);
  NodeId cur = start;
  for (std::size_t step = 1; step < length; ++step) {
    const auto& nbrs = graph.adjacency[view][cur];
    // an undirected walk never strands: the previous node is always a neighbor
    cur = nbrs[uniform_index(rng, nbrs.size())];
    out.push_back(cur);
  }
}

}  // namespace

std::vector<std::vector<NodeId>> sample_walks(const MultiViewGraph& graph,
                                              std::size_t view,
                                              const WalkConfig& cfg) {
  cfg.validate();
  if (view >= graph.num_views()) throw InputError("view index out of range");

  std::vector<NodeId> starts;
  for (NodeId i = 0; i < graph.num_nodes; ++i)
    if (graph.degree(view, i) > 0) starts.push_back(i);

  std::vector<std::vector<NodeId>> walks(starts.size() * cfg.walks_per_node);
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      for (std::size_t w = 0; w < cfg.walks_per_node; ++w) {
        auto rng = make_stream(cfg.seed, "walk", view, starts[s], w);
        walk_from(graph, view, starts[s], cfg.walk_length, rng,
                  walks[s * cfg.walks_per_node + w]);
      }
    }
  };

  if (cfg.threads == 1 || starts.size() < 64) {
    run(0, starts.size());
  } else {
    std::size_t nthreads = static_cast<std::size_t>(cfg.threads);
    std::vector<std::thread> pool;
    std::size_t chunk = (starts.size() + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t) {
      std::size_t b = t * chunk;
      std::size_t e = std::min(starts.size(), b + chunk);
      if (b < e) pool.emplace_back(run, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return walks;
}

std::vector<Pair> generate_pairs(const std::vector<std::vector<NodeId>>& walks,
                                 std::size_t window) {
  std::vector<Pair> out;
  for (const auto& walk : walks) {
    const std::size_t n = walk.size();
    for (std::size_t p = 0; p < n; ++p) {
      std::size_t lo = p >= window ? p - window : 0;
      std::size_t hi = std::min(n - 1, p + window);
      for (std::size_t q = lo; q <= hi; ++q)
        if (q != p) out.push_back({walk[p], walk[q]});
    }
  }
  return out;
}

PairCorpus build_corpus(const MultiViewGraph& graph, const WalkConfig& cfg) {
  PairCorpus corpus;
  corpus.pairs.resize(graph.num_views());
  for (std::size_t v = 0; v < graph.num_views(); ++v)
    corpus.pairs[v] = generate_pairs(sample_walks(graph, v, cfg), cfg.window);
  return corpus;
}

void write_walks(const std::vector<std::vector<NodeId>>& walks,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  for (const auto& walk : walks) {
    for (std::size_t i = 0; i < walk.size(); ++i)
      out << (i ? " " : "") << walk[i];
    out << '\n';
  }
}

}  // namespace mvembed
