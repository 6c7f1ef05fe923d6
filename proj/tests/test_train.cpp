#include <cmath>
#include <cstring>
#include <vector>

#include "mvembed/errors.hpp"
#include "mvembed/train.hpp"
#include "mvembed/walks.hpp"
#include "doctest.h"
#include "skipgram_oracle.hpp"

using namespace mvembed;

namespace {

MultiViewGraph two_ring_graph(std::size_t n) {
  std::vector<std::vector<std::pair<NodeId, NodeId>>> edges(2);
  for (std::size_t i = 0; i < n; ++i) {
    edges[0].push_back({NodeId(i), NodeId((i + 1) % n)});
    edges[1].push_back({NodeId(i), NodeId((i + 2) % n)});
  }
  return build_graph(n, edges);
}

PairCorpus small_corpus(const MultiViewGraph& g, std::uint64_t seed) {
  WalkConfig wc;
  wc.walk_length = 6;
  wc.walks_per_node = 3;
  wc.window = 2;
  wc.seed = seed;
  return build_corpus(g, wc);
}

}  // namespace

TEST_CASE("training is deterministic for a fixed seed") {
  auto g = two_ring_graph(12);
  auto corpus = small_corpus(g, 7);
  TrainConfig cfg;
  cfg.total_dim = 16;
  cfg.negatives = 4;
  cfg.epochs = 3;
  cfg.seed = 99;
  auto a = train<float>(g, corpus, cfg);
  auto b = train<float>(g, corpus, cfg);
  for (std::size_t v = 0; v < 2; ++v) {
    CHECK(a.tables.center[v] == b.tables.center[v]);
    CHECK(a.tables.context[v] == b.tables.context[v]);
  }
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t e = 0; e < a.trace.size(); ++e)
    CHECK(a.trace[e].total == b.trace[e].total);
}

TEST_CASE_TEMPLATE("alpha=beta=0 matches independent single-view skip-gram",
                   Scalar, float, double) {
  auto g = two_ring_graph(12);
  auto corpus = small_corpus(g, 7);
  TrainConfig cfg;
  cfg.alpha = 0;
  cfg.beta = 0;
  cfg.total_dim = 16;  // per-view dim 8
  cfg.negatives = 5;
  cfg.epochs = 3;
  cfg.seed = 321;
  auto res = train<Scalar>(g, corpus, cfg);
  REQUIRE(res.tables.dim == 8);
  for (std::size_t v = 0; v < 2; ++v) {
    auto oracle = sgoracle::train_single_view<Scalar>(
        g.num_nodes, res.tables.dim, corpus.pairs[v], v, cfg.epochs,
        cfg.negatives, cfg.seed, cfg.lr, cfg.adam_beta1, cfg.adam_beta2,
        cfg.adam_eps);
    REQUIRE(oracle.center.size() == res.tables.center[v].size());
    CHECK(std::memcmp(oracle.center.data(), res.tables.center[v].data(),
                      oracle.center.size() * sizeof(Scalar)) == 0);
    CHECK(std::memcmp(oracle.context.data(), res.tables.context[v].data(),
                      oracle.context.size() * sizeof(Scalar)) == 0);
  }
}

TEST_CASE("per-view dimension is the floor of total_dim over view count") {
  std::vector<std::vector<std::pair<NodeId, NodeId>>> edges(3);
  for (std::size_t v = 0; v < 3; ++v)
    for (NodeId i = 0; i + 1 < 6; ++i) edges[v].push_back({i, NodeId(i + 1)});
  auto g = build_graph(6, edges);

  TrainConfig cfg;
  cfg.total_dim = 128;
  auto t = init_params<double>(g, cfg);
  CHECK(t.dim == 42);
  auto agg = aggregate(t, g.node_names);
  CHECK(agg.dim == 126);

  cfg.total_dim = 2;
  CHECK_THROWS_AS(init_params<double>(g, cfg), InputError);
}

TEST_CASE("aggregate concatenates per-view center blocks in view order") {
  auto g = two_ring_graph(5);
  TrainConfig cfg;
  cfg.total_dim = 6;  // per-view dim 3
  auto t = init_params<double>(g, cfg);
  auto agg = aggregate(t, g.node_names);
  REQUIRE(agg.dim == 6);
  REQUIRE(agg.num_nodes == 5);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t v = 0; v < 2; ++v)
      for (std::size_t k = 0; k < 3; ++k)
        CHECK(agg.row(i)[v * 3 + k] ==
              static_cast<double>(t.center[v][i * 3 + k]));
}

TEST_CASE("loss trace is exact on small graphs and improves over training") {
  auto g = two_ring_graph(16);
  auto corpus = small_corpus(g, 3);
  TrainConfig cfg;
  cfg.total_dim = 16;
  cfg.negatives = 5;
  cfg.epochs = 8;
  cfg.seed = 5;
  auto res = train<double>(g, corpus, cfg);
  REQUIRE(res.trace.size() == 8);
  for (const auto& e : res.trace) {
    CHECK(e.exact);
    CHECK(std::isfinite(e.total));
    CHECK(e.total ==
          doctest::Approx(e.div + cfg.alpha * e.c1 + cfg.beta * e.c2));
  }
  CHECK(res.trace.back().total < res.trace.front().total);
}

TEST_CASE("sampled surrogate trace is used above the exact-loss threshold") {
  auto g = two_ring_graph(16);
  auto corpus = small_corpus(g, 3);
  TrainConfig cfg;
  cfg.total_dim = 8;
  cfg.epochs = 2;
  cfg.exact_loss_threshold = 4;
  auto res = train<double>(g, corpus, cfg);
  for (const auto& e : res.trace) {
    CHECK_FALSE(e.exact);
    CHECK(std::isfinite(e.total));
  }
}

TEST_CASE("early stopping cuts the trace short when loss plateaus") {
  auto g = two_ring_graph(10);
  auto corpus = small_corpus(g, 2);
  TrainConfig cfg;
  cfg.total_dim = 8;
  cfg.epochs = 12;
  cfg.early_stop = true;
  cfg.early_stop_tol = 1e9;  // any change counts as a plateau
  auto res = train<double>(g, corpus, cfg);
  CHECK(res.trace.size() == 2);
}

TEST_CASE("divergence to non-finite parameters is reported, not returned") {
  auto g = two_ring_graph(10);
  auto corpus = small_corpus(g, 2);
  TrainConfig cfg;
  cfg.total_dim = 8;
  cfg.epochs = 4;
  cfg.lr = 1e305;  // force overflow within a few updates
  CHECK_THROWS_AS(train<double>(g, corpus, cfg), InternalError);
}

TEST_CASE("multi-threaded sweep produces finite tables") {
  auto g = two_ring_graph(20);
  auto corpus = small_corpus(g, 11);
  TrainConfig cfg;
  cfg.total_dim = 8;
  cfg.epochs = 2;
  cfg.threads = 4;
  auto res = train<float>(g, corpus, cfg);
  CHECK(res.tables.all_finite());
}

TEST_CASE("exact-softmax training runs and reduces the exact loss") {
  auto g = two_ring_graph(10);
  auto corpus = small_corpus(g, 13);
  TrainConfig cfg;
  cfg.total_dim = 8;
  cfg.epochs = 5;
  auto res = train_exact<double>(g, corpus, cfg);
  REQUIRE(res.trace.size() == 5);
  CHECK(res.tables.all_finite());
  CHECK(res.trace.back().total < res.trace.front().total);
}
