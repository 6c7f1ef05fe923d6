#include <cmath>
#include <vector>

#include "doctest.h"
#include "mvembed/attention.hpp"
#include "mvembed/graph.hpp"
#include "mvembed/rng.hpp"

using namespace mvembed;

namespace {

MultiViewGraph line_graph(std::size_t n, std::size_t views) {
  std::vector<std::vector<std::pair<NodeId, NodeId>>> edges(views);
  for (std::size_t v = 0; v < views; ++v)
    for (NodeId i = 0; i + 1 < n; ++i) edges[v].push_back({i, NodeId(i + 1)});
  return build_graph(n, edges);
}

EmbeddingTables<double> random_tables(std::size_t views, std::size_t n,
                                      std::size_t dim, std::uint64_t seed) {
  EmbeddingTables<double> t;
  t.num_views = views;
  t.num_nodes = n;
  t.dim = dim;
  t.center.resize(views);
  t.context.resize(views);
  auto rng = make_stream(seed, "test_tables");
  for (std::size_t v = 0; v < views; ++v) {
    t.center[v].resize(n * dim);
    t.context[v].assign(n * dim, 0.0);
    for (auto& x : t.center[v]) x = uniform_range(rng, -0.8, 0.8);
  }
  return t;
}

LabelSet node_labels(std::vector<int> classes, std::size_t num_classes) {
  LabelSet ls;
  ls.task_kind = TaskKind::NodeClass;
  ls.num_classes = num_classes;
  ls.num_folds = 1;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    ls.items.push_back({NodeId(i), NodeId(i)});
    ls.classes.push_back(classes[i]);
    ls.folds.push_back(0);
  }
  return ls;
}

}  // namespace

TEST_CASE("attention score collapses to the bias when z2 is zero") {
  auto p = init_attention<double>(2, 4, 2, 1);
  for (auto& z : p.z2) std::fill(z.begin(), z.end(), 0.0);
  p.b2 = {1.5, -0.25};
  std::vector<double> f = {0.3, -0.7, 2.0, 0.1};
  CHECK(attention_score(p, f, 0) == doctest::Approx(1.5));
  CHECK(attention_score(p, f, 1) == doctest::Approx(-0.25));
}

TEST_CASE("attention score at a zero embedding is z2 . tanh(b1) + b2") {
  auto p = init_attention<double>(1, 3, 2, 2);
  p.z2[0] = {1.0, 2.0, 3.0};
  p.b1[0] = 0.5;
  p.b2[0] = 0.25;
  std::vector<double> f = {0.0, 0.0, 0.0};
  CHECK(attention_score(p, f, 0) ==
        doctest::Approx(6.0 * std::tanh(0.5) + 0.25));
}

TEST_CASE("attention weights: singleton, symmetry, and a closed form") {
  auto p = init_attention<double>(1, 2, 2, 3);
  std::vector<double> f = {0.4, -0.2};
  auto w1 = attention_weights(p, f);
  REQUIRE(w1.size() == 1);
  CHECK(w1[0] == doctest::Approx(1.0));

  auto p2 = init_attention<double>(2, 2, 2, 3);
  p2.z1[1] = p2.z1[0];
  p2.z2[1] = p2.z2[0];
  auto w2 = attention_weights(p2, f);
  CHECK(w2[0] == doctest::Approx(0.5));
  CHECK(w2[1] == doctest::Approx(0.5));

  // scores (log 2, 0) by construction: zero weights, biases log 2 and 0
  auto p3 = init_attention<double>(2, 2, 2, 4);
  for (auto& z : p3.z2) std::fill(z.begin(), z.end(), 0.0);
  p3.b2 = {std::log(2.0), 0.0};
  auto w3 = attention_weights(p3, f);
  CHECK(w3[0] == doctest::Approx(2.0 / 3.0));
  CHECK(w3[1] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("attention weights are invariant to a constant score shift") {
  auto p = init_attention<double>(3, 6, 2, 5);
  auto t = random_tables(3, 4, 2, 6);
  auto before = attention_forward(p, t, 1).weights;
  for (auto& b : p.b2) b += 7.5;
  auto after = attention_forward(p, t, 1).weights;
  for (std::size_t v = 0; v < 3; ++v)
    CHECK(after[v] == doctest::Approx(before[v]).epsilon(1e-12));
}

TEST_CASE("aggregation applies tanh(weight * f) blockwise") {
  auto p = init_attention<double>(2, 4, 2, 7);
  for (auto& z : p.z2) std::fill(z.begin(), z.end(), 0.0);
  p.b2 = {std::log(3.0), 0.0};  // weights (0.75, 0.25)
  auto t = random_tables(2, 3, 2, 8);
  auto fa = attention_aggregate(p, t, 2);
  REQUIRE(fa.size() == 4);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(fa[k] == doctest::Approx(std::tanh(0.75 * t.center[0][2 * 2 + k])));
    CHECK(fa[2 + k] ==
          doctest::Approx(std::tanh(0.25 * t.center[1][2 * 2 + k])));
    CHECK(std::abs(fa[k]) < 1.0);
    CHECK(std::abs(fa[2 + k]) < 1.0);
  }
}

TEST_CASE("supervised loss is log C for an uninformative head") {
  auto t = random_tables(2, 5, 3, 9);
  auto p = init_attention<double>(2, 6, 4, 10);
  std::fill(p.head_w.begin(), p.head_w.end(), 0.0);
  auto ls = node_labels({0, 1, 2, 3, 0}, 4);
  CHECK(att_loss_value(p, t, ls, -1) == doctest::Approx(std::log(4.0)));
}

TEST_CASE("supervised loss vanishes when the head saturates the true class") {
  auto t = random_tables(2, 4, 3, 11);
  auto p = init_attention<double>(2, 6, 2, 12);
  std::fill(p.head_w.begin(), p.head_w.end(), 0.0);
  p.head_b = {50.0, 0.0};
  auto ls = node_labels({0, 0, 0, 0}, 2);
  CHECK(att_loss_value(p, t, ls, -1) < 1e-8);
}

TEST_CASE("held-out fold is excluded from the supervised loss") {
  auto t = random_tables(1, 4, 2, 13);
  auto p = init_attention<double>(1, 2, 2, 14);
  auto ls = node_labels({0, 1, 0, 1}, 2);
  ls.num_folds = 2;
  ls.folds = {0, 0, 1, 1};
  // make item losses differ across folds via the head bias
  p.head_b = {2.0, 0.0};
  double all = att_loss_value(p, t, ls, -1);
  double f0 = att_loss_value(p, t, ls, 0);  // trains on fold-1 items
  double f1 = att_loss_value(p, t, ls, 1);
  CHECK(all == doctest::Approx(0.5 * (f0 + f1)));
}

TEST_CASE_TEMPLATE("supervised gradients match finite differences", Task,
                   std::integral_constant<int, 0>,
                   std::integral_constant<int, 1>) {
  const bool pair_task = Task::value == 1;
  auto t = random_tables(2, 4, 3, 15);
  auto p = init_attention<double>(2, 6, 3, 16);

  LabelSet ls;
  ls.num_classes = 3;
  ls.num_folds = 1;
  if (pair_task) {
    ls.task_kind = TaskKind::PairClass;
    ls.items = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  } else {
    ls.task_kind = TaskKind::NodeClass;
    ls.items = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  }
  ls.classes = {0, 1, 2, 1};
  ls.folds = {0, 0, 0, 0};

  auto result = loss_att(p, t, ls, -1);
  const double h = 1e-5;
  double worst = 0;
  // the scale floor keeps finite-difference roundoff on near-zero gradients
  // from registering as relative error
  auto check = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double lp = att_loss_value(p, t, ls, -1);
    param = saved - h;
    const double lm = att_loss_value(p, t, ls, -1);
    param = saved;
    const double fd = (lp - lm) / (2 * h);
    const double scale = std::max({std::abs(fd), std::abs(analytic), 1e-3});
    worst = std::max(worst, std::abs(fd - analytic) / scale);
  };
  for (std::size_t v = 0; v < 2; ++v) {
    for (std::size_t k = 0; k < 6; ++k) {
      check(p.z1[v][k], result.grads.z1[v][k]);
      check(p.z2[v][k], result.grads.z2[v][k]);
    }
    check(p.b1[v], result.grads.b1[v]);
    check(p.b2[v], result.grads.b2[v]);
    for (std::size_t idx = 0; idx < t.center[v].size(); ++idx)
      check(t.center[v][idx], result.grads.center[v][idx]);
  }
  for (std::size_t k = 0; k < p.head_w.size(); ++k)
    check(p.head_w[k], result.grads.head_w[k]);
  for (std::size_t c = 0; c < 3; ++c)
    check(p.head_b[c], result.grads.head_b[c]);
  CHECK(worst < 1e-5);
}

TEST_CASE("gamma = 0 reduces joint training to the unsupervised trainer") {
  auto g = line_graph(8, 2);
  WalkConfig wc;
  wc.walk_length = 5;
  wc.walks_per_node = 2;
  wc.window = 2;
  wc.seed = 17;
  auto corpus = build_corpus(g, wc);
  TrainConfig cfg;
  cfg.total_dim = 8;
  cfg.epochs = 3;
  cfg.seed = 18;
  auto ls = node_labels({0, 1, 0, 1, 0, 1, 0, 1}, 2);

  auto plain = train<double>(g, corpus, cfg);
  auto plus = train_plus<double>(g, corpus, ls, cfg, 0.0);
  for (std::size_t v = 0; v < 2; ++v) {
    CHECK(plus.tables.center[v] == plain.tables.center[v]);
    CHECK(plus.tables.context[v] == plain.tables.context[v]);
  }
  auto fresh = init_attention<double>(2, 8, 2, cfg.seed);
  CHECK(plus.params.z1 == fresh.z1);
  CHECK(plus.params.head_w == fresh.head_w);
  for (double a : plus.att_trace) CHECK(a == 0.0);
}

TEST_CASE("joint training moves attention parameters and keeps them finite") {
  auto g = line_graph(8, 2);
  WalkConfig wc;
  wc.walk_length = 5;
  wc.walks_per_node = 2;
  wc.window = 2;
  wc.seed = 19;
  auto corpus = build_corpus(g, wc);
  TrainConfig cfg;
  cfg.total_dim = 8;
  cfg.epochs = 4;
  cfg.seed = 20;
  auto ls = node_labels({0, 1, 0, 1, 0, 1, 0, 1}, 2);

  auto plus = train_plus<double>(g, corpus, ls, cfg, 100.0);
  CHECK(plus.params.all_finite());
  CHECK(plus.tables.all_finite());
  auto fresh = init_attention<double>(2, 8, 2, cfg.seed);
  CHECK(plus.params.head_w != fresh.head_w);
  REQUIRE(plus.att_trace.size() == 4);
  CHECK(plus.att_trace.back() < plus.att_trace.front());
  // weight rows are normalized
  for (std::size_t i = 0; i < 8; ++i)
    CHECK(plus.weights[i * 2] + plus.weights[i * 2 + 1] ==
          doctest::Approx(1.0));
  CHECK(plus.attention_embeddings.dim == 8);
}
