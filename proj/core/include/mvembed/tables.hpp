#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mvembed/errors.hpp"
#include "mvembed/graph.hpp"
#include "mvembed/rng.hpp"

namespace mvembed {

struct TrainConfig {
  double alpha = 1.0;            // weight of the first-order collaboration loss
  double beta = 1.0;             // weight of the second-order collaboration loss
  std::size_t total_dim = 128;   // final dimension D; per-view dim is D/|V|
  std::size_t negatives = 10;    // K negatives per positive
  double lr = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t epochs = 10;
  std::uint64_t seed = 42;
  bool exact_updates = false;    // full-softmax updates instead of sampling
  bool early_stop = false;       // stop when epoch loss improves < early_stop_tol
  double early_stop_tol = 1e-4;
  std::size_t exact_loss_threshold = 256;  // trace exact loss when |U| <= this
  int threads = 1;

  void validate() const {
    if (alpha < 0 || beta < 0) throw InputError("alpha and beta must be >= 0");
    if (negatives < 1) throw InputError("negatives must be >= 1");
    if (epochs < 1) throw InputError("epochs must be >= 1");
    if (lr <= 0) throw InputError("learning rate must be > 0");
    if (threads < 1) throw InputError("threads must be >= 1");
  }
};

// Per-view center and context vectors; the full trainable parameter set of
// the unsupervised model.
template <typename Scalar>
struct EmbeddingTables {
  std::size_t num_views = 0;
  std::size_t num_nodes = 0;
  std::size_t dim = 0;  // per-view dimension, floor(D/|V|)
  std::vector<std::vector<Scalar>> center;   // [view], flat num_nodes * dim
  std::vector<std::vector<Scalar>> context;  // [view], flat num_nodes * dim

  std::span<Scalar> center_row(std::size_t v, NodeId i) {
    return {center[v].data() + std::size_t(i) * dim, dim};
  }
  std::span<const Scalar> center_row(std::size_t v, NodeId i) const {
    return {center[v].data() + std::size_t(i) * dim, dim};
  }
  std::span<Scalar> context_row(std::size_t v, NodeId i) {
    return {context[v].data() + std::size_t(i) * dim, dim};
  }
  std::span<const Scalar> context_row(std::size_t v, NodeId i) const {
    return {context[v].data() + std::size_t(i) * dim, dim};
  }

  bool all_finite() const {
    auto ok = [](const std::vector<std::vector<Scalar>>& tabs) {
      for (const auto& t : tabs)
        for (Scalar x : t)
          if (!std::isfinite(static_cast<double>(x))) return false;
      return true;
    };
    return ok(center) && ok(context);
  }
};

// Centers i.i.d. uniform on [-0.5/d, 0.5/d], contexts zero. One init stream
// per view, filled in node-major order.
template <typename Scalar>
EmbeddingTables<Scalar> init_params(const MultiViewGraph& graph,
                                    const TrainConfig& cfg) {
  cfg.validate();
  const std::size_t num_views = graph.num_views();
  if (num_views == 0) throw InputError("graph has no views");
  const std::size_t dim = cfg.total_dim / num_views;
  if (dim == 0)
    throw InputError("dimension " + std::to_string(cfg.total_dim) +
                     " is smaller than the number of views " +
                     std::to_string(num_views));

  EmbeddingTables<Scalar> t;
  t.num_views = num_views;
  t.num_nodes = graph.num_nodes;
  t.dim = dim;
  t.center.resize(num_views);
  t.context.resize(num_views);
  const double bound = 0.5 / static_cast<double>(dim);
  for (std::size_t v = 0; v < num_views; ++v) {
    t.center[v].resize(graph.num_nodes * dim);
    t.context[v].assign(graph.num_nodes * dim, Scalar(0));
    auto rng = make_stream(cfg.seed, "init", v);
    for (auto& x : t.center[v])
      x = static_cast<Scalar>(uniform_range(rng, -bound, bound));
  }
  return t;
}

// Final embeddings: concatenation of the per-view center vectors.
struct FinalEmbeddings {
  std::size_t num_nodes = 0;
  std::size_t dim = 0;  // |V| * per-view dim
  std::vector<double> data;  // flat num_nodes * dim
  std::vector<std::string> node_names;

  std::span<const double> row(NodeId i) const {
    return {data.data() + std::size_t(i) * dim, dim};
  }
  std::span<double> row(NodeId i) {
    return {data.data() + std::size_t(i) * dim, dim};
  }
};

template <typename Scalar>
FinalEmbeddings aggregate(const EmbeddingTables<Scalar>& tables,
                          const std::vector<std::string>& node_names) {
  FinalEmbeddings out;
  out.num_nodes = tables.num_nodes;
  out.dim = tables.num_views * tables.dim;
  out.data.resize(out.num_nodes * out.dim);
  out.node_names = node_names;
  for (NodeId i = 0; i < tables.num_nodes; ++i) {
    double* dst = out.data.data() + std::size_t(i) * out.dim;
    for (std::size_t v = 0; v < tables.num_views; ++v) {
      auto src = tables.center_row(v, i);
      for (std::size_t k = 0; k < tables.dim; ++k)
        dst[v * tables.dim + k] = static_cast<double>(src[k]);
    }
  }
  return out;
}

}  // namespace mvembed
