#pragma once

#include <algorithm>
#include <string>
#include <thread>
#include <vector>

#include "mvembed/adam.hpp"
#include "mvembed/losses.hpp"
#include "mvembed/tables.hpp"
#include "mvembed/walks.hpp"

namespace mvembed {

// Unigram^(3/4) noise distribution over node occurrences in one view's pair
// set (centers and contexts both count).
class NoiseTable {
 public:
  NoiseTable() = default;
  NoiseTable(const std::vector<Pair>& pairs, std::size_t num_nodes) {
    std::vector<double> counts(num_nodes, 0.0);
    for (const Pair& p : pairs) {
      counts[p.center] += 1.0;
      counts[p.context] += 1.0;
    }
    double total = 0;
    for (std::size_t i = 0; i < num_nodes; ++i) {
      if (counts[i] > 0) {
        nodes_.push_back(static_cast<NodeId>(i));
        total += std::pow(counts[i], 0.75);
        cum_.push_back(total);
      }
    }
  }

  bool empty() const { return nodes_.empty(); }

  NodeId sample(std::mt19937_64& rng) const {
    double x = uniform_unit(rng) * cum_.back();
    auto it = std::upper_bound(cum_.begin(), cum_.end(), x);
    std::size_t idx = std::min<std::size_t>(it - cum_.begin(), nodes_.size() - 1);
    return nodes_[idx];
  }

  // Draws up to k negatives, redrawing on collision with `exclude` (at most
  // 100 attempts per slot, then the slot is skipped).
  void sample_negatives(std::mt19937_64& rng, std::size_t k, NodeId exclude,
                        std::vector<NodeId>& out) const {
    out.clear();
    if (empty()) return;
    for (std::size_t n = 0; n < k; ++n) {
      for (int attempt = 0; attempt < 100; ++attempt) {
        NodeId u = sample(rng);
        if (u != exclude) {
          out.push_back(u);
          break;
        }
      }
    }
  }

 private:
  std::vector<NodeId> nodes_;
  std::vector<double> cum_;
};

// Uniform negatives over the whole node set, same redraw rule. Used for the
// first-order term, whose logits live in the center table where occurrence
// counts are not meaningful frequencies.
inline void uniform_negatives(std::mt19937_64& rng, std::size_t num_nodes,
                              std::size_t k, NodeId exclude,
                              std::vector<NodeId>& out) {
  out.clear();
  if (num_nodes <= 1) return;
  for (std::size_t n = 0; n < k; ++n) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      NodeId u = static_cast<NodeId>(uniform_index(rng, num_nodes));
      if (u != exclude) {
        out.push_back(u);
        break;
      }
    }
  }
}

template <typename Scalar>
struct TrainResult {
  EmbeddingTables<Scalar> tables;
  std::vector<LossBreakdown> trace;  // one entry per completed epoch
};

namespace detail {

template <typename Scalar>
struct UpdateScratch {
  std::vector<Scalar> g_anchor, g_other;
  std::vector<NodeId> negatives;
  std::vector<std::span<const Scalar>> neg_rows;
};

// One sampled-softmax update; anchor/positive/negative rows may live in
// different tables. All gradients are taken at the pre-update parameter
// values of the moment each row is touched, in a fixed order (positive,
// negatives, anchor).
template <typename Scalar>
bool apply_sgns_update(std::vector<Scalar>& anchor_tab, std::size_t anchor_row,
                       std::vector<Scalar>& pos_tab, std::size_t pos_row,
                       std::vector<Scalar>& neg_tab,
                       const std::vector<NodeId>& negatives, double scale,
                       std::size_t dim, AdamTable<Scalar>& anchor_opt,
                       AdamTable<Scalar>& pos_opt, AdamTable<Scalar>& neg_opt,
                       double* loss_out, UpdateScratch<Scalar>& scratch) {
  std::span<Scalar> anchor{anchor_tab.data() + anchor_row * dim, dim};
  std::span<Scalar> positive{pos_tab.data() + pos_row * dim, dim};
  scratch.neg_rows.clear();
  for (NodeId u : negatives)
    scratch.neg_rows.push_back(
        std::span<const Scalar>{neg_tab.data() + std::size_t(u) * dim, dim});

  auto terms = sgns_terms<Scalar>(anchor, positive, scratch.neg_rows);
  *loss_out += terms.loss;

  auto& ga = scratch.g_anchor;
  auto& go = scratch.g_other;
  ga.assign(dim, Scalar(0));
  go.assign(dim, Scalar(0));
  const double pc = scale * terms.pos_coef;
  for (std::size_t k = 0; k < dim; ++k) {
    ga[k] = static_cast<Scalar>(pc * static_cast<double>(positive[k]));
    go[k] = static_cast<Scalar>(pc * static_cast<double>(anchor[k]));
  }
  bool ok = pos_opt.update_row(positive, pos_row, go);
  for (std::size_t n = 0; n < negatives.size(); ++n) {
    const double nc = scale * terms.neg_coefs[n];
    std::span<Scalar> neg{neg_tab.data() + std::size_t(negatives[n]) * dim, dim};
    for (std::size_t k = 0; k < dim; ++k) {
      ga[k] += static_cast<Scalar>(nc * static_cast<double>(neg[k]));
      go[k] = static_cast<Scalar>(nc * static_cast<double>(anchor[k]));
    }
    ok = neg_opt.update_row(neg, negatives[n], go) && ok;
  }
  ok = anchor_opt.update_row(anchor, anchor_row, ga) && ok;
  return ok;
}

}  // namespace detail

// Holds the trainable state and runs one epoch sweep at a time. RNG streams
// are named (seed, tag, view, epoch) with tags "shuffle", "neg_div",
// "neg_c1", "neg_c2"; a loss component that is switched off (alpha or
// beta = 0) consumes nothing from the other components' streams.
template <typename Scalar>
class Trainer {
 public:
  Trainer(const MultiViewGraph& graph, const PairCorpus& corpus,
          const TrainConfig& cfg)
      : cfg_(cfg), pairs_(corpus.pairs) {
    cfg.validate();
    if (corpus.num_views() != graph.num_views())
      throw InputError("corpus/view count mismatch");
    tables_ = init_params<Scalar>(graph, cfg);
    const AdamConfig adam_cfg{cfg.lr, cfg.adam_beta1, cfg.adam_beta2,
                              cfg.adam_eps};
    for (std::size_t v = 0; v < tables_.num_views; ++v) {
      center_opt_.emplace_back(tables_.num_nodes, tables_.dim, adam_cfg);
      context_opt_.emplace_back(tables_.num_nodes, tables_.dim, adam_cfg);
      noise_.emplace_back(corpus.pairs[v], tables_.num_nodes);
    }
  }

  EmbeddingTables<Scalar>& tables() { return tables_; }
  const EmbeddingTables<Scalar>& tables() const { return tables_; }
  AdamTable<Scalar>& center_optimizer(std::size_t v) { return center_opt_[v]; }
  const TrainConfig& config() const { return cfg_; }

  // One full pass of Algorithm-style updates: per view, shuffle pairs, then
  // per pair the diversity update followed by the alpha-scaled first-order
  // and beta-scaled second-order updates against every other view.
  void sweep(std::size_t epoch, double& sum_div, double& sum_c1,
             double& sum_c2) {
    const std::size_t V = tables_.num_views;
    for (std::size_t v = 0; v < V; ++v) {
      auto shuffle_rng = make_stream(cfg_.seed, "shuffle", v, epoch);
      std::shuffle(pairs_[v].begin(), pairs_[v].end(), shuffle_rng);
      if (cfg_.threads == 1) {
        sweep_range(v, epoch, 0, pairs_[v].size(), 0, &sum_div, &sum_c1,
                    &sum_c2);
      } else {
        // hogwild-style sharding: unsynchronized updates, benign races;
        // loss sums are approximate
        const std::size_t nthreads = static_cast<std::size_t>(cfg_.threads);
        const std::size_t chunk = (pairs_[v].size() + nthreads - 1) / nthreads;
        std::vector<std::thread> pool;
        std::vector<double> d(nthreads, 0), c1(nthreads, 0), c2(nthreads, 0);
        for (std::size_t t = 0; t < nthreads; ++t) {
          std::size_t b = t * chunk;
          std::size_t e = std::min(pairs_[v].size(), b + chunk);
          if (b < e)
            pool.emplace_back([&, v, epoch, b, e, t] {
              sweep_range(v, epoch, b, e, t, &d[t], &c1[t], &c2[t]);
            });
        }
        for (auto& th : pool) th.join();
        for (std::size_t t = 0; t < nthreads; ++t) {
          sum_div += d[t];
          sum_c1 += c1[t];
          sum_c2 += c2[t];
        }
      }
    }
  }

 private:
  void sweep_range(std::size_t v, std::size_t epoch, std::size_t begin,
                   std::size_t end, std::uint64_t chunk, double* div_acc,
                   double* c1_acc, double* c2_acc) {
    const std::size_t V = tables_.num_views;
    const std::size_t n = tables_.num_nodes;
    const std::size_t dim = tables_.dim;
    const bool collab = (cfg_.alpha > 0 || cfg_.beta > 0) && V > 1;
    auto rng_div = make_stream(cfg_.seed, "neg_div", v, epoch, chunk);
    auto rng_c1 = make_stream(cfg_.seed, "neg_c1", v, epoch, chunk);
    auto rng_c2 = make_stream(cfg_.seed, "neg_c2", v, epoch, chunk);
    detail::UpdateScratch<Scalar> scratch;
    auto fail = [&](std::size_t p, const char* which) {
      throw InternalError("non-finite parameter (epoch " +
                          std::to_string(epoch) + ", view " +
                          std::to_string(v) + ", pair " + std::to_string(p) +
                          ", " + which + ")");
    };
    for (std::size_t p = begin; p < end; ++p) {
      const Pair pr = pairs_[v][p];
      noise_[v].sample_negatives(rng_div, cfg_.negatives, pr.context,
                                 scratch.negatives);
      if (!detail::apply_sgns_update(
              tables_.center[v], pr.center, tables_.context[v], pr.context,
              tables_.context[v], scratch.negatives, 1.0, dim, center_opt_[v],
              context_opt_[v], context_opt_[v], div_acc, scratch))
        fail(p, "div");
      if (!collab) continue;
      for (std::size_t vo = 0; vo < V; ++vo) {
        if (vo == v) continue;
        if (cfg_.alpha > 0) {
          uniform_negatives(rng_c1, n, cfg_.negatives, pr.center,
                            scratch.negatives);
          double raw = 0;
          bool ok = detail::apply_sgns_update(
              tables_.center[v], pr.center, tables_.center[vo], pr.center,
              tables_.center[vo], scratch.negatives, cfg_.alpha, dim,
              center_opt_[v], center_opt_[vo], center_opt_[vo], &raw, scratch);
          *c1_acc += raw;
          if (!ok) fail(p, "c1");
        }
        if (cfg_.beta > 0) {
          noise_[v].sample_negatives(rng_c2, cfg_.negatives, pr.context,
                                     scratch.negatives);
          double raw = 0;
          bool ok = detail::apply_sgns_update(
              tables_.center[vo], pr.center, tables_.context[v], pr.context,
              tables_.context[v], scratch.negatives, cfg_.beta, dim,
              center_opt_[vo], context_opt_[v], context_opt_[v], &raw,
              scratch);
          *c2_acc += raw;
          if (!ok) fail(p, "c2");
        }
      }
    }
  }

  TrainConfig cfg_;
  EmbeddingTables<Scalar> tables_;
  std::vector<AdamTable<Scalar>> center_opt_, context_opt_;
  std::vector<NoiseTable> noise_;
  std::vector<std::vector<Pair>> pairs_;
};

template <typename Scalar>
TrainResult<Scalar> train(const MultiViewGraph& graph, const PairCorpus& corpus,
                          const TrainConfig& cfg) {
  Trainer<Scalar> trainer(graph, corpus, cfg);
  TrainResult<Scalar> result;
  double prev_total = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double sum_div = 0, sum_c1 = 0, sum_c2 = 0;
    trainer.sweep(epoch, sum_div, sum_c1, sum_c2);

    LossBreakdown epoch_loss;
    if (trainer.tables().num_nodes <= cfg.exact_loss_threshold) {
      epoch_loss = exact_total_loss(trainer.tables(), corpus, cfg.alpha,
                                    cfg.beta);
    } else {
      epoch_loss.div = sum_div;
      epoch_loss.c1 = sum_c1;
      epoch_loss.c2 = sum_c2;
      epoch_loss.total = sum_div + cfg.alpha * sum_c1 + cfg.beta * sum_c2;
      epoch_loss.exact = false;
    }
    result.trace.push_back(epoch_loss);

    if (cfg.early_stop && epoch > 0) {
      const double rel = std::abs(prev_total - epoch_loss.total) /
                         std::max(1.0, std::abs(prev_total));
      if (rel < cfg.early_stop_tol) break;
    }
    prev_total = epoch_loss.total;
  }
  result.tables = std::move(trainer.tables());
  return result;
}

// Full-softmax update sweep (no sampling). Each pair's update touches the
// anchor row and the entire opposing table, so this is only practical on
// small graphs; it is the exact counterpart of the sampled trainer.
template <typename Scalar>
TrainResult<Scalar> train_exact(const MultiViewGraph& graph,
                                const PairCorpus& corpus,
                                const TrainConfig& cfg) {
  cfg.validate();
  TrainResult<Scalar> result;
  result.tables = init_params<Scalar>(graph, cfg);
  auto& tables = result.tables;
  const std::size_t V = tables.num_views;
  const std::size_t n = tables.num_nodes;
  const std::size_t dim = tables.dim;
  const AdamConfig adam_cfg{cfg.lr, cfg.adam_beta1, cfg.adam_beta2,
                            cfg.adam_eps};

  std::vector<AdamTable<Scalar>> center_opt, context_opt;
  for (std::size_t v = 0; v < V; ++v) {
    center_opt.emplace_back(n, dim, adam_cfg);
    context_opt.emplace_back(n, dim, adam_cfg);
  }

  // exact gradient of -log P(target|anchor): d/anchor = sum_u P(u) row_u -
  // row_target; d/row_u = (P(u) - [u==target]) * anchor
  std::vector<double> probs(n);
  std::vector<Scalar> ga(dim), gr(dim);
  auto apply = [&](std::vector<Scalar>& anchor_tab, std::size_t anchor_row,
                   std::vector<Scalar>& other_tab, std::size_t target,
                   double scale, AdamTable<Scalar>& anchor_opt,
                   AdamTable<Scalar>& other_opt) -> double {
    std::span<Scalar> anchor{anchor_tab.data() + anchor_row * dim, dim};
    double mx = -1e300;
    for (std::size_t u = 0; u < n; ++u) {
      double s = 0;
      for (std::size_t k = 0; k < dim; ++k)
        s += static_cast<double>(anchor[k]) *
             static_cast<double>(other_tab[u * dim + k]);
      probs[u] = s;
      mx = std::max(mx, s);
    }
    double z = 0;
    for (std::size_t u = 0; u < n; ++u) z += std::exp(probs[u] - mx);
    const double loss = mx + std::log(z) - probs[target];
    for (std::size_t u = 0; u < n; ++u)
      probs[u] = std::exp(probs[u] - mx) / z;

    std::fill(ga.begin(), ga.end(), Scalar(0));
    for (std::size_t u = 0; u < n; ++u) {
      const double coef = scale * (probs[u] - (u == target ? 1.0 : 0.0));
      std::span<Scalar> row{other_tab.data() + u * dim, dim};
      for (std::size_t k = 0; k < dim; ++k) {
        ga[k] += static_cast<Scalar>(coef * static_cast<double>(row[k]));
        gr[k] = static_cast<Scalar>(coef * static_cast<double>(anchor[k]));
      }
      if (!other_opt.update_row(row, u, gr))
        throw InternalError("non-finite parameter in exact update");
    }
    if (!anchor_opt.update_row(anchor, anchor_row, ga))
      throw InternalError("non-finite parameter in exact update");
    return loss;
  };

  auto pairs = corpus.pairs;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double sum_div = 0, sum_c1 = 0, sum_c2 = 0;
    for (std::size_t v = 0; v < V; ++v) {
      auto shuffle_rng = make_stream(cfg.seed, "shuffle", v, epoch);
      std::shuffle(pairs[v].begin(), pairs[v].end(), shuffle_rng);
      for (const Pair& pr : pairs[v]) {
        sum_div += apply(tables.center[v], pr.center, tables.context[v],
                         pr.context, 1.0, center_opt[v], context_opt[v]);
        if (V == 1) continue;
        for (std::size_t vo = 0; vo < V; ++vo) {
          if (vo == v) continue;
          if (cfg.alpha > 0)
            sum_c1 += apply(tables.center[v], pr.center, tables.center[vo],
                            pr.center, cfg.alpha, center_opt[v],
                            center_opt[vo]);
          if (cfg.beta > 0)
            sum_c2 += apply(tables.center[vo], pr.center, tables.context[v],
                            pr.context, cfg.beta, center_opt[vo],
                            context_opt[v]);
        }
      }
    }
    result.trace.push_back(exact_total_loss(tables, corpus, cfg.alpha,
                                            cfg.beta));
    (void)sum_div;
    (void)sum_c1;
    (void)sum_c2;
  }
  return result;
}

}  // namespace mvembed
