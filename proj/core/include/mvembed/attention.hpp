#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "mvembed/adam.hpp"
#include "mvembed/graph.hpp"
#include "mvembed/losses.hpp"
#include "mvembed/tables.hpp"
#include "mvembed/train.hpp"

namespace mvembed {

// Per-view attention parameters plus the supervised head.
template <typename Scalar>
struct AttentionParams {
  std::size_t num_views = 0;
  std::size_t total_dim = 0;  // |V| * per-view dim
  std::size_t num_classes = 0;
  std::vector<std::vector<Scalar>> z1, z2;  // per view, length total_dim
  std::vector<Scalar> b1, b2;               // per view
  std::vector<Scalar> head_w;               // flat num_classes * total_dim
  std::vector<Scalar> head_b;               // num_classes

  bool all_finite() const {
    auto ok = [](const std::vector<Scalar>& xs) {
      for (Scalar x : xs)
        if (!std::isfinite(static_cast<double>(x))) return false;
      return true;
    };
    for (const auto& z : z1)
      if (!ok(z)) return false;
    for (const auto& z : z2)
      if (!ok(z)) return false;
    return ok(b1) && ok(b2) && ok(head_w) && ok(head_b);
  }
};

// Weights uniform on [-0.1, 0.1], biases zero.
template <typename Scalar>
AttentionParams<Scalar> init_attention(std::size_t num_views,
                                       std::size_t total_dim,
                                       std::size_t num_classes,
                                       std::uint64_t seed) {
  AttentionParams<Scalar> p;
  p.num_views = num_views;
  p.total_dim = total_dim;
  p.num_classes = num_classes;
  auto rng = make_stream(seed, "att_init");
  auto fill = [&](std::vector<Scalar>& xs, std::size_t n) {
    xs.resize(n);
    for (auto& x : xs) x = static_cast<Scalar>(uniform_range(rng, -0.1, 0.1));
  };
  p.z1.resize(num_views);
  p.z2.resize(num_views);
  for (std::size_t v = 0; v < num_views; ++v) {
    fill(p.z1[v], total_dim);
    fill(p.z2[v], total_dim);
  }
  p.b1.assign(num_views, Scalar(0));
  p.b2.assign(num_views, Scalar(0));
  fill(p.head_w, num_classes * total_dim);
  p.head_b.assign(num_classes, Scalar(0));
  return p;
}

// s(i,v) = z2 . tanh(z1 o f_i + b1 * 1) + b2
template <typename Scalar>
double attention_score(const AttentionParams<Scalar>& p,
                       std::span<const double> f, std::size_t v) {
  double s = static_cast<double>(p.b2[v]);
  for (std::size_t k = 0; k < p.total_dim; ++k)
    s += static_cast<double>(p.z2[v][k]) *
         std::tanh(static_cast<double>(p.z1[v][k]) * f[k] +
                   static_cast<double>(p.b1[v]));
  return s;
}

// Softmax over the per-view scores of one node.
template <typename Scalar>
std::vector<double> attention_weights(const AttentionParams<Scalar>& p,
                                      std::span<const double> f) {
  std::vector<double> s(p.num_views);
  for (std::size_t v = 0; v < p.num_views; ++v)
    s[v] = attention_score(p, f, v);
  double mx = *std::max_element(s.begin(), s.end());
  double z = 0;
  for (double& x : s) {
    x = std::exp(x - mx);
    z += x;
  }
  for (double& x : s) x /= z;
  return s;
}

// Intermediates cached for the backward pass.
struct AttForward {
  std::vector<double> f;        // concatenated center embedding, total_dim
  std::vector<double> h;        // per-view tanh pre-activations, V * total_dim
  std::vector<double> scores;   // V
  std::vector<double> weights;  // V
  std::vector<double> fa;       // tanh-aggregated embedding, total_dim
};

template <typename Scalar>
AttForward attention_forward(const AttentionParams<Scalar>& p,
                             const EmbeddingTables<Scalar>& t, NodeId i) {
  const std::size_t V = p.num_views;
  const std::size_t D = p.total_dim;
  AttForward fw;
  fw.f.resize(D);
  for (std::size_t v = 0; v < V; ++v) {
    auto row = t.center_row(v, i);
    for (std::size_t k = 0; k < t.dim; ++k)
      fw.f[v * t.dim + k] = static_cast<double>(row[k]);
  }
  fw.h.resize(V * D);
  fw.scores.resize(V);
  for (std::size_t v = 0; v < V; ++v) {
    double s = static_cast<double>(p.b2[v]);
    for (std::size_t k = 0; k < D; ++k) {
      double hk = std::tanh(static_cast<double>(p.z1[v][k]) * fw.f[k] +
                            static_cast<double>(p.b1[v]));
      fw.h[v * D + k] = hk;
      s += static_cast<double>(p.z2[v][k]) * hk;
    }
    fw.scores[v] = s;
  }
  fw.weights = fw.scores;
  double mx = *std::max_element(fw.weights.begin(), fw.weights.end());
  double z = 0;
  for (double& x : fw.weights) {
    x = std::exp(x - mx);
    z += x;
  }
  for (double& x : fw.weights) x /= z;
  fw.fa.resize(D);
  for (std::size_t v = 0; v < V; ++v)
    for (std::size_t k = 0; k < t.dim; ++k)
      fw.fa[v * t.dim + k] =
          std::tanh(fw.weights[v] * fw.f[v * t.dim + k]);
  return fw;
}

// f_i^a = tanh(concat_v a_i^(v) f_i^(v))
template <typename Scalar>
std::vector<double> attention_aggregate(const AttentionParams<Scalar>& p,
                                        const EmbeddingTables<Scalar>& t,
                                        NodeId i) {
  return attention_forward(p, t, i).fa;
}

// Gradient accumulators, all double, same shapes as the parameters plus the
// sparse center-table blocks touched by the items.
struct AttGrads {
  std::vector<std::vector<double>> z1, z2;  // per view, total_dim
  std::vector<double> b1, b2;               // per view
  std::vector<double> head_w;               // num_classes * total_dim
  std::vector<double> head_b;               // num_classes
  // per (view, node) center-block gradients touched by the batch
  std::vector<std::vector<double>> center;  // per view, flat n*dim

  void init(std::size_t V, std::size_t D, std::size_t C, std::size_t n,
            std::size_t dim) {
    z1.assign(V, std::vector<double>(D, 0.0));
    z2.assign(V, std::vector<double>(D, 0.0));
    b1.assign(V, 0.0);
    b2.assign(V, 0.0);
    head_w.assign(C * D, 0.0);
    head_b.assign(C, 0.0);
    center.assign(V, std::vector<double>(n * dim, 0.0));
  }
};

namespace detail {

// Backward through one node's attention graph given d(loss)/d(fa). The
// center-table gradient lands in g.center; context tables are untouched by
// the supervised path.
template <typename Scalar>
void attention_backward(const AttentionParams<Scalar>& p,
                        const EmbeddingTables<Scalar>& t, NodeId i,
                        const AttForward& fw, std::span<const double> dfa,
                        double scale, AttGrads& g) {
  const std::size_t V = p.num_views;
  const std::size_t D = p.total_dim;
  const std::size_t dim = t.dim;

  // through the tanh aggregation: pre_k = a_v * f_k for k in block v
  std::vector<double> df(D, 0.0);
  std::vector<double> da(V, 0.0);
  for (std::size_t v = 0; v < V; ++v) {
    for (std::size_t k = v * dim; k < (v + 1) * dim; ++k) {
      const double dpre = scale * dfa[k] * (1.0 - fw.fa[k] * fw.fa[k]);
      da[v] += dpre * fw.f[k];
      df[k] += dpre * fw.weights[v];
    }
  }
  // softmax
  double dot = 0;
  for (std::size_t v = 0; v < V; ++v) dot += fw.weights[v] * da[v];
  for (std::size_t v = 0; v < V; ++v) {
    const double ds = fw.weights[v] * (da[v] - dot);
    g.b2[v] += ds;
    for (std::size_t k = 0; k < D; ++k) {
      const double hk = fw.h[v * D + k];
      g.z2[v][k] += ds * hk;
      const double dq =
          ds * static_cast<double>(p.z2[v][k]) * (1.0 - hk * hk);
      g.z1[v][k] += dq * fw.f[k];
      g.b1[v] += dq;
      df[k] += dq * static_cast<double>(p.z1[v][k]);
    }
  }
  // concatenated f maps back to the per-view center blocks
  for (std::size_t v = 0; v < V; ++v)
    for (std::size_t k = 0; k < dim; ++k)
      g.center[v][std::size_t(i) * dim + k] += df[v * dim + k];
}

// softmax cross-entropy head on a feature vector; returns loss, fills
// dlogits -> dfeat and the head gradients (scaled).
template <typename Scalar>
double head_forward_backward(const AttentionParams<Scalar>& p,
                             std::span<const double> feat, int label,
                             double scale, AttGrads& g,
                             std::vector<double>& dfeat) {
  const std::size_t C = p.num_classes;
  const std::size_t D = p.total_dim;
  std::vector<double> logits(C);
  for (std::size_t c = 0; c < C; ++c) {
    double s = static_cast<double>(p.head_b[c]);
    for (std::size_t k = 0; k < D; ++k)
      s += static_cast<double>(p.head_w[c * D + k]) * feat[k];
    logits[c] = s;
  }
  double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0;
  for (double& x : logits) {
    x = std::exp(x - mx);
    z += x;
  }
  const double loss = -std::log(logits[label] / z);
  dfeat.assign(D, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    const double dl =
        scale * (logits[c] / z - (static_cast<int>(c) == label ? 1.0 : 0.0));
    g.head_b[c] += dl;
    for (std::size_t k = 0; k < D; ++k) {
      g.head_w[c * D + k] += dl * feat[k];
      dfeat[k] += dl * static_cast<double>(p.head_w[c * D + k]);
    }
  }
  return loss;
}

}  // namespace detail

// Loss and gradients for one labeled item; gradients are accumulated into g
// with the given scale. Node task: softmax head on f_i^a. Pair task: softmax
// head on the elementwise product f_i^a o f_j^a.
template <typename Scalar>
double att_item_loss_grads(const AttentionParams<Scalar>& p,
                           const EmbeddingTables<Scalar>& t, TaskKind task,
                           std::pair<NodeId, NodeId> item, int label,
                           double scale, AttGrads& g) {
  std::vector<double> dfeat;
  if (task == TaskKind::NodeClass) {
    AttForward fw = attention_forward(p, t, item.first);
    double loss = detail::head_forward_backward(p, fw.fa, label, 1.0, g, dfeat);
    detail::attention_backward(p, t, item.first, fw, dfeat, scale, g);
    // rescale head grads written with unit scale
    return loss;
  }
  AttForward fi = attention_forward(p, t, item.first);
  AttForward fj = attention_forward(p, t, item.second);
  std::vector<double> feat(p.total_dim);
  for (std::size_t k = 0; k < p.total_dim; ++k)
    feat[k] = fi.fa[k] * fj.fa[k];
  double loss = detail::head_forward_backward(p, feat, label, 1.0, g, dfeat);
  std::vector<double> dfi(p.total_dim), dfj(p.total_dim);
  for (std::size_t k = 0; k < p.total_dim; ++k) {
    dfi[k] = dfeat[k] * fj.fa[k];
    dfj[k] = dfeat[k] * fi.fa[k];
  }
  detail::attention_backward(p, t, item.first, fi, dfi, scale, g);
  detail::attention_backward(p, t, item.second, fj, dfj, scale, g);
  return loss;
}

template <typename Scalar>
struct AttLossResult {
  double loss = 0;  // mean cross-entropy over the given items
  AttGrads grads;   // gradients of the mean
};

// Mean cross-entropy over the training items (those whose fold differs from
// `held_out_fold`; pass -1 to use every labeled item).
template <typename Scalar>
AttLossResult<Scalar> loss_att(const AttentionParams<Scalar>& p,
                               const EmbeddingTables<Scalar>& t,
                               const LabelSet& labels, int held_out_fold) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < labels.items.size(); ++i)
    if (held_out_fold < 0 || labels.folds[i] != held_out_fold)
      idx.push_back(i);
  if (idx.empty()) throw InputError("attention loss: empty training set");

  AttLossResult<Scalar> r;
  r.grads.init(p.num_views, p.total_dim, p.num_classes, t.num_nodes, t.dim);
  const double inv = 1.0 / static_cast<double>(idx.size());
  AttGrads item_g;
  for (std::size_t i : idx) {
    item_g.init(p.num_views, p.total_dim, p.num_classes, t.num_nodes, t.dim);
    r.loss += inv * att_item_loss_grads(p, t, labels.task_kind,
                                        labels.items[i], labels.classes[i],
                                        1.0, item_g);
    auto axpy = [&](std::vector<double>& dst, const std::vector<double>& src) {
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += inv * src[k];
    };
    for (std::size_t v = 0; v < p.num_views; ++v) {
      axpy(r.grads.z1[v], item_g.z1[v]);
      axpy(r.grads.z2[v], item_g.z2[v]);
      r.grads.b1[v] += inv * item_g.b1[v];
      r.grads.b2[v] += inv * item_g.b2[v];
      axpy(r.grads.center[v], item_g.center[v]);
    }
    axpy(r.grads.head_w, item_g.head_w);
    axpy(r.grads.head_b, item_g.head_b);
  }
  return r;
}

// Mean cross-entropy only (no gradients), for loss traces.
template <typename Scalar>
double att_loss_value(const AttentionParams<Scalar>& p,
                      const EmbeddingTables<Scalar>& t, const LabelSet& labels,
                      int held_out_fold) {
  AttGrads scratch;
  scratch.init(p.num_views, p.total_dim, p.num_classes, t.num_nodes, t.dim);
  double loss = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < labels.items.size(); ++i) {
    if (held_out_fold >= 0 && labels.folds[i] == held_out_fold) continue;
    loss += att_item_loss_grads(p, t, labels.task_kind, labels.items[i],
                                labels.classes[i], 0.0, scratch);
    ++count;
  }
  if (count == 0) throw InputError("attention loss: empty training set");
  return loss / static_cast<double>(count);
}

template <typename Scalar>
struct TrainPlusResult {
  EmbeddingTables<Scalar> tables;
  AttentionParams<Scalar> params;
  std::vector<LossBreakdown> trace;      // unsupervised part of the loss
  std::vector<double> att_trace;         // gamma-scaled attention loss
  FinalEmbeddings attention_embeddings;  // {f_i^a}
  std::vector<double> weights;           // flat n * V attention weights
};

// Joint training: per epoch, the unsupervised sweep followed by one pass of
// gamma-scaled attention updates over the training items. Supervision only
// reaches the center tables; context tables stay purely unsupervised.
template <typename Scalar>
TrainPlusResult<Scalar> train_plus(const MultiViewGraph& graph,
                                   const PairCorpus& corpus,
                                   const LabelSet& labels,
                                   const TrainConfig& cfg, double gamma,
                                   int held_out_fold = -1) {
  if (gamma < 0) throw InputError("gamma must be >= 0");
  if (labels.items.empty()) throw InputError("train-plus requires labels");

  Trainer<Scalar> trainer(graph, corpus, cfg);
  auto& tables = trainer.tables();
  const std::size_t V = tables.num_views;
  const std::size_t D = V * tables.dim;
  const std::size_t C = labels.num_classes;

  TrainPlusResult<Scalar> result;
  result.params = init_attention<Scalar>(V, D, C, cfg.seed);
  auto& params = result.params;

  std::vector<std::size_t> train_items;
  for (std::size_t i = 0; i < labels.items.size(); ++i)
    if (held_out_fold < 0 || labels.folds[i] != held_out_fold)
      train_items.push_back(i);
  if (train_items.empty())
    throw InputError("train-plus: no training items outside held-out fold");

  const AdamConfig acfg{cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps};
  AdamTable<Scalar> z1_opt(V, D, acfg), z2_opt(V, D, acfg);
  AdamTable<Scalar> b1_opt(V, 1, acfg), b2_opt(V, 1, acfg);
  AdamTable<Scalar> hw_opt(C, D, acfg), hb_opt(1, C, acfg);

  // per-item updates approximate gamma * mean CE over the training set
  const double item_scale =
      gamma / static_cast<double>(train_items.size());

  AttGrads g;
  std::vector<Scalar> buf;
  auto update = [&](AdamTable<Scalar>& opt, Scalar* param, std::size_t opt_row,
                    const std::vector<double>& grad, std::size_t off,
                    std::size_t len) {
    buf.assign(len, Scalar(0));
    bool zero = true;
    for (std::size_t k = 0; k < len; ++k) {
      buf[k] = static_cast<Scalar>(grad[off + k]);
      zero = zero && grad[off + k] == 0.0;
    }
    if (zero) return true;  // untouched rows keep their Adam state
    return opt.update_row({param, len}, opt_row, buf);
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double sum_div = 0, sum_c1 = 0, sum_c2 = 0;
    trainer.sweep(epoch, sum_div, sum_c1, sum_c2);

    if (gamma > 0) {
      auto order = train_items;
      auto rng = make_stream(cfg.seed, "att_shuffle", epoch);
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t i : order) {
        g.init(V, D, C, tables.num_nodes, tables.dim);
        att_item_loss_grads(params, tables, labels.task_kind, labels.items[i],
                            labels.classes[i], 1.0, g);
        // head grads were unit-scale; everything is scaled uniformly here
        bool ok = true;
        for (std::size_t v = 0; v < V; ++v) {
          for (auto& x : g.z1[v]) x *= item_scale;
          for (auto& x : g.z2[v]) x *= item_scale;
          ok = update(z1_opt, params.z1[v].data(), v, g.z1[v], 0, D) && ok;
          ok = update(z2_opt, params.z2[v].data(), v, g.z2[v], 0, D) && ok;
          g.b1[v] *= item_scale;
          g.b2[v] *= item_scale;
          Scalar gb1 = static_cast<Scalar>(g.b1[v]);
          Scalar gb2 = static_cast<Scalar>(g.b2[v]);
          ok = b1_opt.update_row({params.b1.data() + v, 1}, v, {&gb1, 1}) && ok;
          ok = b2_opt.update_row({params.b2.data() + v, 1}, v, {&gb2, 1}) && ok;
          // sparse center-row updates
          auto touch = [&](NodeId node) {
            std::size_t off = std::size_t(node) * tables.dim;
            bool any = false;
            for (std::size_t k = 0; k < tables.dim; ++k)
              any = any || g.center[v][off + k] != 0.0;
            if (!any) return;
            buf.assign(tables.dim, Scalar(0));
            for (std::size_t k = 0; k < tables.dim; ++k)
              buf[k] = static_cast<Scalar>(item_scale * g.center[v][off + k]);
            ok = trainer.center_optimizer(v).update_row(
                     {tables.center[v].data() + off, tables.dim}, node, buf) &&
                 ok;
          };
          touch(labels.items[i].first);
          if (labels.task_kind == TaskKind::PairClass)
            touch(labels.items[i].second);
        }
        for (auto& x : g.head_w) x *= item_scale;
        for (auto& x : g.head_b) x *= item_scale;
        for (std::size_t c = 0; c < C; ++c)
          ok = update(hw_opt, params.head_w.data() + c * D, c, g.head_w,
                      c * D, D) && ok;
        buf.assign(C, Scalar(0));
        for (std::size_t c = 0; c < C; ++c)
          buf[c] = static_cast<Scalar>(g.head_b[c]);
        ok = hb_opt.update_row({params.head_b.data(), C}, 0, buf) && ok;
        if (!ok)
          throw InternalError("non-finite attention parameter (epoch " +
                              std::to_string(epoch) + ")");
      }
    }

    LossBreakdown epoch_loss;
    if (tables.num_nodes <= cfg.exact_loss_threshold) {
      epoch_loss = exact_total_loss(tables, corpus, cfg.alpha, cfg.beta);
    } else {
      epoch_loss.div = sum_div;
      epoch_loss.c1 = sum_c1;
      epoch_loss.c2 = sum_c2;
      epoch_loss.total = sum_div + cfg.alpha * sum_c1 + cfg.beta * sum_c2;
    }
    result.trace.push_back(epoch_loss);
    result.att_trace.push_back(
        gamma > 0
            ? gamma * att_loss_value(params, tables, labels, held_out_fold)
            : 0.0);
  }

  // final attention-based embeddings and weight report
  result.attention_embeddings.num_nodes = tables.num_nodes;
  result.attention_embeddings.dim = D;
  result.attention_embeddings.data.resize(tables.num_nodes * D);
  result.attention_embeddings.node_names = graph.node_names;
  result.weights.resize(tables.num_nodes * V);
  for (NodeId i = 0; i < tables.num_nodes; ++i) {
    AttForward fw = attention_forward(params, tables, i);
    std::copy(fw.fa.begin(), fw.fa.end(),
              result.attention_embeddings.data.begin() + std::size_t(i) * D);
    for (std::size_t v = 0; v < V; ++v)
      result.weights[std::size_t(i) * V + v] = fw.weights[v];
  }
  result.tables = std::move(tables);
  return result;
}

}  // namespace mvembed
