#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "mvembed/tables.hpp"
#include "mvembed/walks.hpp"

namespace mvembed {

// log(sigmoid(x)), stable for large |x|.
inline double log_sigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                : std::exp(x) / (1.0 + std::exp(x));
}

template <typename Scalar>
inline double dot(std::span<const Scalar> a, std::span<const Scalar> b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k)
    s += static_cast<double>(a[k]) * static_cast<double>(b[k]);
  return s;
}

/// Negative-sampling surrogate for one softmax term:
//   L = -log sig(anchor . positive) - sum_k log sig(-(anchor . neg_k))
// The anchor is the vector appearing in every logit. `coef` values are
// dL/d(logit) so that the gradients are
//   d/d anchor   = pos_coef * positive + sum_k neg_coef[k] * neg_k
//   d/d positive = pos_coef * anchor
//   d/d neg_k    = neg_coef[k] * anchor
struct SgnsTerms {
  double loss = 0;
  double pos_coef = 0;
  std::vector<double> neg_coefs;
};

template <typename Scalar>
SgnsTerms sgns_terms(std::span<const Scalar> anchor,
                     std::span<const Scalar> positive,
                     const std::vector<std::span<const Scalar>>& negatives) {
  SgnsTerms t;
  double s_pos = dot(anchor, positive);
  t.loss = -log_sigmoid(s_pos);
  t.pos_coef = sigmoid(s_pos) - 1.0;
  t.neg_coefs.reserve(negatives.size());
  for (const auto& neg : negatives) {
    double s = dot(anchor, neg);
    t.loss -= log_sigmoid(-s);
    t.neg_coefs.push_back(sigmoid(s));
  }
  return t;
}

// Materialized gradients for the surrogate, for callers that need them
// explicitly (tests, finite-difference checks).
template <typename Scalar>
struct SgnsGradients {
  double loss = 0;
  std::vector<Scalar> d_anchor;
  std::vector<Scalar> d_positive;
  std::vector<std::vector<Scalar>> d_negatives;
};

template <typename Scalar>
SgnsGradients<Scalar> sgns_loss(
    std::span<const Scalar> anchor, std::span<const Scalar> positive,
    const std::vector<std::span<const Scalar>>& negatives) {
  auto terms = sgns_terms(anchor, positive, negatives);
  SgnsGradients<Scalar> g;
  g.loss = terms.loss;
  const std::size_t d = anchor.size();
  g.d_anchor.assign(d, Scalar(0));
  g.d_positive.assign(d, Scalar(0));
  for (std::size_t k = 0; k < d; ++k) {
    g.d_anchor[k] = static_cast<Scalar>(terms.pos_coef * positive[k]);
    g.d_positive[k] = static_cast<Scalar>(terms.pos_coef * anchor[k]);
  }
  g.d_negatives.resize(negatives.size());
  for (std::size_t n = 0; n < negatives.size(); ++n) {
    g.d_negatives[n].assign(d, Scalar(0));
    for (std::size_t k = 0; k < d; ++k) {
      g.d_anchor[k] += static_cast<Scalar>(terms.neg_coefs[n] * negatives[n][k]);
      g.d_negatives[n][k] = static_cast<Scalar>(terms.neg_coefs[n] * anchor[k]);
    }
  }
  return g;
}

// Diversity loss for one intra-view pair: anchor f_i^(v), positive f~_j^(v),
// negatives from view v's context table.
template <typename Scalar>
SgnsGradients<Scalar> loss_div(const EmbeddingTables<Scalar>& t, std::size_t v,
                               NodeId i, NodeId j,
                               const std::vector<NodeId>& negatives) {
  std::vector<std::span<const Scalar>> negs;
  negs.reserve(negatives.size());
  for (NodeId u : negatives) negs.push_back(t.context_row(v, u));
  return sgns_loss(t.center_row(v, i), t.context_row(v, j), negs);
}

// First-order collaboration for the center node of a pair: anchor f_i^(v),
// positive f_i^(v'), negatives from the center table of v'.
template <typename Scalar>
SgnsGradients<Scalar> loss_c1(const EmbeddingTables<Scalar>& t, std::size_t v,
                              std::size_t v_other, NodeId i,
                              const std::vector<NodeId>& negatives) {
  std::vector<std::span<const Scalar>> negs;
  negs.reserve(negatives.size());
  for (NodeId u : negatives) negs.push_back(t.center_row(v_other, u));
  return sgns_loss(t.center_row(v, i), t.center_row(v_other, i), negs);
}

// Second-order collaboration for a cross-view, cross-node pair: anchor
// f_i^(v'), positive f~_j^(v), negatives from view v's context table.
template <typename Scalar>
SgnsGradients<Scalar> loss_c2(const EmbeddingTables<Scalar>& t, std::size_t v,
                              std::size_t v_other, NodeId i, NodeId j,
                              const std::vector<NodeId>& negatives) {
  std::vector<std::span<const Scalar>> negs;
  negs.reserve(negatives.size());
  for (NodeId u : negatives) negs.push_back(t.context_row(v, u));
  return sgns_loss(t.center_row(v_other, i), t.context_row(v, j), negs);
}

enum class SoftmaxSide {
  Context,    // P(j|i) over context vectors of view v
  CenterInV,  // P(j|i) over center vectors of the second view
};

// Exact softmax probability, log-sum-exp stabilized. For Context the logits
// are f~_u^(v) . f_i^(v); for CenterInV they are f_u^(v_other) . f_i^(v).
template <typename Scalar>
double softmax_prob(const EmbeddingTables<Scalar>& t, std::size_t v, NodeId i,
                    NodeId j, SoftmaxSide side, std::size_t v_other = 0) {
  auto anchor = t.center_row(v, i);
  std::vector<double> logits(t.num_nodes);
  for (NodeId u = 0; u < t.num_nodes; ++u) {
    auto row = side == SoftmaxSide::Context ? t.context_row(v, u)
                                            : t.center_row(v_other, u);
    logits[u] = dot<Scalar>(anchor, row);
  }
  double mx = logits[0];
  for (double x : logits) mx = std::max(mx, x);
  double z = 0;
  for (double x : logits) z += std::exp(x - mx);
  return std::exp(logits[j] - mx) / z;
}

struct LossBreakdown {
  double total = 0;
  double div = 0;
  double c1 = 0;
  double c2 = 0;
  bool exact = false;
};

// Exact (full-softmax) value of L = L_Div + alpha L_C1 + beta L_C2 over the
// corpus. All pairwise logit matrices are precomputed, so cost is
// O(|V|^2 n^2 d + |Omega|).
template <typename Scalar>
LossBreakdown exact_total_loss(const EmbeddingTables<Scalar>& t,
                               const PairCorpus& corpus, double alpha,
                               double beta) {
  const std::size_t n = t.num_nodes;
  const std::size_t d = t.dim;
  const std::size_t V = t.num_views;

  // logits[i*n+u] = rows_a[i] . rows_b[u], plus per-i log-sum-exp
  auto logit_matrix = [&](const std::vector<Scalar>& a,
                          const std::vector<Scalar>& b, std::vector<double>& m,
                          std::vector<double>& lse) {
    m.assign(n * n, 0.0);
    lse.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double mx = -1e300;
      for (std::size_t u = 0; u < n; ++u) {
        double s = 0;
        for (std::size_t k = 0; k < d; ++k)
          s += static_cast<double>(a[i * d + k]) *
               static_cast<double>(b[u * d + k]);
        m[i * n + u] = s;
        mx = std::max(mx, s);
      }
      double z = 0;
      for (std::size_t u = 0; u < n; ++u) z += std::exp(m[i * n + u] - mx);
      lse[i] = mx + std::log(z);
    }
  };

  LossBreakdown out;
  out.exact = true;
  std::vector<double> m, lse;
  for (std::size_t v = 0; v < V; ++v) {
    logit_matrix(t.center[v], t.context[v], m, lse);
    for (const Pair& p : corpus.pairs[v])
      out.div += lse[p.center] - m[std::size_t(p.center) * n + p.context];
  }
  if (alpha > 0 && V > 1) {
    for (std::size_t v = 0; v < V; ++v) {
      std::vector<std::size_t> center_count(n, 0);
      for (const Pair& p : corpus.pairs[v]) ++center_count[p.center];
      for (std::size_t vo = 0; vo < V; ++vo) {
        if (vo == v) continue;
        logit_matrix(t.center[v], t.center[vo], m, lse);
        for (std::size_t i = 0; i < n; ++i)
          if (center_count[i] > 0)
            out.c1 += static_cast<double>(center_count[i]) *
                      (lse[i] - m[i * n + i]);
      }
    }
  }
  if (beta > 0 && V > 1) {
    for (std::size_t v = 0; v < V; ++v) {
      for (std::size_t vo = 0; vo < V; ++vo) {
        if (vo == v) continue;
        logit_matrix(t.center[vo], t.context[v], m, lse);
        for (const Pair& p : corpus.pairs[v])
          out.c2 += lse[p.center] - m[std::size_t(p.center) * n + p.context];
      }
    }
  }
  out.total = out.div + alpha * out.c1 + beta * out.c2;
  return out;
}

}  // namespace mvembed
