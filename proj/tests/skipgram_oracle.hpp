// Standalone single-view skip-gram (SGNS + Adam) trainer used as the
// reference for the reduction test: with alpha = beta = 0 the multi-view
// trainer must reproduce this, view by view, bit for bit. It follows the
// library's documented RNG stream naming ((seed, tag, view, epoch) with tags
// "init", "shuffle", "neg_div") but implements sampling, gradients and Adam
// on its own.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mvembed/rng.hpp"
#include "mvembed/walks.hpp"

namespace sgoracle {

template <typename Scalar>
struct Model {
  std::size_t n = 0, dim = 0;
  std::vector<Scalar> center, context;
};

template <typename Scalar>
struct AdamState {
  std::vector<Scalar> m, v;
  std::vector<long> t;
  AdamState(std::size_t n, std::size_t dim)
      : m(n * dim, Scalar(0)), v(n * dim, Scalar(0)), t(n, 0) {}
};

template <typename Scalar>
void adam_step(AdamState<Scalar>& st, std::vector<Scalar>& table,
               std::size_t row, const std::vector<Scalar>& grad,
               std::size_t dim, double lr, double b1, double b2, double eps) {
  const long tt = ++st.t[row];
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(tt));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(tt));
  for (std::size_t k = 0; k < dim; ++k) {
    const double g = static_cast<double>(grad[k]);
    const double mk =
        b1 * static_cast<double>(st.m[row * dim + k]) + (1.0 - b1) * g;
    const double vk =
        b2 * static_cast<double>(st.v[row * dim + k]) + (1.0 - b2) * g * g;
    st.m[row * dim + k] = static_cast<Scalar>(mk);
    st.v[row * dim + k] = static_cast<Scalar>(vk);
    const double step = lr * (mk / bc1) / (std::sqrt(vk / bc2) + eps);
    table[row * dim + k] = static_cast<Scalar>(
        static_cast<double>(table[row * dim + k]) - step);
  }
}

inline double sig(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// pairs: the intra-view corpus for this view. view_tag: the view's index in
// the multi-view run whose streams we mirror.
template <typename Scalar>
Model<Scalar> train_single_view(std::size_t num_nodes, std::size_t dim,
                                std::vector<mvembed::Pair> pairs,
                                std::size_t view_tag, std::size_t epochs,
                                std::size_t k_negatives, std::uint64_t seed,
                                double lr, double b1, double b2, double eps) {
  using mvembed::make_stream;
  using mvembed::uniform_range;
  using mvembed::uniform_unit;

  Model<Scalar> model;
  model.n = num_nodes;
  model.dim = dim;
  model.center.resize(num_nodes * dim);
  model.context.assign(num_nodes * dim, Scalar(0));
  {
    auto rng = make_stream(seed, "init", view_tag);
    const double bound = 0.5 / static_cast<double>(dim);
    for (auto& x : model.center)
      x = static_cast<Scalar>(uniform_range(rng, -bound, bound));
  }

  // unigram^(3/4) noise over occurrences in the corpus
  std::vector<double> counts(num_nodes, 0.0);
  for (const auto& p : pairs) {
    counts[p.center] += 1.0;
    counts[p.context] += 1.0;
  }
  std::vector<mvembed::NodeId> noise_nodes;
  std::vector<double> cum;
  double total = 0;
  for (std::size_t i = 0; i < num_nodes; ++i)
    if (counts[i] > 0) {
      noise_nodes.push_back(static_cast<mvembed::NodeId>(i));
      total += std::pow(counts[i], 0.75);
      cum.push_back(total);
    }

  AdamState<Scalar> center_opt(num_nodes, dim), context_opt(num_nodes, dim);
  std::vector<Scalar> ga(dim), go(dim);
  std::vector<mvembed::NodeId> negs;

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    auto shuffle_rng = make_stream(seed, "shuffle", view_tag, epoch);
    std::shuffle(pairs.begin(), pairs.end(), shuffle_rng);
    auto neg_rng = make_stream(seed, "neg_div", view_tag, epoch, 0);
    for (const auto& pr : pairs) {
      negs.clear();
      for (std::size_t s = 0; s < k_negatives; ++s)
        for (int attempt = 0; attempt < 100; ++attempt) {
          double x = uniform_unit(neg_rng) * cum.back();
          auto it = std::upper_bound(cum.begin(), cum.end(), x);
          std::size_t idx =
              std::min<std::size_t>(it - cum.begin(), noise_nodes.size() - 1);
          if (noise_nodes[idx] != pr.context) {
            negs.push_back(noise_nodes[idx]);
            break;
          }
        }

      Scalar* anchor = model.center.data() + std::size_t(pr.center) * dim;
      Scalar* pos = model.context.data() + std::size_t(pr.context) * dim;
      double s_pos = 0;
      for (std::size_t k = 0; k < dim; ++k)
        s_pos += static_cast<double>(anchor[k]) * static_cast<double>(pos[k]);
      std::vector<double> neg_coefs;
      for (auto u : negs) {
        const Scalar* nrow = model.context.data() + std::size_t(u) * dim;
        double s = 0;
        for (std::size_t k = 0; k < dim; ++k)
          s += static_cast<double>(anchor[k]) * static_cast<double>(nrow[k]);
        neg_coefs.push_back(sig(s));
      }
      const double pc = sig(s_pos) - 1.0;
      for (std::size_t k = 0; k < dim; ++k) {
        ga[k] = static_cast<Scalar>(pc * static_cast<double>(pos[k]));
        go[k] = static_cast<Scalar>(pc * static_cast<double>(anchor[k]));
      }
      adam_step(context_opt, model.context, pr.context, go, dim, lr, b1, b2,
                eps);
      for (std::size_t nidx = 0; nidx < negs.size(); ++nidx) {
        const Scalar* nrow = model.context.data() + std::size_t(negs[nidx]) * dim;
        for (std::size_t k = 0; k < dim; ++k) {
          ga[k] += static_cast<Scalar>(neg_coefs[nidx] *
                                       static_cast<double>(nrow[k]));
          go[k] = static_cast<Scalar>(neg_coefs[nidx] *
                                      static_cast<double>(anchor[k]));
        }
        adam_step(context_opt, model.context, negs[nidx], go, dim, lr, b1, b2,
                  eps);
      }
      adam_step(center_opt, model.center, pr.center, ga, dim, lr, b1, b2, eps);
    }
  }
  return model;
}

}  // namespace sgoracle
