#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mvembed/errors.hpp"

namespace mvembed {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Sparse (lazy) Adam over a flat table of rows: moments and step counts are
// kept per row and advanced only when a row receives a gradient.
template <typename Scalar>
class AdamTable {
 public:
  AdamTable() = default;
  AdamTable(std::size_t num_rows, std::size_t dim, const AdamConfig& cfg)
      : cfg_(cfg),
        dim_(dim),
        m_(num_rows * dim, Scalar(0)),
        v_(num_rows * dim, Scalar(0)),
        step_(num_rows, 0) {}

  // One Adam step on a single row. Returns false if the updated row contains
  // a non-finite value.
  bool update_row(std::span<Scalar> param, std::size_t row,
                  std::span<const Scalar> grad) {
    Scalar* m = m_.data() + row * dim_;
    Scalar* v = v_.data() + row * dim_;
    const std::int64_t t = ++step_[row];
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t));
    bool finite = true;
    for (std::size_t k = 0; k < dim_; ++k) {
      const double g = static_cast<double>(grad[k]);
      const double mk = cfg_.beta1 * static_cast<double>(m[k]) +
                        (1.0 - cfg_.beta1) * g;
      const double vk = cfg_.beta2 * static_cast<double>(v[k]) +
                        (1.0 - cfg_.beta2) * g * g;
      m[k] = static_cast<Scalar>(mk);
      v[k] = static_cast<Scalar>(vk);
      const double step = cfg_.lr * (mk / bc1) / (std::sqrt(vk / bc2) + cfg_.eps);
      const double next = static_cast<double>(param[k]) - step;
      param[k] = static_cast<Scalar>(next);
      finite = finite && std::isfinite(next);
    }
    return finite;
  }

 private:
  AdamConfig cfg_;
  std::size_t dim_ = 0;
  std::vector<Scalar> m_, v_;
  std::vector<std::int64_t> step_;
};

}  // namespace mvembed
