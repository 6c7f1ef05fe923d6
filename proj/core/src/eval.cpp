#include "mvembed/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "mvembed/errors.hpp"
#include "mvembed/rng.hpp"

namespace mvembed {

namespace {

void require_both_classes(const std::vector<int>& labels, const char* what) {
  bool pos = false, neg = false;
  for (int y : labels) (y ? pos : neg) = true;
  if (!pos || !neg)
    throw InputError(std::string(what) + ": needs both classes present");
}

}  // namespace

double metric_roc_auc(const std::vector<double>& scores,
                      const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw InputError("roc_auc: bad input sizes");
  require_both_classes(labels, "roc_auc");

  // rank-sum with average ranks for ties
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(scores.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]])
      ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  double pos_rank_sum = 0;
  std::size_t n_pos = 0;
  for (std::size_t k = 0; k < labels.size(); ++k)
    if (labels[k]) {
      pos_rank_sum += rank[k];
      ++n_pos;
    }
  const std::size_t n_neg = labels.size() - n_pos;
  return (pos_rank_sum - static_cast<double>(n_pos) *
                             static_cast<double>(n_pos + 1) / 2.0) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double metric_pr_auc(const std::vector<double>& scores,
                     const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw InputError("pr_auc: bad input sizes");
  require_both_classes(labels, "pr_auc");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  const double total_pos = static_cast<double>(
      std::count(labels.begin(), labels.end(), 1));

  // step integration: area += precision * delta(recall) at each threshold,
  // processing tied scores as one block
  double area = 0;
  double tp = 0, fp = 0, prev_recall = 0;
  std::size_t k = 0;
  while (k < order.size()) {
    std::size_t j = k;
    while (j + 1 < order.size() &&
           scores[order[j + 1]] == scores[order[k]])
      ++j;
    for (std::size_t m = k; m <= j; ++m)
      (labels[order[m]] ? tp : fp) += 1.0;
    const double recall = tp / total_pos;
    const double precision = tp / (tp + fp);
    area += precision * (recall - prev_recall);
    prev_recall = recall;
    k = j + 1;
  }
  return area;
}

namespace {

struct FStats {
  double micro = 0, macro = 0;
};

FStats f_scores(const std::vector<int>& predicted,
                const std::vector<int>& actual) {
  if (predicted.size() != actual.size() || predicted.empty())
    throw InputError("f-score: bad input sizes");
  std::set<int> class_set(actual.begin(), actual.end());
  for (int c : predicted) class_set.insert(c);

  double micro_tp = 0, micro_fp = 0, micro_fn = 0;
  double macro_sum = 0;
  for (int c : class_set) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
      if (predicted[i] == c && actual[i] == c) ++tp;
      else if (predicted[i] == c) ++fp;
      else if (actual[i] == c) ++fn;
    }
    micro_tp += tp;
    micro_fp += fp;
    micro_fn += fn;
    macro_sum += tp > 0 ? 2 * tp / (2 * tp + fp + fn) : 0.0;
  }
  FStats out;
  out.micro = 2 * micro_tp / (2 * micro_tp + micro_fp + micro_fn);
  out.macro = macro_sum / static_cast<double>(class_set.size());
  return out;
}

}  // namespace

double metric_micro_f(const std::vector<int>& predicted,
                      const std::vector<int>& actual) {
  return f_scores(predicted, actual).micro;
}

double metric_macro_f(const std::vector<int>& predicted,
                      const std::vector<int>& actual) {
  return f_scores(predicted, actual).macro;
}

InstanceSet build_link_instances(
    const FinalEmbeddings& emb,
    const std::vector<std::pair<NodeId, NodeId>>& positives,
    std::size_t neg_ratio, PairCombiner combiner, std::uint64_t seed) {
  if (neg_ratio < 1) throw InputError("neg_ratio must be >= 1");
  if (positives.empty()) throw InputError("no positive pairs");
  const std::size_t n = emb.num_nodes;
  for (auto [a, b] : positives)
    if (a >= n || b >= n)
      throw InputError("positive pair references node without embedding");

  std::set<std::pair<NodeId, NodeId>> pos_set;
  for (auto [a, b] : positives)
    pos_set.insert({std::min(a, b), std::max(a, b)});

  const std::size_t want_neg = pos_set.size() * neg_ratio;
  const std::size_t candidates = n * (n - 1) / 2 - pos_set.size();
  if (candidates < want_neg)
    throw InputError("not enough candidate negative pairs");

  auto rng = make_stream(seed, "link_neg");
  std::set<std::pair<NodeId, NodeId>> negs;
  while (negs.size() < want_neg) {
    NodeId a = static_cast<NodeId>(uniform_index(rng, n));
    NodeId b = static_cast<NodeId>(uniform_index(rng, n));
    if (a == b) continue;
    std::pair<NodeId, NodeId> key{std::min(a, b), std::max(a, b)};
    if (pos_set.count(key)) continue;
    negs.insert(key);
  }

  auto combine = [&](NodeId a, NodeId b) {
    auto ra = emb.row(a);
    auto rb = emb.row(b);
    std::vector<double> f;
    if (combiner == PairCombiner::Concat) {
      f.reserve(2 * emb.dim);
      f.insert(f.end(), ra.begin(), ra.end());
      f.insert(f.end(), rb.begin(), rb.end());
    } else {
      f.resize(emb.dim);
      for (std::size_t k = 0; k < emb.dim; ++k) f[k] = ra[k] * rb[k];
    }
    return f;
  };

  InstanceSet out;
  for (auto [a, b] : pos_set) {
    out.features.push_back(combine(a, b));
    out.labels.push_back(1);
  }
  for (auto [a, b] : negs) {
    out.features.push_back(combine(a, b));
    out.labels.push_back(0);
  }
  return out;
}

void LogisticModel::fit(const std::vector<std::vector<double>>& x,
                        const std::vector<int>& y, std::size_t num_classes,
                        const LogisticConfig& cfg) {
  if (x.empty() || x.size() != y.size())
    throw InputError("logistic fit: bad input sizes");
  num_classes_ = num_classes;
  dim_ = x[0].size();
  const std::size_t n = x.size();

  // standardize features on the training data
  mean_.assign(dim_, 0.0);
  scale_.assign(dim_, 1.0);
  for (const auto& row : x)
    for (std::size_t k = 0; k < dim_; ++k) mean_[k] += row[k];
  for (auto& m : mean_) m /= static_cast<double>(n);
  std::vector<double> var(dim_, 0.0);
  for (const auto& row : x)
    for (std::size_t k = 0; k < dim_; ++k) {
      const double d = row[k] - mean_[k];
      var[k] += d * d;
    }
  for (std::size_t k = 0; k < dim_; ++k)
    scale_[k] = std::sqrt(var[k] / static_cast<double>(n)) + 1e-12;

  std::vector<std::vector<double>> xs(n, std::vector<double>(dim_));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < dim_; ++k)
      xs[i][k] = (x[i][k] - mean_[k]) / scale_[k];

  w_.assign(num_classes_ * dim_, 0.0);
  b_.assign(num_classes_, 0.0);

  // gradient descent with a Lipschitz-safe step on the mean cross-entropy
  double sq_norm = 0;
  for (const auto& row : xs)
    for (double v : row) sq_norm += v * v;
  const double lipschitz =
      0.25 * (sq_norm / static_cast<double>(n) + 1.0) + cfg.l2;
  const double step = 1.0 / lipschitz;

  std::vector<double> gw(num_classes_ * dim_), gb(num_classes_);
  std::vector<double> logits(num_classes_);
  double prev_loss = 1e300;
  for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
    std::fill(gw.begin(), gw.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    double loss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < num_classes_; ++c) {
        double s = b_[c];
        for (std::size_t k = 0; k < dim_; ++k)
          s += w_[c * dim_ + k] * xs[i][k];
        logits[c] = s;
      }
      const double mx = *std::max_element(logits.begin(), logits.end());
      double z = 0;
      for (double& s : logits) {
        s = std::exp(s - mx);
        z += s;
      }
      loss -= std::log(logits[y[i]] / z);
      for (std::size_t c = 0; c < num_classes_; ++c) {
        const double d = logits[c] / z - (static_cast<int>(c) == y[i]);
        gb[c] += d;
        for (std::size_t k = 0; k < dim_; ++k)
          gw[c * dim_ + k] += d * xs[i][k];
      }
    }
    const double inv = 1.0 / static_cast<double>(n);
    loss *= inv;
    for (std::size_t k = 0; k < w_.size(); ++k) {
      loss += 0.5 * cfg.l2 * w_[k] * w_[k] * inv;
      w_[k] -= step * (gw[k] * inv + cfg.l2 * w_[k] * inv);
    }
    for (std::size_t c = 0; c < num_classes_; ++c)
      b_[c] -= step * gb[c] * inv;
    if (std::abs(prev_loss - loss) < cfg.tol) break;
    prev_loss = loss;
  }
}

std::vector<double> LogisticModel::predict_proba(
    const std::vector<double>& x) const {
  std::vector<double> logits(num_classes_);
  for (std::size_t c = 0; c < num_classes_; ++c) {
    double s = b_[c];
    for (std::size_t k = 0; k < dim_; ++k)
      s += w_[c * dim_ + k] * (x[k] - mean_[k]) / scale_[k];
    logits[c] = s;
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0;
  for (double& s : logits) {
    s = std::exp(s - mx);
    z += s;
  }
  for (double& s : logits) s /= z;
  return logits;
}

int LogisticModel::predict(const std::vector<double>& x) const {
  auto p = predict_proba(x);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

EvalReport logistic_fit(const std::vector<std::vector<double>>& features,
                        const std::vector<int>& labels,
                        const std::vector<int>& folds, std::size_t num_folds,
                        const LogisticConfig& cfg) {
  if (features.size() != labels.size() || features.size() != folds.size())
    throw InputError("logistic_fit: size mismatch");
  const std::size_t num_classes =
      static_cast<std::size_t>(
          *std::max_element(labels.begin(), labels.end())) + 1;
  const bool binary = num_classes == 2;

  EvalReport report;
  report.num_folds = num_folds;
  for (std::size_t f = 0; f < num_folds; ++f) {
    std::vector<std::vector<double>> xtr, xte;
    std::vector<int> ytr, yte;
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (folds[i] == static_cast<int>(f)) {
        xte.push_back(features[i]);
        yte.push_back(labels[i]);
      } else {
        xtr.push_back(features[i]);
        ytr.push_back(labels[i]);
      }
    }
    if (xte.empty() || xtr.empty())
      throw InputError("fold " + std::to_string(f) + " is empty");
    std::set<int> train_classes(ytr.begin(), ytr.end());
    if (train_classes.size() < 2)
      throw InputError("fold " + std::to_string(f) +
                       ": training split has a single class");

    LogisticModel model;
    model.fit(xtr, ytr, num_classes, cfg);

    FoldScores fs;
    fs.fold = static_cast<int>(f);
    std::vector<int> pred;
    pred.reserve(yte.size());
    for (const auto& row : xte) pred.push_back(model.predict(row));
    if (binary) {
      std::vector<double> scores;
      scores.reserve(yte.size());
      for (const auto& row : xte) scores.push_back(model.predict_proba(row)[1]);
      fs.roc_auc = metric_roc_auc(scores, yte);
      fs.pr_auc = metric_pr_auc(scores, yte);
    }
    fs.micro_f = metric_micro_f(pred, yte);
    fs.macro_f = metric_macro_f(pred, yte);
    report.folds.push_back(fs);
  }

  auto mean_of = [&](auto get) {
    double s = 0;
    for (const auto& f : report.folds) s += get(f);
    return s / static_cast<double>(report.folds.size());
  };
  report.mean.fold = -1;
  if (binary) {
    report.mean.roc_auc = mean_of([](const FoldScores& f) { return f.roc_auc; });
    report.mean.pr_auc = mean_of([](const FoldScores& f) { return f.pr_auc; });
  }
  report.mean.micro_f = mean_of([](const FoldScores& f) { return f.micro_f; });
  report.mean.macro_f = mean_of([](const FoldScores& f) { return f.macro_f; });
  return report;
}

std::vector<std::vector<double>> label_features(const FinalEmbeddings& emb,
                                                const LabelSet& labels,
                                                PairCombiner combiner) {
  std::vector<std::vector<double>> out;
  out.reserve(labels.items.size());
  for (auto [a, b] : labels.items) {
    if (a >= emb.num_nodes || b >= emb.num_nodes)
      throw InputError("labeled node " +
                       std::to_string(a >= emb.num_nodes ? a : b) +
                       " has no embedding");
    auto ra = emb.row(a);
    if (labels.task_kind == TaskKind::NodeClass) {
      out.emplace_back(ra.begin(), ra.end());
      continue;
    }
    auto rb = emb.row(b);
    std::vector<double> f;
    if (combiner == PairCombiner::Concat) {
      f.insert(f.end(), ra.begin(), ra.end());
      f.insert(f.end(), rb.begin(), rb.end());
    } else {
      f.resize(emb.dim);
      for (std::size_t k = 0; k < emb.dim; ++k) f[k] = ra[k] * rb[k];
    }
    out.push_back(std::move(f));
  }
  return out;
}

namespace {

void print_scores_json(std::ofstream& out, const FoldScores& f) {
  out << "{\"fold\": " << f.fold;
  if (f.roc_auc >= 0) out << ", \"roc_auc\": " << f.roc_auc;
  if (f.pr_auc >= 0) out << ", \"pr_auc\": " << f.pr_auc;
  out << ", \"micro_f\": " << f.micro_f << ", \"macro_f\": " << f.macro_f
      << "}";
}

}  // namespace

void write_report_json(const EvalReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "{\"task\": \"" << r.task << "\", \"num_folds\": " << r.num_folds
      << ", \"folds\": [";
  for (std::size_t i = 0; i < r.folds.size(); ++i) {
    if (i) out << ", ";
    print_scores_json(out, r.folds[i]);
  }
  out << "], \"mean\": ";
  print_scores_json(out, r.mean);
  out << "}\n";
}

void write_report_csv_row(const EvalReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "task,roc_auc,pr_auc,micro_f,macro_f\n";
  out << r.task << ',' << r.mean.roc_auc << ',' << r.mean.pr_auc << ','
      << r.mean.micro_f << ',' << r.mean.macro_f << '\n';
}

}  // namespace mvembed
