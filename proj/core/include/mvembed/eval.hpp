#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvembed/graph.hpp"
#include "mvembed/tables.hpp"

namespace mvembed {

// roc_auc = concordant-pair fraction, ties counted 1/2.
double metric_roc_auc(const std::vector<double>& scores,
                      const std::vector<int>& labels);

// Precision-recall area via step-wise integration (no interpolation).
double metric_pr_auc(const std::vector<double>& scores,
                     const std::vector<int>& labels);

// F-scores at argmax predictions. micro_f equals accuracy for single-label
// multi-class tasks.
double metric_micro_f(const std::vector<int>& predicted,
                      const std::vector<int>& actual);
double metric_macro_f(const std::vector<int>& predicted,
                      const std::vector<int>& actual);

enum class PairCombiner { Concat, Hadamard };

struct InstanceSet {
  std::vector<std::vector<double>> features;
  std::vector<int> labels;  // 1 positive, 0 negative for link instances
};

// Link-prediction instance construction: each positive pair plus neg_ratio
// uniformly sampled non-positive, non-self pairs. Pair features come from
// the combiner over the two node embeddings.
InstanceSet build_link_instances(
    const FinalEmbeddings& emb,
    const std::vector<std::pair<NodeId, NodeId>>& positives,
    std::size_t neg_ratio, PairCombiner combiner, std::uint64_t seed);

// L2-regularized multinomial logistic regression trained by gradient
// descent; no external learning dependency.
struct LogisticConfig {
  double l2 = 1.0;
  double tol = 1e-6;
  std::size_t max_iters = 1000;
};

class LogisticModel {
 public:
  void fit(const std::vector<std::vector<double>>& x,
           const std::vector<int>& y, std::size_t num_classes,
           const LogisticConfig& cfg);
  std::vector<double> predict_proba(const std::vector<double>& x) const;
  int predict(const std::vector<double>& x) const;

 private:
  std::size_t num_classes_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> w_;  // flat num_classes x dim
  std::vector<double> b_;
  std::vector<double> mean_, scale_;  // feature standardization
};

struct FoldScores {
  int fold = 0;
  double roc_auc = -1, pr_auc = -1;   // binary tasks
  double micro_f = -1, macro_f = -1;  // multi-class tasks
};

struct EvalReport {
  std::string task;  // "node-class" or "pair-class"
  std::size_t num_folds = 0;
  std::vector<FoldScores> folds;
  FoldScores mean;  // arithmetic mean of folds
};

// Cross-validated logistic regression on frozen features. Binary tasks get
// ROC/PR AUC, multi-class tasks get micro/macro F.
EvalReport logistic_fit(const std::vector<std::vector<double>>& features,
                        const std::vector<int>& labels,
                        const std::vector<int>& folds, std::size_t num_folds,
                        const LogisticConfig& cfg = {});

// Features for a LabelSet from embeddings (node rows, or pair combiner).
std::vector<std::vector<double>> label_features(const FinalEmbeddings& emb,
                                                const LabelSet& labels,
                                                PairCombiner combiner);

void write_report_json(const EvalReport& r, const std::string& path);
void write_report_csv_row(const EvalReport& r, const std::string& path);

}  // namespace mvembed
