#ifndef MEDXAI_METRICS_HPP
#define MEDXAI_METRICS_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace medxai {

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  int positive_class = 1;

  std::size_t total() const { return tp + fp + tn + fn; }
};

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth,
                          int positive_class = 1);

// 0/0 ratios are reported as 0 with the matching flag set.
struct ClassificationScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  bool precision_degenerate = false;
  bool recall_degenerate = false;
  bool f1_degenerate = false;
  bool accuracy_degenerate = false;
};

ClassificationScores prf1_accuracy(const ConfusionMatrix& cm);

struct RocPoint {
  double threshold;  // +inf first, -inf last
  double fpr;
  double tpr;
};

struct RocCurve {
  std::vector<RocPoint> points;
};

struct RocResult {
  RocCurve curve;
  double auc = 0.0;
};

// Sweeps thresholds over the distinct scores (ties grouped), predicting
// positive when score >= threshold. AUC by the trapezoid rule.
RocResult roc_auc(std::span<const double> scores, std::span<const int> labels);

std::string roc_to_csv(const RocCurve& curve);
nlohmann::json confusion_to_json(const ConfusionMatrix& cm);
nlohmann::json scores_to_json(const ClassificationScores& scores);

}  // namespace medxai

#endif  // MEDXAI_METRICS_HPP
