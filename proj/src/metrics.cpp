#include "medxai/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "medxai/errors.hpp"

namespace medxai {

namespace {

void check_binary(std::span<const int> labels, const char* what) {
  for (int l : labels) {
    if (l != 0 && l != 1) {
      throw DataError(std::string(what) + " must be binary, found label " +
                      std::to_string(l));
    }
  }
}

double ratio(std::size_t num, std::size_t den, bool& degenerate) {
  degenerate = den == 0;
  return degenerate ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth,
                          int positive_class) {
  if (predicted.size() != truth.size()) {
    throw ShapeError("confusion: " + std::to_string(predicted.size()) +
                     " predictions vs " + std::to_string(truth.size()) + " labels");
  }
  if (positive_class != 0 && positive_class != 1) {
    throw ConfigError("positive class must be 0 or 1");
  }
  check_binary(predicted, "predicted labels");
  check_binary(truth, "true labels");
  ConfusionMatrix cm;
  cm.positive_class = positive_class;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool pred_pos = predicted[i] == positive_class;
    const bool true_pos = truth[i] == positive_class;
    if (pred_pos && true_pos) ++cm.tp;
    else if (pred_pos) ++cm.fp;
    else if (true_pos) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

ClassificationScores prf1_accuracy(const ConfusionMatrix& cm) {
  ClassificationScores s;
  s.precision = ratio(cm.tp, cm.tp + cm.fp, s.precision_degenerate);
  s.recall = ratio(cm.tp, cm.tp + cm.fn, s.recall_degenerate);
  // Harmonic mean of precision and recall, written in counts.
  s.f1 = ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn, s.f1_degenerate);
  s.accuracy = ratio(cm.tp + cm.tn, cm.total(), s.accuracy_degenerate);
  return s;
}

RocResult roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ShapeError("roc_auc: " + std::to_string(scores.size()) + " scores vs " +
                     std::to_string(labels.size()) + " labels");
  }
  check_binary(labels, "labels");
  for (double s : scores)
    if (std::isnan(s)) throw NumericError("roc_auc: NaN score");
  const std::size_t positives =
      static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw DataError("roc_auc needs at least one positive and one negative label");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double p = static_cast<double>(positives), n = static_cast<double>(negatives);
  RocResult result;
  result.curve.points.push_back({kInf, 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      (labels[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    result.curve.points.push_back(
        {threshold, static_cast<double>(fp) / n, static_cast<double>(tp) / p});
  }
  result.curve.points.push_back({-kInf, 1.0, 1.0});

  // Trapezoids over grouped thresholds give the tie-corrected U statistic.
  double area = 0.0;
  const auto& pts = result.curve.points;
  for (std::size_t i = 1; i < pts.size(); ++i)
    area += (pts[i].fpr - pts[i - 1].fpr) * (pts[i].tpr + pts[i - 1].tpr) / 2.0;
  result.auc = area;
  return result;
}

std::string roc_to_csv(const RocCurve& curve) {
  std::ostringstream out;
  out.precision(17);
  out << "threshold,fpr,tpr\n";
  for (const auto& pt : curve.points) {
    if (std::isinf(pt.threshold)) {
      out << (pt.threshold > 0 ? "inf" : "-inf");
    } else {
      out << pt.threshold;
    }
    out << ',' << pt.fpr << ',' << pt.tpr << '\n';
  }
  return out.str();
}

nlohmann::json confusion_to_json(const ConfusionMatrix& cm) {
  return {{"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn},
          {"positive_class", cm.positive_class}, {"total", cm.total()}};
}

nlohmann::json scores_to_json(const ClassificationScores& s) {
  nlohmann::json degenerate = nlohmann::json::array();
  if (s.precision_degenerate) degenerate.push_back("precision");
  if (s.recall_degenerate) degenerate.push_back("recall");
  if (s.f1_degenerate) degenerate.push_back("f1");
  if (s.accuracy_degenerate) degenerate.push_back("accuracy");
  return {{"precision", s.precision},
          {"recall", s.recall},
          {"f1", s.f1},
          {"accuracy", s.accuracy},
          {"degenerate", degenerate}};
}

}  // namespace medxai
