#include "medxai/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "medxai/errors.hpp"
#include "medxai/random.hpp"
#include "oracles.hpp"

namespace medxai {
namespace {

ConfusionMatrix counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  ConfusionMatrix cm;
  cm.tp = tp;
  cm.fp = fp;
  cm.tn = tn;
  cm.fn = fn;
  return cm;
}

// Random scores on a coarse grid so ties are common.
void random_scored_set(Rng& rng, std::vector<double>& scores, std::vector<int>& labels) {
  const std::size_t n = 2 + rng.below(60);
  scores.assign(n, 0.0);
  labels.assign(n, 0);
  const std::size_t levels = 1 + rng.below(12);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = static_cast<double>(rng.below(levels)) / static_cast<double>(levels);
    labels[i] = rng.bit() ? 1 : 0;
  }
  labels[0] = 1;
  labels[1] = 0;
}

TEST(Confusion, Examples) {
  const std::vector<int> same{1, 0, 1, 1, 0, 0, 1, 0, 1, 1};
  const ConfusionMatrix a = confusion(same, same);
  EXPECT_EQ(a.fp, 0u);
  EXPECT_EQ(a.fn, 0u);
  EXPECT_EQ(a.tp + a.tn, 10u);

  const ConfusionMatrix b = confusion(std::vector<int>{1, 1, 1, 1}, std::vector<int>{1, 0, 1, 0});
  EXPECT_EQ(b.tp, 2u);
  EXPECT_EQ(b.fp, 2u);
  EXPECT_EQ(b.tn, 0u);
  EXPECT_EQ(b.fn, 0u);
}

TEST(Confusion, RebuildsTheValidationOutcome) {
  std::vector<int> pred, truth;
  auto add = [&](int p, int t, int k) {
    for (int i = 0; i < k; ++i) {
      pred.push_back(p);
      truth.push_back(t);
    }
  };
  add(1, 1, 514);
  add(1, 0, 7);
  add(0, 0, 93);
  add(0, 1, 4);
  const ConfusionMatrix cm = confusion(pred, truth);
  EXPECT_EQ(cm.tp, 514u);
  EXPECT_EQ(cm.fp, 7u);
  EXPECT_EQ(cm.tn, 93u);
  EXPECT_EQ(cm.fn, 4u);
  EXPECT_EQ(cm.total(), 618u);
  // Taking class 0 as positive swaps the roles.
  const ConfusionMatrix flipped = confusion(pred, truth, 0);
  EXPECT_EQ(flipped.tp, 93u);
  EXPECT_EQ(flipped.fn, 7u);
}

TEST(Confusion, Errors) {
  EXPECT_THROW(confusion(std::vector<int>{1}, std::vector<int>{1, 0}), ShapeError);
  EXPECT_THROW(confusion(std::vector<int>{2}, std::vector<int>{1}), DataError);
  EXPECT_THROW(confusion(std::vector<int>{1}, std::vector<int>{1}, 3), ConfigError);
}

TEST(Scores, ValidationCounts) {
  const ClassificationScores s = prf1_accuracy(counts(514, 7, 93, 4));
  EXPECT_NEAR(s.precision, 514.0 / 521.0, 1e-15);
  EXPECT_NEAR(s.recall, 514.0 / 518.0, 1e-15);
  EXPECT_NEAR(s.f1, 1028.0 / 1039.0, 1e-15);
  EXPECT_NEAR(s.accuracy, 607.0 / 618.0, 1e-15);
  EXPECT_NEAR(s.precision, 0.98656, 1e-5);
  EXPECT_NEAR(s.recall, 0.99228, 1e-5);
  EXPECT_NEAR(s.accuracy, 0.98220, 1e-5);
  EXPECT_FALSE(s.precision_degenerate || s.recall_degenerate || s.f1_degenerate);
}

TEST(Scores, PerfectAndDegenerate) {
  const ClassificationScores perfect = prf1_accuracy(counts(5, 0, 7, 0));
  EXPECT_EQ(perfect.precision, 1.0);
  EXPECT_EQ(perfect.recall, 1.0);
  EXPECT_EQ(perfect.f1, 1.0);
  EXPECT_EQ(perfect.accuracy, 1.0);

  const ClassificationScores none = prf1_accuracy(counts(0, 0, 4, 3));
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_TRUE(none.precision_degenerate);
  EXPECT_FALSE(none.recall_degenerate);
  EXPECT_FALSE(none.f1_degenerate);  // 2tp / (2tp + fp + fn) = 0 / 3
  const ClassificationScores negatives_only = prf1_accuracy(counts(0, 0, 4, 0));
  EXPECT_TRUE(negatives_only.recall_degenerate);
  EXPECT_TRUE(negatives_only.f1_degenerate);
  EXPECT_EQ(negatives_only.accuracy, 1.0);

  const ClassificationScores empty = prf1_accuracy(counts(0, 0, 0, 0));
  EXPECT_TRUE(empty.accuracy_degenerate);
  EXPECT_EQ(empty.accuracy, 0.0);
  const auto j = scores_to_json(none);
  EXPECT_NE(j.dump().find("precision"), std::string::npos);
}

TEST(Scores, DependOnlyOnTheCounts) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = counts(rng.below(50), rng.below(50), rng.below(50), rng.below(50));
    const std::size_t k = 1 + rng.below(9);
    const auto b = counts(a.tp * k, a.fp * k, a.tn * k, a.fn * k);
    const auto sa = prf1_accuracy(a), sb = prf1_accuracy(b);
    EXPECT_NEAR(sa.precision, sb.precision, 1e-12);
    EXPECT_NEAR(sa.recall, sb.recall, 1e-12);
    EXPECT_NEAR(sa.f1, sb.f1, 1e-12);
    EXPECT_NEAR(sa.accuracy, sb.accuracy, 1e-12);
  }
}

TEST(Roc, Examples) {
  EXPECT_EQ(roc_auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}).auc, 1.0);
  EXPECT_EQ(roc_auc(std::vector<double>(6, 0.4), std::vector<int>{0, 1, 0, 1, 1, 0}).auc, 0.5);
  EXPECT_EQ(roc_auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}).auc,
            0.75);
}

TEST(Roc, CurveShapeAndCsv) {
  const RocResult r =
      roc_auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1});
  ASSERT_GE(r.curve.points.size(), 2u);
  EXPECT_TRUE(std::isinf(r.curve.points.front().threshold));
  EXPECT_GT(r.curve.points.front().threshold, 0.0);
  EXPECT_EQ(r.curve.points.front().fpr, 0.0);
  EXPECT_EQ(r.curve.points.front().tpr, 0.0);
  EXPECT_EQ(r.curve.points.back().fpr, 1.0);
  EXPECT_EQ(r.curve.points.back().tpr, 1.0);
  const std::string csv = roc_to_csv(r.curve);
  EXPECT_EQ(csv.rfind("threshold,fpr,tpr\ninf,0,0\n", 0), 0u) << csv;
  EXPECT_NE(csv.find("\n-inf,1,1\n"), std::string::npos) << csv;
}

TEST(Roc, AgreesWithMannWhitneyOnRandomSets) {
  Rng rng(2);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int trial = 0; trial < 1000; ++trial) {
    random_scored_set(rng, scores, labels);
    EXPECT_NEAR(roc_auc(scores, labels).auc, testing::mann_whitney_auc(scores, labels), 1e-9);
  }
}

TEST(Roc, CoordinatesNeverDecrease) {
  Rng rng(3);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int trial = 0; trial < 200; ++trial) {
    random_scored_set(rng, scores, labels);
    const auto pts = roc_auc(scores, labels).curve.points;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      EXPECT_GE(pts[i].fpr, pts[i - 1].fpr);
      EXPECT_GE(pts[i].tpr, pts[i - 1].tpr);
      EXPECT_LT(pts[i].threshold, pts[i - 1].threshold);
    }
  }
}

TEST(Roc, LabelFlipDuality) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(40);
    std::vector<double> scores(n), negated(n);
    std::vector<int> labels(n), flipped(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = rng.uniform();  // continuous, so tie-free
      negated[i] = -scores[i];
      labels[i] = rng.bit() ? 1 : 0;
    }
    labels[0] = 1;
    labels[1] = 0;
    for (std::size_t i = 0; i < n; ++i) flipped[i] = 1 - labels[i];
    const double auc = roc_auc(scores, labels).auc;
    EXPECT_NEAR(roc_auc(negated, flipped).auc, auc, 1e-12);
    EXPECT_NEAR(roc_auc(scores, flipped).auc, 1.0 - auc, 1e-12);
  }
}

TEST(Roc, Errors) {
  EXPECT_THROW(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), DataError);
  EXPECT_THROW(roc_auc(std::vector<double>{0.1}, std::vector<int>{1, 0}), ShapeError);
  EXPECT_THROW(roc_auc(std::vector<double>{std::nan(""), 0.2}, std::vector<int>{1, 0}),
               NumericError);
}

TEST(Json, ConfusionFields) {
  const auto j = confusion_to_json(counts(514, 7, 93, 4));
  EXPECT_EQ(j["tp"], 514);
  EXPECT_EQ(j["total"], 618);
}

}  // namespace
}  // namespace medxai
