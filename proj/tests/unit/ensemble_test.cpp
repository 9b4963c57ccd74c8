#include "medxai/ensemble.hpp"

#include <gtest/gtest.h>

#include <algorithm>

#include "medxai/errors.hpp"
#include "test_predictors.hpp"
#include "test_support.hpp"

namespace medxai {
namespace {

using testing::constant_predictor;
using Labels = std::vector<std::size_t>;

std::size_t counting_oracle(const Labels& labels, std::size_t classes) {
  std::vector<std::size_t> counts(classes, 0);
  for (auto l : labels) ++counts[l];
  std::size_t best = 0;
  for (std::size_t c = 1; c < classes; ++c)
    if (counts[c] > counts[best]) best = c;
  return best;
}

TEST(MajorityVote, Examples) {
  EXPECT_EQ(majority_vote(Labels{1, 1, 0, 1, 0}), 1u);
  EXPECT_EQ(majority_vote(Labels{0, 0, 0, 0, 0}), 0u);
  EXPECT_EQ(majority_vote(Labels{0, 1}), 0u);
  EXPECT_EQ(majority_vote(Labels{2, 1}), 1u);
  EXPECT_THROW(majority_vote(Labels{}), ConfigError);
}

TEST(MajorityVote, ExhaustiveThreeClassListsUpToSeven) {
  std::size_t cases = 0;
  for (std::size_t len = 1; len <= 7; ++len) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < len; ++i) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
      Labels labels(len);
      std::size_t c = code;
      for (auto& l : labels) {
        l = c % 3;
        c /= 3;
      }
      ASSERT_EQ(majority_vote(labels), counting_oracle(labels, 3));
      ++cases;
    }
  }
  EXPECT_EQ(cases, 3279u);
}

TEST(WeightedVote, Examples) {
  EXPECT_EQ(weighted_vote(Labels{0, 1, 1}, {{5, 1, 1}}).label, 0u);
  EXPECT_EQ(weighted_vote(Labels{0, 1, 1}, {{1, 1, 1}}).label, 1u);
  const VoteOutcome tie = weighted_vote(Labels{0, 1}, {{2, 2}});
  EXPECT_EQ(tie.label, 0u);
  EXPECT_TRUE(tie.tie_broken);
  EXPECT_EQ(tie.tallies, (std::vector<double>{2, 2}));
}

TEST(WeightedVote, Errors) {
  EXPECT_THROW(weighted_vote(Labels{0, 1}, {{1}}), ConfigError);
  EXPECT_THROW(weighted_vote(Labels{0, 1}, {{0, 0}}), ConfigError);
  EXPECT_THROW(weighted_vote(Labels{0, 1}, {{1, -1}}), ConfigError);
  EXPECT_THROW(weighted_vote(Labels{0, 3}, {}, 2), ConfigError);
}

TEST(WeightedVote, UniformWeightsReduceToMajority) {
  Rng rng(1);
  for (int trial = 0; trial < 10000; ++trial) {
    Labels labels(1 + rng.below(9));
    for (auto& l : labels) l = rng.below(4);
    const std::vector<double> w(labels.size(), rng.uniform(0.1, 10.0));
    ASSERT_EQ(weighted_vote(labels, {w}).label, majority_vote(labels));
  }
}

TEST(WeightedVote, PositiveScalingNeverChangesTheLabel) {
  Rng rng(2);
  for (int trial = 0; trial < 10000; ++trial) {
    Labels labels(1 + rng.below(9));
    std::vector<double> w(labels.size());
    for (auto& l : labels) l = rng.below(3);
    // Small integer weights make exact ties common.
    for (auto& x : w) x = static_cast<double>(rng.below(4));
    if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) w[0] = 1.0;
    const double scale = std::exp(rng.uniform(-20.0, 20.0));
    std::vector<double> scaled = w;
    for (auto& x : scaled) x *= scale;
    ASSERT_EQ(weighted_vote(labels, {w}).label, weighted_vote(labels, {scaled}).label);
  }
}

TEST(WeightedVote, OddBinaryVotesNeverTie) {
  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    Labels labels(1 + 2 * rng.below(5));
    for (auto& l : labels) l = rng.below(2);
    EXPECT_FALSE(weighted_vote(labels, {}, 2).tie_broken);
  }
}

TEST(EnsemblePredict, ThreeOfFiveVoteTumor) {
  PredictorList models{constant_predictor("a", {0.2, 0.8}), constant_predictor("b", {0.9, 0.1}),
                       constant_predictor("c", {0.4, 0.6}), constant_predictor("d", {0.7, 0.3}),
                       constant_predictor("e", {0.1, 0.9})};
  const VoteRecord r = ensemble_predict(models, Tensor::zeros({1, 1, 1}), {}, "img");
  EXPECT_EQ(r.final_label, 1u);
  EXPECT_EQ(r.tallies, (std::vector<double>{2, 3}));
  EXPECT_FALSE(r.tie_broken);
  ASSERT_EQ(r.votes.size(), 5u);
  EXPECT_EQ(r.votes[1].label, 0u);

  const auto j = vote_record_to_json(r);
  EXPECT_EQ(j["input_id"], "img");
  EXPECT_EQ(j["final"], 1);
  EXPECT_EQ(j["tallies"]["1"], 3.0);
  EXPECT_EQ(j["votes"][0]["model"], "a");
  EXPECT_EQ(j["votes"][0]["probs"][1], 0.8);
  EXPECT_EQ(j["tie_broken"], false);
}

TEST(EnsemblePredict, SingleModelAndPermutationStability) {
  const auto one = ensemble_predict({constant_predictor("a", {0.3, 0.7})}, Tensor::zeros({1, 1, 1}), {});
  EXPECT_EQ(one.final_label, 1u);

  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    PredictorList models;
    for (std::size_t m = 0; m < 1 + rng.below(6); ++m) {
      const double p = rng.uniform();
      models.push_back(constant_predictor("m" + std::to_string(m), {1.0 - p, p}));
    }
    const auto base = ensemble_predict(models, Tensor::zeros({1, 1, 1}), {});
    rng.shuffle(std::span<std::shared_ptr<const Predictor>>(models));
    const auto shuffled = ensemble_predict(models, Tensor::zeros({1, 1, 1}), {});
    EXPECT_EQ(base.final_label, shuffled.final_label);
    EXPECT_EQ(base.tallies, shuffled.tallies);
    double sum = 0.0;
    for (double t : base.tallies) sum += t;
    EXPECT_EQ(sum, static_cast<double>(models.size()));
  }
}

TEST(EnsemblePredict, ClassCountMismatchAndFailuresNameTheModel) {
  PredictorList mixed{constant_predictor("two", {0.5, 0.5}),
                      constant_predictor("three", {0.2, 0.3, 0.5})};
  EXPECT_THROW(ensemble_predict(mixed, Tensor::zeros({1, 1, 1}), {}), ConfigError);
  EXPECT_THROW(EnsemblePredictor("e", mixed, {}), ConfigError);

  auto failing = std::make_shared<testing::LambdaPredictor>(
      "broken", Shape{1, 1, 1}, 2,
      [](const Tensor&) -> std::vector<double> { throw ShapeError("bad input"); });
  try {
    ensemble_predict({constant_predictor("ok", {0.5, 0.5}), failing}, Tensor::zeros({1, 1, 1}), {});
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("'broken'"), std::string::npos) << e.what();
  }
}

TEST(EnsemblePredictor, ProbabilitiesAreVoteShares) {
  const EnsemblePredictor e("ens",
                            {constant_predictor("a", {0.2, 0.8}), constant_predictor("b", {0.9, 0.1}),
                             constant_predictor("c", {0.4, 0.6})},
                            {{1.0, 2.0, 1.0}});
  const auto p = e.predict(Tensor::zeros({1, 1, 1}));
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
  EXPECT_EQ(e.vote(Tensor::zeros({1, 1, 1})).final_label, 0u);
  EXPECT_EQ(e.class_count(), 2u);
}

}  // namespace
}  // namespace medxai
