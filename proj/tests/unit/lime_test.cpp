#include "medxai/lime.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "medxai/errors.hpp"
#include "oracles.hpp"
#include "test_predictors.hpp"
#include "test_support.hpp"

namespace medxai {
namespace {

// Image whose pixels in segment j (grid g) all equal `values[j]`.
Tensor piecewise_image(std::size_t size, std::size_t grid, const std::vector<double>& values) {
  Tensor img({1, size, size});
  const SegmentMask mask = segment_image(img, grid);
  for (std::size_t p = 0; p < img.size(); ++p) img[p] = values[mask.labels[p]];
  return img;
}

// Mean pixel value of each segment.
std::vector<double> segment_means(const Tensor& img, const SegmentMask& mask) {
  std::vector<double> sum(mask.segment_count, 0.0);
  const auto sizes = mask.segment_sizes();
  for (std::size_t p = 0; p < mask.labels.size(); ++p) sum[mask.labels[p]] += img[p];
  for (std::size_t s = 0; s < sum.size(); ++s) sum[s] /= static_cast<double>(sizes[s]);
  return sum;
}

Tensor random_binary(Rng& rng, std::size_t n, std::size_t s) {
  Tensor z({n, s});
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = rng.bit() ? 1.0 : 0.0;
  for (std::size_t j = 0; j < s; ++j) z[j] = 1.0;
  return z;
}

TEST(SegmentImage, ExactDivisionAndSingleSegment) {
  const SegmentMask m = segment_image(Tensor::zeros({1, 8, 8}), 2);
  EXPECT_EQ(m.segment_count, 4u);
  EXPECT_EQ(m.segment_sizes(), (std::vector<std::size_t>{16, 16, 16, 16}));
  EXPECT_EQ(m.at(0, 4), 1u);
  EXPECT_EQ(m.at(4, 0), 2u);
  const SegmentMask one = segment_image(Tensor::zeros({3, 5, 7}), 1);
  EXPECT_EQ(one.segment_count, 1u);
  EXPECT_EQ(one.segment_sizes(), (std::vector<std::size_t>{35}));
}

TEST(SegmentImage, RemainderGoesToLastRowAndColumn) {
  const SegmentMask m = segment_image(Tensor::zeros({1, 5, 5}), 2);
  // Rows {0,1} and {2,3,4}; columns likewise.
  EXPECT_EQ(m.segment_sizes(), (std::vector<std::size_t>{4, 6, 6, 9}));
  EXPECT_EQ(m.at(1, 1), 0u);
  EXPECT_EQ(m.at(2, 1), 2u);
  EXPECT_EQ(m.at(4, 4), 3u);
}

TEST(SegmentImage, EverySegmentPresentOnRandomSizes) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t h = 1 + rng.below(30), w = 1 + rng.below(30);
    const std::size_t g = 1 + rng.below(std::min(h, w));
    const SegmentMask m = segment_image(Tensor::zeros({1, h, w}), g);
    EXPECT_EQ(m.labels.size(), h * w);
    for (std::size_t s : m.segment_sizes()) EXPECT_GT(s, 0u);
  }
}

TEST(SegmentImage, Errors) {
  EXPECT_THROW(segment_image(Tensor::zeros({1, 4, 4}), 0), ConfigError);
  EXPECT_THROW(segment_image(Tensor::zeros({1, 4, 4}), 5), ConfigError);
  EXPECT_THROW(segment_image(Tensor::zeros({4}), 1), ShapeError);
}

TEST(Perturb, AllOnIsIdentityAllOffIsBaseline) {
  Rng rng(2);
  const Tensor img = testing::random_tensor(rng, {3, 6, 6}, 0.0, 1.0);
  const SegmentMask m = segment_image(img, 3);
  EXPECT_EQ(perturb(img, m, std::vector<double>(9, 1.0), 0.4), img);
  EXPECT_EQ(perturb(img, m, std::vector<double>(9, 0.0), 0.4), Tensor::full({3, 6, 6}, 0.4));
  EXPECT_THROW(perturb(img, m, std::vector<double>(8, 1.0), 0.0), ShapeError);
}

TEST(SamplePerturbations, FirstRowIsTheInstanceAndSeedIsReproducible) {
  Rng rng(3);
  const Tensor img = testing::random_tensor(rng, {1, 8, 8}, 0.0, 1.0);
  const SegmentMask m = segment_image(img, 4);
  const PerturbationSet a = sample_perturbations(img, m, 40, 7, 0.0);
  const PerturbationSet b = sample_perturbations(img, m, 40, 7, 0.0);
  EXPECT_EQ(a.z, b.z);
  EXPECT_EQ(a.inputs.front(), img);
  for (std::size_t j = 0; j < 16; ++j) EXPECT_EQ(a.z[j], 1.0);
  ASSERT_EQ(a.inputs.size(), 40u);
  for (std::size_t r = 0; r < 40; ++r)
    EXPECT_EQ(a.inputs[r], perturb(img, m, a.z.data().subspan(r * 16, 16), 0.0));
  EXPECT_NE(sample_perturbations(img, m, 40, 8, 0.0).z, a.z);
  EXPECT_THROW(sample_perturbations(img, m, 17, 7, 0.0), ConfigError);
}

TEST(ProximityWeights, Examples) {
  const Tensor z = Tensor::matrix(3, 4, {1, 1, 1, 1, 0, 0, 0, 0, 1, 0, 1, 0});
  const auto w1 = proximity_weights(z, 1.0);
  EXPECT_EQ(w1[0], 1.0);
  EXPECT_NEAR(w1[1], std::exp(-1.0), 1e-15);
  EXPECT_NEAR(proximity_weights(z, 0.5)[2], std::exp(-1.0), 1e-15);
  EXPECT_THROW(proximity_weights(z, 0.0), ConfigError);
  EXPECT_THROW(proximity_weights(z, -1.0), ConfigError);
}

TEST(ProximityWeights, MoreSegmentsOnNeverWeighLess) {
  Rng rng(4);
  const Tensor z = random_binary(rng, 200, 9);
  const auto w = proximity_weights(z, 0.3);
  for (std::size_t a = 0; a < 200; ++a) {
    for (std::size_t b = 0; b < 200; ++b) {
      double on_a = 0, on_b = 0;
      for (std::size_t j = 0; j < 9; ++j) {
        on_a += z[a * 9 + j];
        on_b += z[b * 9 + j];
      }
      if (on_a > on_b) {
        EXPECT_GE(w[a], w[b]);
      }
    }
    EXPECT_GT(w[a], 0.0);
    EXPECT_LE(w[a], 1.0);
  }
}

TEST(FitLocalModel, RecoversALinearMap) {
  Rng rng(5);
  const Tensor z = random_binary(rng, 60, 2);
  std::vector<double> y(60);
  for (std::size_t r = 0; r < 60; ++r) y[r] = 0.1 + 0.5 * z[r * 2] - 0.2 * z[r * 2 + 1];
  const auto w = proximity_weights(z, 0.25);
  const LimeExplanation e = fit_local_model(z, y, w, 1e-8, 2);
  EXPECT_NEAR(e.coefficients[0], 0.5, 1e-3);
  EXPECT_NEAR(e.coefficients[1], -0.2, 1e-3);
  EXPECT_NEAR(e.intercept, 0.1, 1e-3);
  EXPECT_NEAR(e.r2, 1.0, 1e-9);

  const LimeExplanation top1 = fit_local_model(z, y, w, 1e-8, 1);
  EXPECT_EQ(top1.selected, (std::vector<std::size_t>{0}));
  EXPECT_EQ(top1.coefficients[1], 0.0);
}

TEST(FitLocalModel, MatchesWeightedRidgeOracle) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t s = 1 + rng.below(12), n = s + 2 + rng.below(60);
    const Tensor z = random_binary(rng, n, s);
    std::vector<double> y(n), w(n);
    std::vector<std::vector<double>> rows(n, std::vector<double>(s));
    for (std::size_t r = 0; r < n; ++r) {
      y[r] = rng.uniform();
      w[r] = rng.uniform(0.1, 1.0);
      for (std::size_t j = 0; j < s; ++j) rows[r][j] = z[r * s + j];
    }
    const double lambda = rng.bit() ? 1e-3 : 0.5;
    const LimeExplanation e = fit_local_model(z, y, w, lambda, s);
    const auto oracle = testing::weighted_ridge_oracle(rows, y, w, lambda);
    EXPECT_NEAR(e.intercept, oracle[0], 1e-8);
    for (std::size_t j = 0; j < s; ++j) EXPECT_NEAR(e.coefficients[j], oracle[j + 1], 1e-8);
  }
}

TEST(FitLocalModel, ConstantTargetsGiveZeroCoefficients) {
  Rng rng(7);
  const Tensor z = random_binary(rng, 30, 5);
  const std::vector<double> y(30, 0.37);
  const LimeExplanation e = fit_local_model(z, y, proximity_weights(z, 0.25), 1e-3, 5);
  EXPECT_NEAR(e.intercept, 0.37, 1e-9);
  for (double b : e.coefficients) EXPECT_NEAR(b, 0.0, 1e-9);
  EXPECT_EQ(e.r2, 1.0);
}

TEST(FitLocalModel, UnselectedCoefficientsAreExactlyZero) {
  Rng rng(8);
  const Tensor z = random_binary(rng, 50, 8);
  std::vector<double> y(50);
  for (auto& v : y) v = rng.uniform();
  for (std::size_t k = 1; k <= 8; ++k) {
    const LimeExplanation e = fit_local_model(z, y, std::vector<double>(50, 1.0), 1e-3, k);
    EXPECT_EQ(e.selected.size(), k);
    EXPECT_TRUE(std::is_sorted(e.selected.begin(), e.selected.end()));
    const std::set<std::size_t> sel(e.selected.begin(), e.selected.end());
    for (std::size_t j = 0; j < 8; ++j)
      if (!sel.count(j)) {
        EXPECT_EQ(e.coefficients[j], 0.0);
      }
  }
}

TEST(FitLocalModel, Errors) {
  const Tensor z = Tensor::matrix(3, 2, {1, 1, 0, 1, 1, 0});
  const std::vector<double> y{1, 2, 3}, w{1, 1, 1};
  EXPECT_THROW(fit_local_model(z, std::vector<double>{1, 2}, w, 1e-3, 1), ShapeError);
  EXPECT_THROW(fit_local_model(z, y, w, -1.0, 1), ConfigError);
  EXPECT_THROW(fit_local_model(z, y, w, 1e-3, 0), ConfigError);
  EXPECT_THROW(fit_local_model(z, y, w, 1e-3, 3), ConfigError);
  // All weight on one sample: only the intercept is pinned down.
  EXPECT_NO_THROW(fit_local_model(z, y, std::vector<double>{1, 0, 0}, 0.0, 2));
  EXPECT_THROW(fit_local_model(z, y, std::vector<double>{0, 0, 0}, 0.0, 2), NumericError);
}

TEST(ExplainLime, ConstantPredictorGivesZeroCoefficients) {
  const auto model = testing::binary_predictor({1, 14, 14}, [](const Tensor&) { return 0.8; });
  Rng rng(9);
  const Tensor img = testing::random_tensor(rng, {1, 14, 14}, 0.0, 1.0);
  LimeConfig cfg;
  cfg.samples = 200;
  const LimeExplanation e = explain_lime(*model, img, cfg);
  for (double b : e.coefficients) EXPECT_NEAR(b, 0.0, 1e-9);
  EXPECT_NEAR(e.intercept, 0.8, 1e-9);
}

TEST(ExplainLime, SingleSegmentPredictorIsFound) {
  // Probability = 0.2 + 0.6 * mean of segment 11 (grid 4 on 16x16).
  const std::size_t target = 11;
  const Tensor probe = Tensor::zeros({1, 16, 16});
  const SegmentMask mask = segment_image(probe, 4);
  const auto model = testing::binary_predictor({1, 16, 16}, [&](const Tensor& x) {
    return 0.2 + 0.6 * segment_means(x, mask)[target];
  });
  const Tensor img = Tensor::full({1, 16, 16}, 0.9);
  LimeConfig cfg;
  cfg.grid = 4;
  cfg.samples = 300;
  cfg.top_k = 3;
  const LimeExplanation e = explain_lime(*model, img, cfg);
  std::size_t best = 0;
  for (std::size_t j = 1; j < 16; ++j)
    if (std::abs(e.coefficients[j]) > std::abs(e.coefficients[best])) best = j;
  EXPECT_EQ(best, target);
  // 0.6 * 0.9, shrunk slightly by the default ridge penalty.
  EXPECT_NEAR(e.coefficients[target], 0.54, 1e-3);
}

TEST(ExplainLime, AffineMapMatchesOracleAndIsSeedStable) {
  const std::size_t grid = 3;
  Rng rng(10);
  std::vector<double> values(9), coef(9);
  for (auto& v : values) v = rng.uniform(0.2, 1.0);
  for (auto& c : coef) c = rng.uniform(-0.05, 0.05);
  const Tensor img = piecewise_image(12, grid, values);
  const SegmentMask mask = segment_image(img, grid);
  const auto model = testing::binary_predictor({1, 12, 12}, [&](const Tensor& x) {
    const auto means = segment_means(x, mask);
    double p = 0.5;
    for (std::size_t j = 0; j < 9; ++j) p += coef[j] * means[j];
    return p;
  });
  LimeConfig cfg;
  cfg.grid = grid;
  cfg.samples = 150;
  cfg.lambda = 1e-8;
  cfg.top_k = 9;
  const LimeExplanation a = explain_lime(*model, img, cfg);
  for (std::size_t j = 0; j < 9; ++j) EXPECT_NEAR(a.coefficients[j], coef[j] * values[j], 1e-6);
  cfg.seed = 99;
  const LimeExplanation b = explain_lime(*model, img, cfg);
  for (std::size_t j = 0; j < 9; ++j) EXPECT_NEAR(a.coefficients[j], b.coefficients[j], 1e-2);
  cfg.seed = 42;
  EXPECT_EQ(explain_lime(*model, img, cfg).coefficients, a.coefficients);
}

TEST(ExplainLime, JsonAndRendering) {
  const Tensor img = Tensor::full({1, 4, 4}, 0.8);
  const SegmentMask mask = segment_image(img, 2);
  LimeExplanation e;
  e.coefficients = {0.0, 0.3, 0.0, 0.0};
  e.selected = {1};
  const Tensor r = render_lime_mask(img, mask, e);
  EXPECT_EQ(r.shape(), (Shape{1, 4, 4}));
  EXPECT_EQ(r.at({0, 0, 3}), 0.8);
  EXPECT_LT(r.at({0, 0, 0}), 0.8);
  const auto j = lime_to_json(e);
  EXPECT_EQ(j["selected_segments"][0], 1);
  EXPECT_EQ(j["method"], "lime");
}

}  // namespace
}  // namespace medxai
