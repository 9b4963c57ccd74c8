#include "medxai/shap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "medxai/errors.hpp"
#include "medxai/random.hpp"

namespace medxai {

namespace {

// Neumaier's compensated sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) carry += (sum - t) + x;
    else carry += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

void check_game(const CoalitionGame& game) {
  if (game.feature_count == 0) throw ConfigError("coalition game has no features");
  if (!game.value) throw ConfigError("coalition game has no value function");
}

double checked_value(const CoalitionGame& game, std::uint64_t mask) {
  const double v = game.value(mask);
  if (!std::isfinite(v)) throw NumericError("coalition value is not finite");
  return v;
}

}  // namespace

ShapExplanation exact_shapley(const CoalitionGame& game) {
  check_game(game);
  const std::size_t n = game.feature_count;
  if (n > kExactShapMaxFeatures) {
    throw ConfigError("exact Shapley values are limited to " +
                      std::to_string(kExactShapMaxFeatures) + " features (got " +
                      std::to_string(n) + "); use sampled_shapley instead");
  }
  const std::uint64_t subsets = std::uint64_t{1} << n;
  std::vector<double> v(subsets);
  for (std::uint64_t s = 0; s < subsets; ++s) v[s] = checked_value(game, s);

  // |S|! (n-|S|-1)! / n! for each coalition size, through log-factorials.
  std::vector<double> weight(n);
  const double log_n_fact = std::lgamma(static_cast<double>(n) + 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    weight[k] = std::exp(std::lgamma(static_cast<double>(k) + 1.0) +
                         std::lgamma(static_cast<double>(n - k)) - log_n_fact);
  }

  ShapExplanation out;
  out.phi.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    CompensatedSum acc;
    for (std::uint64_t s = 0; s < subsets; ++s) {
      if (s & bit) continue;
      const double marginal = v[s | bit] - v[s];
      if (marginal != 0.0) acc.add(weight[std::popcount(s)] * marginal);
    }
    out.phi[i] = acc.value();
  }
  out.baseline_value = v[0];
  out.full_value = v[subsets - 1];
  out.method = ShapMethod::kExact;
  out.sample_count = subsets;
  out.evaluations = subsets;
  return out;
}

ShapExplanation sampled_shapley(const CoalitionGame& game, std::size_t permutations,
                                std::uint64_t seed) {
  check_game(game);
  const std::size_t n = game.feature_count;
  if (n > 64) throw ConfigError("sampled Shapley supports at most 64 features");
  if (permutations < 1) throw ConfigError("need at least one permutation");

  std::unordered_map<std::uint64_t, double> memo;
  auto value = [&](std::uint64_t mask) {
    auto it = memo.find(mask);
    if (it != memo.end()) return it->second;
    const double v = checked_value(game, mask);
    memo.emplace(mask, v);
    return v;
  };

  const std::uint64_t full = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  ShapExplanation out;
  out.baseline_value = value(0);
  out.full_value = value(full);

  // Welford running mean and squared deviations per feature.
  std::vector<double> mean(n, 0.0), m2(n, 0.0);
  std::vector<std::size_t> order(n);
  Rng rng(seed);
  for (std::size_t p = 0; p < permutations; ++p) {
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));
    std::uint64_t mask = 0;
    double prev = out.baseline_value;
    for (std::size_t i : order) {
      mask |= std::uint64_t{1} << i;
      const double cur = value(mask);
      const double marginal = cur - prev;
      prev = cur;
      const double delta = marginal - mean[i];
      mean[i] += delta / static_cast<double>(p + 1);
      m2[i] += delta * (marginal - mean[i]);
    }
  }

  out.phi = mean;
  out.standard_error.assign(n, 0.0);
  if (permutations > 1) {
    const double m = static_cast<double>(permutations);
    for (std::size_t i = 0; i < n; ++i) out.standard_error[i] = std::sqrt(m2[i] / (m - 1.0) / m);
  }
  out.method = ShapMethod::kSampled;
  out.sample_count = permutations;
  out.evaluations = memo.size();
  return out;
}

CoalitionGame make_image_game(const Predictor& predictor, const Tensor& image,
                              const SegmentMask& mask, std::size_t class_index,
                              double baseline) {
  if (class_index >= predictor.class_count()) {
    throw ConfigError("class index " + std::to_string(class_index) +
                      " out of range for " + std::to_string(predictor.class_count()) +
                      " classes");
  }
  if (mask.segment_count > 64) {
    throw ConfigError("at most 64 segments can be used as Shapley features");
  }
  CoalitionGame game;
  game.feature_count = mask.segment_count;
  game.value = [&predictor, &image, &mask, class_index, baseline](std::uint64_t s) {
    std::vector<double> active(mask.segment_count);
    for (std::size_t j = 0; j < active.size(); ++j) active[j] = (s >> j) & 1U ? 1.0 : 0.0;
    return predictor.predict(perturb(image, mask, active, baseline)).at(class_index);
  };
  return game;
}

ShapExplanation explain_shap(const Predictor& predictor, const Tensor& image,
                             const SegmentMask& mask, const ShapConfig& config) {
  const CoalitionGame game =
      make_image_game(predictor, image, mask, config.class_index, config.baseline);
  bool exact = config.mode == ShapMode::kExact;
  if (config.mode == ShapMode::kAuto) exact = mask.segment_count <= kExactShapMaxFeatures;
  ShapExplanation out =
      exact ? exact_shapley(game) : sampled_shapley(game, config.budget, config.seed);
  out.class_index = config.class_index;
  return out;
}

ShapMode parse_shap_mode(const std::string& text) {
  if (text == "auto") return ShapMode::kAuto;
  if (text == "exact") return ShapMode::kExact;
  if (text == "sampled") return ShapMode::kSampled;
  throw ConfigError("unknown Shapley mode '" + text + "' (expected auto, exact or sampled)");
}

nlohmann::json shap_to_json(const ShapExplanation& e) {
  double scale = 0.0;
  for (double p : e.phi) scale = std::max(scale, std::abs(p));
  nlohmann::json j = {{"method", "shap"},
                      {"estimator", e.method == ShapMethod::kExact ? "exact" : "sampled"},
                      {"class_index", e.class_index},
                      {"phi", e.phi},
                      {"baseline_value", e.baseline_value},
                      {"full_value", e.full_value},
                      {"sample_count", e.sample_count},
                      {"evaluations", e.evaluations}};
  if (e.method == ShapMethod::kSampled) j["stderr"] = e.standard_error;
  j["legend"] = {{"positive_image_255", scale},
                 {"negative_image_255", -scale},
                 {"zero", 0.0},
                 {"note", "pixel value p maps to phi = +/- scale * p / 255"}};
  return j;
}

ShapHeatmaps render_shap(const ShapExplanation& e, const SegmentMask& mask) {
  if (e.phi.size() != mask.segment_count) {
    throw ShapeError("explanation has " + std::to_string(e.phi.size()) +
                     " attributions for " + std::to_string(mask.segment_count) +
                     " segments");
  }
  ShapHeatmaps out{Tensor({1, mask.height, mask.width}),
                   Tensor({1, mask.height, mask.width}), 0.0};
  for (double p : e.phi) out.scale = std::max(out.scale, std::abs(p));
  if (out.scale == 0.0) return out;
  for (std::size_t p = 0; p < mask.labels.size(); ++p) {
    const double v = e.phi[mask.labels[p]] / out.scale;
    if (v > 0) out.positive[p] = v;
    else out.negative[p] = -v;
  }
  return out;
}

}  // namespace medxai
