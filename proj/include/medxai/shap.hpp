#ifndef MEDXAI_SHAP_HPP
#define MEDXAI_SHAP_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "medxai/lime.hpp"
#include "medxai/predictor.hpp"
#include "medxai/tensor.hpp"

namespace medxai {

// Players are bits of a 64-bit mask; bit i set means feature i is present.
struct CoalitionGame {
  std::size_t feature_count = 0;
  std::function<double(std::uint64_t)> value;
};

enum class ShapMethod { kExact, kSampled };

struct ShapExplanation {
  std::vector<double> phi;
  double baseline_value = 0.0;  // v(empty set)
  double full_value = 0.0;      // v(all features)
  ShapMethod method = ShapMethod::kExact;
  std::vector<double> standard_error;  // per feature; sampled only
  std::size_t sample_count = 0;  // permutations (sampled) or subsets (exact)
  std::size_t evaluations = 0;   // distinct coalitions evaluated
  std::size_t class_index = 0;
};

inline constexpr std::size_t kExactShapMaxFeatures = 16;

ShapExplanation exact_shapley(const CoalitionGame& game);

// Permutation sampling. Games with more than 64 features cannot be encoded.
ShapExplanation sampled_shapley(const CoalitionGame& game, std::size_t permutations,
                                std::uint64_t seed);

enum class ShapMode { kAuto, kExact, kSampled };

struct ShapConfig {
  std::size_t class_index = 1;
  double baseline = 0.0;
  ShapMode mode = ShapMode::kAuto;  // auto: exact up to kExactShapMaxFeatures
  std::size_t budget = 200;         // permutations in sampled mode
  std::uint64_t seed = 42;
};

// v(S) = probability of class_index with segments outside S at baseline.
CoalitionGame make_image_game(const Predictor& predictor, const Tensor& image,
                              const SegmentMask& mask, std::size_t class_index,
                              double baseline);

ShapExplanation explain_shap(const Predictor& predictor, const Tensor& image,
                             const SegmentMask& mask, const ShapConfig& config);

ShapMode parse_shap_mode(const std::string& text);
nlohmann::json shap_to_json(const ShapExplanation& explanation);

// Positive and negative parts of phi painted onto the segments, both scaled
// by max |phi| into [0,1] as [1,H,W] images.
struct ShapHeatmaps {
  Tensor positive;
  Tensor negative;
  double scale = 0.0;  // max |phi|, the value drawn as full intensity
};
ShapHeatmaps render_shap(const ShapExplanation& explanation, const SegmentMask& mask);

}  // namespace medxai

#endif  // MEDXAI_SHAP_HPP
