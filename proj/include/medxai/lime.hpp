#ifndef MEDXAI_LIME_HPP
#define MEDXAI_LIME_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "medxai/predictor.hpp"
#include "medxai/tensor.hpp"

namespace medxai {

// Per-pixel segment ids in 0..segment_count-1, every id present.
struct SegmentMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t segment_count = 0;
  std::vector<std::size_t> labels;  // row-major [height, width]

  std::size_t at(std::size_t row, std::size_t col) const { return labels[row * width + col]; }
  std::vector<std::size_t> segment_sizes() const;
  Tensor to_tensor() const;
};

// grid x grid rectangles; the last row and column of segments absorb the
// remainder when the image size is not a multiple of the grid.
SegmentMask segment_image(const Tensor& image, std::size_t grid);

// Copy of `image` ([C,H,W] or [H,W]) where pixels of inactive segments are
// replaced by `baseline`. `active` has one 0/1 entry per segment.
Tensor perturb(const Tensor& image, const SegmentMask& mask,
               std::span<const double> active, double baseline);

struct PerturbationSet {
  Tensor z;                    // [n, S] of 0/1; row 0 is all ones
  std::vector<Tensor> inputs;  // perturbed images, one per row of z
};

PerturbationSet sample_perturbations(const Tensor& image, const SegmentMask& mask,
                                     std::size_t samples, std::uint64_t seed,
                                     double baseline);

// exp(-D^2 / sigma^2) with D the fraction of segments switched off.
std::vector<double> proximity_weights(const Tensor& z, double sigma);

struct LimeExplanation {
  std::vector<double> coefficients;  // one per segment; 0 when not selected
  double intercept = 0.0;
  std::vector<std::size_t> selected;  // ascending segment ids
  double r2 = 0.0;  // weighted goodness of the local fit
  std::size_t sample_count = 0;
  double kernel_width = 0.0;
  double lambda = 0.0;
  std::size_t class_index = 0;
};

// Smallest ridge penalty used; keeps the normal equations positive definite.
inline constexpr double kMinRidge = 1e-8;

// Weighted ridge fit of y ~ b0 + z.b (intercept unpenalized), then refit on
// the top_k segments by |b|.
LimeExplanation fit_local_model(const Tensor& z, std::span<const double> targets,
                                std::span<const double> weights, double lambda,
                                std::size_t top_k);

struct LimeConfig {
  std::size_t grid = 7;
  std::size_t samples = 1000;
  double sigma = 0.25;
  double lambda = 1e-3;
  std::size_t top_k = 10;
  std::size_t class_index = 1;
  double baseline = 0.0;
  std::uint64_t seed = 42;
};

LimeExplanation explain_lime(const Predictor& predictor, const Tensor& image,
                             const LimeConfig& config);

nlohmann::json lime_to_json(const LimeExplanation& explanation);

// Grayscale [1,H,W] rendering: selected segments keep their intensity,
// the rest are dimmed.
Tensor render_lime_mask(const Tensor& image, const SegmentMask& mask,
                        const LimeExplanation& explanation);

// Channel mean of [C,H,W] (or a copy of [H,W]) as [1,H,W].
Tensor to_grayscale(const Tensor& image);

}  // namespace medxai

#endif  // MEDXAI_LIME_HPP
