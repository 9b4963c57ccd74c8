#ifndef MEDXAI_GRADCAM_HPP
#define MEDXAI_GRADCAM_HPP

#include <cstddef>
#include <vector>

#include "json.hpp"
#include "medxai/small_cnn.hpp"
#include "medxai/tensor.hpp"

namespace medxai {

struct GradCamHeatmap {
  Tensor raw;        // [h', w'] at feature-map resolution, non-negative
  Tensor upsampled;  // [H, W] at input resolution
  std::size_t class_index = 0;
  std::vector<double> alphas;  // one weight per feature map
};

// Global average of each channel of a [K, h', w'] gradient tensor.
std::vector<double> gradcam_alphas(const Tensor& gradients);

// max(0, sum_k alphas[k] * feature_maps[k]) as [h', w'].
Tensor gradcam_heatmap(const Tensor& feature_maps, const std::vector<double>& alphas);

// Corner-aligned bilinear interpolation of a [h, w] map to [height, width].
// Only enlarging (or keeping) each dimension is allowed.
Tensor upsample_heatmap(const Tensor& raw, std::size_t height, std::size_t width);

// Heatmap for the last conv layer of `model`, upsampled to the input size.
GradCamHeatmap explain_gradcam(const SmallCnn& model, const Tensor& image,
                               std::size_t class_index);

// Sidecar metadata: alphas and the raw value range.
nlohmann::json gradcam_to_json(const GradCamHeatmap& heatmap);

// Upsampled map divided by its max as a [1,H,W] image; all-zero stays zero.
Tensor render_gradcam(const GradCamHeatmap& heatmap);

}  // namespace medxai

#endif  // MEDXAI_GRADCAM_HPP
