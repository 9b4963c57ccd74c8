#include "medxai/gradcam.hpp"

#include <algorithm>
#include <cmath>

#include "medxai/errors.hpp"

namespace medxai {

std::vector<double> gradcam_alphas(const Tensor& gradients) {
  if (gradients.rank() != 3) {
    throw ShapeError("Grad-CAM gradients must be [K,h,w], got " +
                     shape_to_string(gradients.shape()));
  }
  const std::size_t k = gradients.dim(0), plane = gradients.dim(1) * gradients.dim(2);
  std::vector<double> alphas(k);
  for (std::size_t c = 0; c < k; ++c) {
    double s = 0.0;
    for (std::size_t p = 0; p < plane; ++p) s += gradients[c * plane + p];
    alphas[c] = s / static_cast<double>(plane);
  }
  return alphas;
}

Tensor gradcam_heatmap(const Tensor& feature_maps, const std::vector<double>& alphas) {
  if (feature_maps.rank() != 3) {
    throw ShapeError("Grad-CAM feature maps must be [K,h,w], got " +
                     shape_to_string(feature_maps.shape()));
  }
  const std::size_t k = feature_maps.dim(0);
  if (alphas.size() != k) {
    throw ShapeError("Grad-CAM: " + std::to_string(alphas.size()) + " weights for " +
                     std::to_string(k) + " feature maps");
  }
  const std::size_t h = feature_maps.dim(1), w = feature_maps.dim(2), plane = h * w;
  Tensor raw({h, w});
  for (std::size_t p = 0; p < plane; ++p) {
    double s = 0.0;
    for (std::size_t c = 0; c < k; ++c) s += alphas[c] * feature_maps[c * plane + p];
    raw[p] = std::max(0.0, s);
  }
  return raw;
}

Tensor upsample_heatmap(const Tensor& raw, std::size_t height, std::size_t width) {
  if (raw.rank() != 2) {
    throw ShapeError("heatmap must be [h,w], got " + shape_to_string(raw.shape()));
  }
  const std::size_t h = raw.dim(0), w = raw.dim(1);
  if (height < h || width < w) {
    throw ConfigError("cannot upsample a " + std::to_string(h) + "x" + std::to_string(w) +
                      " heatmap to the smaller size " + std::to_string(height) + "x" +
                      std::to_string(width));
  }
  // Source coordinate of output index i along an axis of n -> m samples.
  auto source = [](std::size_t i, std::size_t n, std::size_t m, std::size_t& lo,
                   double& frac) {
    if (n == 1 || m == 1) {
      lo = 0;
      frac = 0.0;
      return;
    }
    const std::size_t num = i * (n - 1), den = m - 1;
    lo = std::min(num / den, n - 2);
    frac = static_cast<double>(num - lo * den) / static_cast<double>(den);
  };

  Tensor out({height, width});
  for (std::size_t y = 0; y < height; ++y) {
    std::size_t y0;
    double fy;
    source(y, h, height, y0, fy);
    const std::size_t y1 = h == 1 ? 0 : y0 + 1;
    for (std::size_t x = 0; x < width; ++x) {
      std::size_t x0;
      double fx;
      source(x, w, width, x0, fx);
      const std::size_t x1 = w == 1 ? 0 : x0 + 1;
      const double top = raw[y0 * w + x0] * (1.0 - fx) + raw[y0 * w + x1] * fx;
      const double bottom = raw[y1 * w + x0] * (1.0 - fx) + raw[y1 * w + x1] * fx;
      out[y * width + x] = top * (1.0 - fy) + bottom * fy;
    }
  }
  return out;
}

GradCamHeatmap explain_gradcam(const SmallCnn& model, const Tensor& image,
                               std::size_t class_index) {
  if (!model.has_conv_layers()) {
    throw ConfigError("model '" + model.name() + "' has no convolutional layer for Grad-CAM");
  }
  const auto acts = model.forward_with_activations(image);
  const Tensor grads = model.grad_wrt_feature_maps(image, class_index);
  GradCamHeatmap out;
  out.class_index = class_index;
  out.alphas = gradcam_alphas(grads);
  out.raw = gradcam_heatmap(acts.feature_maps.back(), out.alphas);
  const Shape& in = model.input_shape();
  out.upsampled = upsample_heatmap(out.raw, in[1], in[2]);
  return out;
}

nlohmann::json gradcam_to_json(const GradCamHeatmap& heatmap) {
  const auto values = heatmap.raw.data();
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return {{"method", "gradcam"},
          {"class_index", heatmap.class_index},
          {"alphas", heatmap.alphas},
          {"raw_shape", heatmap.raw.shape()},
          {"raw_min", *lo},
          {"raw_max", *hi},
          {"upsampled_shape", heatmap.upsampled.shape()}};
}

Tensor render_gradcam(const GradCamHeatmap& heatmap) {
  const Tensor& up = heatmap.upsampled;
  Tensor img({1, up.dim(0), up.dim(1)});
  const auto values = up.data();
  const double peak = *std::max_element(values.begin(), values.end());
  if (peak <= 0.0) return img;
  for (std::size_t i = 0; i < up.size(); ++i) img[i] = up[i] / peak;
  return img;
}

}  // namespace medxai
