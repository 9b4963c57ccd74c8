#include "medxai/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "medxai/errors.hpp"

namespace medxai {

double bce_per_class(double prediction, int label) {
  if (label != 0 && label != 1) {
    throw ConfigError("binary cross-entropy label must be 0 or 1, got " +
                      std::to_string(label));
  }
  if (std::isnan(prediction)) throw NumericError("prediction is NaN");
  const double p = std::clamp(prediction, kLogClamp, 1.0 - kLogClamp);
  return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

double bce_loss(std::span<const double> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw ShapeError("bce_loss: " + std::to_string(predictions.size()) +
                     " predictions vs " + std::to_string(labels.size()) +
                     " labels");
  }
  if (predictions.empty()) throw ShapeError("bce_loss of zero samples");
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    total += bce_per_class(predictions[i], labels[i]);
  return total / static_cast<double>(predictions.size());
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace medxai
