#ifndef MEDXAI_LOSS_HPP
#define MEDXAI_LOSS_HPP

#include <span>

namespace medxai {

// Probabilities are clamped into [kLogClamp, 1 - kLogClamp] before the log.
inline constexpr double kLogClamp = 1e-12;

// -log(p) for label 1, -log(1 - p) for label 0.
double bce_per_class(double prediction, int label);

// Mean binary cross-entropy over n samples.
double bce_loss(std::span<const double> predictions, std::span<const int> labels);

double sigmoid(double z);

}  // namespace medxai

#endif  // MEDXAI_LOSS_HPP
