#ifndef MEDXAI_LOGISTIC_HPP
#define MEDXAI_LOGISTIC_HPP

#include <cstdint>
#include <string>

#include "medxai/predictor.hpp"

namespace medxai {

// Binary logistic regression on the flattened input:
// p(tumor) = sigmoid(w . x + b); probabilities are {1 - p, p}.
class LogisticModel final : public TrainableModel {
 public:
  LogisticModel(std::string name, Shape input_shape);
  LogisticModel(std::string name, Shape input_shape, Tensor weights, Tensor bias);

  const std::string& name() const override { return name_; }
  std::size_t class_count() const override { return 2; }
  const Shape& input_shape() const override { return input_shape_; }
  std::vector<double> predict(const Tensor& input) const override;

  std::unique_ptr<TrainableModel> clone() const override;
  std::vector<Tensor*> parameters() override { return {&weights_, &bias_}; }
  std::vector<NamedTensor> named_parameters() const override;
  double accumulate_gradient(const Tensor& input, int label,
                             std::span<Tensor> gradients) const override;

  const Tensor& weights() const { return weights_; }
  const Tensor& bias() const { return bias_; }

 private:
  double logit(const Tensor& input) const;

  std::string name_;
  Shape input_shape_;
  Tensor weights_;  // [d]
  Tensor bias_;     // [1]
};

}  // namespace medxai

#endif  // MEDXAI_LOGISTIC_HPP
