#include "medxai/logistic.hpp"

#include "medxai/errors.hpp"
#include "medxai/loss.hpp"

namespace medxai {

std::size_t predict_label(const Predictor& predictor, const Tensor& input) {
  return argmax(predictor.predict(input));
}

std::vector<Tensor> TrainableModel::zero_gradients() {
  std::vector<Tensor> grads;
  for (const Tensor* p : parameters()) grads.emplace_back(p->shape());
  return grads;
}

LogisticModel::LogisticModel(std::string name, Shape input_shape)
    : LogisticModel(std::move(name), input_shape,
                    Tensor({shape_size(input_shape)}), Tensor({1})) {}

LogisticModel::LogisticModel(std::string name, Shape input_shape, Tensor weights,
                             Tensor bias)
    : name_(std::move(name)),
      input_shape_(std::move(input_shape)),
      weights_(std::move(weights)),
      bias_(std::move(bias)) {
  if (weights_.shape() != Shape{shape_size(input_shape_)} ||
      bias_.shape() != Shape{1}) {
    throw ShapeError("logistic model '" + name_ + "': weights " +
                     shape_to_string(weights_.shape()) + " and bias " +
                     shape_to_string(bias_.shape()) + " do not fit input " +
                     shape_to_string(input_shape_));
  }
}

double LogisticModel::logit(const Tensor& input) const {
  if (input.shape() != input_shape_) {
    throw ShapeError("logistic model '" + name_ + "': expected input " +
                     shape_to_string(input_shape_) + ", got " +
                     shape_to_string(input.shape()));
  }
  double z = bias_[0];
  for (std::size_t i = 0; i < weights_.size(); ++i) z += weights_[i] * input[i];
  return z;
}

std::vector<double> LogisticModel::predict(const Tensor& input) const {
  const double p = sigmoid(logit(input));
  return {1.0 - p, p};
}

std::unique_ptr<TrainableModel> LogisticModel::clone() const {
  return std::make_unique<LogisticModel>(*this);
}

std::vector<NamedTensor> LogisticModel::named_parameters() const {
  return {{"logistic.weight", weights_}, {"logistic.bias", bias_}};
}

double LogisticModel::accumulate_gradient(const Tensor& input, int label,
                                          std::span<Tensor> gradients) const {
  const double p = sigmoid(logit(input));
  const double dz = p - static_cast<double>(label);
  auto dw = gradients[0].mutable_data();
  for (std::size_t i = 0; i < dw.size(); ++i) dw[i] += dz * input[i];
  gradients[1][0] += dz;
  return bce_per_class(p, label);
}

}  // namespace medxai
