#ifndef MEDXAI_PREDICTOR_HPP
#define MEDXAI_PREDICTOR_HPP

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "medxai/bundle.hpp"
#include "medxai/tensor.hpp"

namespace medxai {

// Black-box classifier: input tensor in, class probabilities out. The
// returned vector has class_count() entries in [0,1] summing to 1.
// Implementations must be safe to call concurrently.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual const std::string& name() const = 0;
  virtual std::size_t class_count() const = 0;
  virtual const Shape& input_shape() const = 0;
  virtual std::vector<double> predict(const Tensor& input) const = 0;
};

std::size_t predict_label(const Predictor& predictor, const Tensor& input);

// A predictor with learnable parameters and an analytic loss gradient.
class TrainableModel : public Predictor {
 public:
  virtual std::unique_ptr<TrainableModel> clone() const = 0;

  // Parameter tensors in a fixed order shared with accumulate_gradient.
  virtual std::vector<Tensor*> parameters() = 0;
  virtual std::vector<NamedTensor> named_parameters() const = 0;

  // Adds d(loss)/d(parameter) for one sample into `gradients` (one tensor
  // per parameter, same shapes) and returns that sample's loss.
  virtual double accumulate_gradient(const Tensor& input, int label,
                                     std::span<Tensor> gradients) const = 0;

  std::vector<Tensor> zero_gradients();
};

}  // namespace medxai

#endif  // MEDXAI_PREDICTOR_HPP
