#ifndef MEDXAI_PCA_LOGISTIC_HPP
#define MEDXAI_PCA_LOGISTIC_HPP

#include <string>
#include <utility>

#include "medxai/logistic.hpp"
#include "medxai/pca.hpp"
#include "medxai/training.hpp"

namespace medxai {

// Flatten -> PCA projection -> logistic regression on the projected
// coordinates. The PCA step is this model's own preprocessing.
class PcaLogisticModel final : public Predictor {
 public:
  PcaLogisticModel(std::string name, Shape input_shape, PcaModel pca,
                   LogisticModel logistic);

  const std::string& name() const override { return name_; }
  std::size_t class_count() const override { return 2; }
  const Shape& input_shape() const override { return input_shape_; }
  std::vector<double> predict(const Tensor& input) const override;

  const PcaModel& pca() const { return pca_; }
  const LogisticModel& logistic() const { return logistic_; }

 private:
  std::string name_;
  Shape input_shape_;
  PcaModel pca_;
  LogisticModel logistic_;
};

// Projects every image of `dataset` onto `pca`; samples become [k] tensors.
Dataset project_dataset(const PcaModel& pca, const Dataset& dataset);

// Fits PCA on the training split only, then trains the logistic head on the
// projected data.
std::pair<PcaLogisticModel, TrainHistory> train_pca_logistic(
    std::string name, const Dataset& train, const Dataset& val,
    std::size_t components, const TrainConfig& config);

}  // namespace medxai

#endif  // MEDXAI_PCA_LOGISTIC_HPP
