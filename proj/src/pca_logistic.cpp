#include "medxai/pca_logistic.hpp"

#include "medxai/errors.hpp"

namespace medxai {

PcaLogisticModel::PcaLogisticModel(std::string name, Shape input_shape,
                                   PcaModel pca, LogisticModel logistic)
    : name_(std::move(name)),
      input_shape_(std::move(input_shape)),
      pca_(std::move(pca)),
      logistic_(std::move(logistic)) {
  if (pca_.dimension() != shape_size(input_shape_)) {
    throw ShapeError("PCA dimension " + std::to_string(pca_.dimension()) +
                     " does not match input " + shape_to_string(input_shape_));
  }
  if (logistic_.input_shape() != Shape{pca_.component_count()}) {
    throw ShapeError("logistic head expects " +
                     shape_to_string(logistic_.input_shape()) + " but PCA yields " +
                     std::to_string(pca_.component_count()) + " components");
  }
}

std::vector<double> PcaLogisticModel::predict(const Tensor& input) const {
  if (input.shape() != input_shape_) {
    throw ShapeError("model '" + name_ + "': expected input " +
                     shape_to_string(input_shape_) + ", got " +
                     shape_to_string(input.shape()));
  }
  const Tensor reduced = pca_transform(pca_, input.reshaped({1, input.size()}));
  return logistic_.predict(reduced.reshaped({pca_.component_count()}));
}

Dataset project_dataset(const PcaModel& pca, const Dataset& dataset) {
  Dataset projected;
  projected.class_names = dataset.class_names;
  if (dataset.empty()) return projected;
  const Tensor reduced = pca_transform(pca, flatten_images(dataset));
  const std::size_t k = pca.component_count();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    Sample s = dataset.samples[i];
    s.image = Tensor({k}, std::vector<double>(reduced.data().begin() + static_cast<std::ptrdiff_t>(i * k),
                                              reduced.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * k)));
    projected.samples.push_back(std::move(s));
  }
  return projected;
}

std::pair<PcaLogisticModel, TrainHistory> train_pca_logistic(
    std::string name, const Dataset& train, const Dataset& val,
    std::size_t components, const TrainConfig& config) {
  if (train.empty()) throw DataError("training set is empty");
  PcaModel pca = pca_fit(flatten_images(train), components);
  const Dataset train_proj = project_dataset(pca, train);
  const Dataset val_proj = project_dataset(pca, val);
  LogisticModel head(name + ".head", {components});
  auto [trained, history] = train_sgd(head, train_proj, val_proj, config);
  auto& logistic = dynamic_cast<LogisticModel&>(*trained);
  PcaLogisticModel model(std::move(name), train.image_shape(), std::move(pca),
                         std::move(logistic));
  return {std::move(model), std::move(history)};
}

}  // namespace medxai
