#include "medxai/training.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "medxai/errors.hpp"
#include "medxai/loss.hpp"
#include "medxai/random.hpp"

namespace medxai {

EvalStats evaluate(const Predictor& predictor, const Dataset& dataset) {
  if (dataset.empty()) throw DataError("cannot evaluate on an empty dataset");
  std::vector<double> positive;
  std::vector<int> labels;
  std::size_t correct = 0;
  for (const Sample& s : dataset.samples) {
    const auto probs = predictor.predict(s.image);
    positive.push_back(probs.at(1));
    labels.push_back(s.label);
    if (static_cast<int>(argmax(probs)) == s.label) ++correct;
  }
  return {bce_loss(positive, labels),
          static_cast<double>(correct) / static_cast<double>(dataset.size())};
}

std::pair<std::unique_ptr<TrainableModel>, TrainHistory> train_sgd(
    const TrainableModel& model, const Dataset& train, const Dataset& val,
    const TrainConfig& config) {
  if (train.empty()) throw DataError("training set is empty");
  if (val.empty()) throw DataError("validation set is empty");
  if (config.batch_size == 0) throw ConfigError("batch size must be positive");
  train.validate();
  val.validate();

  std::unique_ptr<TrainableModel> trained = model.clone();
  std::vector<Tensor*> params = trained->parameters();
  Rng rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  TrainHistory history;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto diverged = [&] {
      return NumericError("training of '" + model.name() + "' diverged at epoch " +
                          std::to_string(epoch + 1));
    };
    rng.shuffle(std::span<std::size_t>(order));
    EvalStats tr, va;
    try {
      for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const std::size_t end = std::min(order.size(), start + config.batch_size);
        std::vector<Tensor> grads = trained->zero_gradients();
        for (std::size_t b = start; b < end; ++b) {
          const Sample& s = train.samples[order[b]];
          trained->accumulate_gradient(s.image, s.label, grads);
        }
        const double step = config.learning_rate / static_cast<double>(end - start);
        for (std::size_t p = 0; p < params.size(); ++p) {
          auto values = params[p]->mutable_data();
          const auto g = grads[p].data();
          for (std::size_t i = 0; i < values.size(); ++i) values[i] -= step * g[i];
        }
      }
      for (const Tensor* p : params)
        if (!p->all_finite()) throw diverged();
      tr = evaluate(*trained, train);
      va = evaluate(*trained, val);
    } catch (const NumericError&) {
      throw diverged();
    }
    if (!std::isfinite(tr.loss) || !std::isfinite(va.loss)) throw diverged();
    history.epochs.push_back({tr.loss, tr.accuracy, va.loss, va.accuracy});
  }
  return {std::move(trained), std::move(history)};
}

std::string history_to_csv(const TrainHistory& history) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,train_loss,train_accuracy,val_loss,val_accuracy\n";
  for (std::size_t i = 0; i < history.epochs.size(); ++i) {
    const EpochStats& e = history.epochs[i];
    out << i + 1 << ',' << e.train_loss << ',' << e.train_accuracy << ','
        << e.val_loss << ',' << e.val_accuracy << '\n';
  }
  return out.str();
}

nlohmann::json history_to_json(const TrainHistory& history) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < history.epochs.size(); ++i) {
    const EpochStats& e = history.epochs[i];
    rows.push_back({{"epoch", i + 1},
                    {"train_loss", e.train_loss},
                    {"train_accuracy", e.train_accuracy},
                    {"val_loss", e.val_loss},
                    {"val_accuracy", e.val_accuracy}});
  }
  return {{"epochs", rows}};
}

}  // namespace medxai
