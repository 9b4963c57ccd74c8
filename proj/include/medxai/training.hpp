#ifndef MEDXAI_TRAINING_HPP
#define MEDXAI_TRAINING_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "medxai/dataset.hpp"
#include "medxai/predictor.hpp"

namespace medxai {

struct TrainConfig {
  std::size_t epochs = 20;
  double learning_rate = 0.05;
  std::size_t batch_size = 16;
  std::uint64_t seed = 42;
};

struct EpochStats {
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;

  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
};

struct EvalStats {
  double loss = 0.0;  // mean binary cross-entropy
  double accuracy = 0.0;
};

// Loss and accuracy of `predictor` over a labelled dataset.
EvalStats evaluate(const Predictor& predictor, const Dataset& dataset);

// Mini-batch SGD on a private copy of `model`. Batch order is shuffled from
// config.seed; epoch statistics are measured on the full sets after each
// epoch. Throws NumericError (naming the epoch) if the loss diverges.
std::pair<std::unique_ptr<TrainableModel>, TrainHistory> train_sgd(
    const TrainableModel& model, const Dataset& train, const Dataset& val,
    const TrainConfig& config);

std::string history_to_csv(const TrainHistory& history);
nlohmann::json history_to_json(const TrainHistory& history);

}  // namespace medxai

#endif  // MEDXAI_TRAINING_HPP
