#ifndef MEDXAI_ENSEMBLE_HPP
#define MEDXAI_ENSEMBLE_HPP

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "medxai/predictor.hpp"

namespace medxai {

struct WeightedConfig {
  // Empty means uniform weights.
  std::vector<double> weights;

  static WeightedConfig uniform() { return {}; }
};

struct VoteOutcome {
  std::size_t label = 0;
  std::vector<double> tallies;  // indexed by class
  bool tie_broken = false;      // several classes shared the top tally
};

// Mode of `labels`; ties go to the lowest class index.
std::size_t majority_vote(std::span<const std::size_t> labels);

// argmax_i sum_j w_j [labels[j] == i], ties to the lowest index. With
// `class_count` == 0 the tally vector is sized to the largest label + 1.
VoteOutcome weighted_vote(std::span<const std::size_t> labels,
                          const WeightedConfig& config, std::size_t class_count = 0);

struct ModelVote {
  std::string model;
  std::size_t label = 0;
  std::vector<double> probabilities;
};

struct VoteRecord {
  std::string input_id;
  std::vector<ModelVote> votes;
  std::vector<double> tallies;
  std::size_t final_label = 0;
  bool tie_broken = false;
};

using PredictorList = std::vector<std::shared_ptr<const Predictor>>;

// Each model votes with the argmax of its probabilities; the final label is
// the weighted vote. Inference failures are rethrown naming the model.
VoteRecord ensemble_predict(const PredictorList& models, const Tensor& input,
                            const WeightedConfig& config, std::string input_id = "");

nlohmann::json vote_record_to_json(const VoteRecord& record);

// The voting ensemble as a Predictor: probabilities are the normalized
// weighted tallies (vote shares).
class EnsemblePredictor final : public Predictor {
 public:
  EnsemblePredictor(std::string name, PredictorList models, WeightedConfig config);

  const std::string& name() const override { return name_; }
  std::size_t class_count() const override;
  const Shape& input_shape() const override;
  std::vector<double> predict(const Tensor& input) const override;

  VoteRecord vote(const Tensor& input, std::string input_id = "") const;
  const PredictorList& models() const { return models_; }

 private:
  std::string name_;
  PredictorList models_;
  WeightedConfig config_;
};

}  // namespace medxai

#endif  // MEDXAI_ENSEMBLE_HPP
