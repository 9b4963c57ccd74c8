#include "medxai/ensemble.hpp"

#include <algorithm>
#include <numeric>

#include "medxai/errors.hpp"

namespace medxai {

namespace {

// Tallies closer than this fraction of the total weight count as tied, which
// keeps the tie-break invariant under rescaling of the weights.
constexpr double kRelativeTieTolerance = 1e-12;

template <typename E>
[[noreturn]] void rethrow_with_model(const E& e, const std::string& model) {
  throw E("model '" + model + "': " + e.what());
}

}  // namespace

std::size_t majority_vote(std::span<const std::size_t> labels) {
  if (labels.empty()) throw ConfigError("majority vote over zero labels");
  return weighted_vote(labels, WeightedConfig::uniform()).label;
}

VoteOutcome weighted_vote(std::span<const std::size_t> labels,
                          const WeightedConfig& config, std::size_t class_count) {
  if (labels.empty()) throw ConfigError("weighted vote over zero labels");
  const bool uniform = config.weights.empty();
  if (!uniform && config.weights.size() != labels.size()) {
    throw ConfigError("weighted vote: " + std::to_string(labels.size()) +
                      " labels but " + std::to_string(config.weights.size()) +
                      " weights");
  }
  double total = 0.0;
  if (!uniform) {
    for (double w : config.weights) {
      if (!(w >= 0.0)) throw ConfigError("ensemble weights must be non-negative");
      total += w;
    }
    if (total <= 0.0) throw ConfigError("at least one ensemble weight must be positive");
  } else {
    total = static_cast<double>(labels.size());
  }

  const std::size_t max_label = *std::max_element(labels.begin(), labels.end());
  if (class_count == 0) {
    class_count = max_label + 1;
  } else if (max_label >= class_count) {
    throw ConfigError("vote label " + std::to_string(max_label) +
                      " out of range for " + std::to_string(class_count) +
                      " classes");
  }

  VoteOutcome outcome;
  outcome.tallies.assign(class_count, 0.0);
  for (std::size_t j = 0; j < labels.size(); ++j)
    outcome.tallies[labels[j]] += uniform ? 1.0 : config.weights[j];

  const double best = *std::max_element(outcome.tallies.begin(), outcome.tallies.end());
  const double tolerance = kRelativeTieTolerance * total;
  std::size_t tied = 0;
  for (std::size_t c = 0; c < class_count; ++c) {
    if (best - outcome.tallies[c] <= tolerance) {
      if (tied == 0) outcome.label = c;
      ++tied;
    }
  }
  outcome.tie_broken = tied > 1;
  return outcome;
}

VoteRecord ensemble_predict(const PredictorList& models, const Tensor& input,
                            const WeightedConfig& config, std::string input_id) {
  if (models.empty()) throw ConfigError("ensemble needs at least one model");
  const std::size_t classes = models.front()->class_count();
  for (const auto& m : models) {
    if (m->class_count() != classes) {
      throw ConfigError("ensemble models disagree on class count: '" +
                        models.front()->name() + "' has " + std::to_string(classes) +
                        ", '" + m->name() + "' has " +
                        std::to_string(m->class_count()));
    }
  }
  if (!config.weights.empty() && config.weights.size() != models.size()) {
    throw ConfigError("ensemble has " + std::to_string(models.size()) +
                      " models but " + std::to_string(config.weights.size()) +
                      " weights");
  }

  VoteRecord record;
  record.input_id = std::move(input_id);
  std::vector<std::size_t> labels;
  for (const auto& m : models) {
    ModelVote vote;
    vote.model = m->name();
    try {
      vote.probabilities = m->predict(input);
    } catch (const ShapeError& e) {
      rethrow_with_model(e, m->name());
    } catch (const DataError& e) {
      rethrow_with_model(e, m->name());
    } catch (const NumericError& e) {
      rethrow_with_model(e, m->name());
    } catch (const ConfigError& e) {
      rethrow_with_model(e, m->name());
    }
    vote.label = argmax(vote.probabilities);
    labels.push_back(vote.label);
    record.votes.push_back(std::move(vote));
  }
  VoteOutcome outcome = weighted_vote(labels, config, classes);
  record.tallies = std::move(outcome.tallies);
  record.final_label = outcome.label;
  record.tie_broken = outcome.tie_broken;
  return record;
}

nlohmann::json vote_record_to_json(const VoteRecord& record) {
  nlohmann::json votes = nlohmann::json::array();
  for (const auto& v : record.votes) {
    votes.push_back({{"model", v.model}, {"label", v.label}, {"probs", v.probabilities}});
  }
  nlohmann::json tallies = nlohmann::json::object();
  for (std::size_t c = 0; c < record.tallies.size(); ++c)
    tallies[std::to_string(c)] = record.tallies[c];
  return {{"input_id", record.input_id},
          {"votes", votes},
          {"tallies", tallies},
          {"final", record.final_label},
          {"tie_broken", record.tie_broken}};
}

EnsemblePredictor::EnsemblePredictor(std::string name, PredictorList models,
                                     WeightedConfig config)
    : name_(std::move(name)), models_(std::move(models)), config_(std::move(config)) {
  if (models_.empty()) throw ConfigError("ensemble needs at least one model");
  for (const auto& m : models_) {
    if (m->class_count() != models_.front()->class_count()) {
      throw ConfigError("ensemble models disagree on class count");
    }
  }
  if (!config_.weights.empty() && config_.weights.size() != models_.size()) {
    throw ConfigError("ensemble has " + std::to_string(models_.size()) +
                      " models but " + std::to_string(config_.weights.size()) +
                      " weights");
  }
}

std::size_t EnsemblePredictor::class_count() const {
  return models_.front()->class_count();
}

const Shape& EnsemblePredictor::input_shape() const {
  return models_.front()->input_shape();
}

VoteRecord EnsemblePredictor::vote(const Tensor& input, std::string input_id) const {
  return ensemble_predict(models_, input, config_, std::move(input_id));
}

std::vector<double> EnsemblePredictor::predict(const Tensor& input) const {
  std::vector<double> shares = vote(input).tallies;
  const double total = std::accumulate(shares.begin(), shares.end(), 0.0);
  for (double& s : shares) s /= total;
  return shares;
}

}  // namespace medxai
