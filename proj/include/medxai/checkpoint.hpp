#ifndef MEDXAI_CHECKPOINT_HPP
#define MEDXAI_CHECKPOINT_HPP

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "medxai/predictor.hpp"

namespace medxai {

struct CheckpointMeta {
  std::string arch;
  std::uint64_t seed = 42;
  // "Feature off" pixel value for explanations (training-set mean intensity).
  double baseline = 0.0;
};

struct LoadedCheckpoint {
  std::shared_ptr<const Predictor> model;
  CheckpointMeta meta;
};

// Writes <stem>.json (manifest: kind, layer layout, shapes, seed,
// class count) and <stem>.tensors. Supports SmallCnn, LogisticModel and
// PcaLogisticModel.
void save_checkpoint(const Predictor& model, const std::filesystem::path& manifest,
                     const CheckpointMeta& meta);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& manifest);

}  // namespace medxai

#endif  // MEDXAI_CHECKPOINT_HPP
