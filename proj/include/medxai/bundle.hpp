#ifndef MEDXAI_BUNDLE_HPP
#define MEDXAI_BUNDLE_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "medxai/tensor.hpp"

namespace medxai {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// A JSON manifest plus a sibling ".tensors" file of concatenated TENSOR v1
// blocks. The manifest lists every block's name and shape in file order.
struct TensorBundle {
  nlohmann::json manifest;
  std::vector<NamedTensor> tensors;

  const Tensor& get(const std::string& name) const;
};

// Writes `manifest_path` and `manifest_path` with its extension replaced by
// ".tensors". Adds "tensor_file" and "tensors" keys to the manifest.
void write_bundle(const std::filesystem::path& manifest_path,
                  const TensorBundle& bundle);
TensorBundle read_bundle(const std::filesystem::path& manifest_path);

}  // namespace medxai

#endif  // MEDXAI_BUNDLE_HPP
