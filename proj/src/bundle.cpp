#include "medxai/bundle.hpp"

#include <fstream>

#include "medxai/errors.hpp"

namespace medxai {

const Tensor& TensorBundle::get(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t.tensor;
  throw DataError("bundle has no tensor named '" + name + "'");
}

void write_bundle(const std::filesystem::path& manifest_path,
                  const TensorBundle& bundle) {
  std::filesystem::path tensor_path = manifest_path;
  tensor_path.replace_extension(".tensors");

  nlohmann::json manifest = bundle.manifest;
  manifest["tensor_file"] = tensor_path.filename().string();
  manifest["tensors"] = nlohmann::json::array();
  for (const auto& t : bundle.tensors) {
    manifest["tensors"].push_back({{"name", t.name}, {"shape", t.tensor.shape()}});
  }

  std::ofstream blocks(tensor_path, std::ios::binary);
  if (!blocks) throw DataError("cannot open " + tensor_path.string());
  for (const auto& t : bundle.tensors) write_tensor(blocks, t.tensor);

  std::ofstream json_out(manifest_path);
  if (!json_out) throw DataError("cannot open " + manifest_path.string());
  json_out << manifest.dump(2) << '\n';
}

TensorBundle read_bundle(const std::filesystem::path& manifest_path) {
  std::ifstream json_in(manifest_path);
  if (!json_in) throw DataError("cannot open " + manifest_path.string());
  TensorBundle bundle;
  try {
    bundle.manifest = nlohmann::json::parse(json_in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed manifest " + manifest_path.string() + ": " +
                    e.what());
  }
  if (!bundle.manifest.contains("tensor_file") ||
      !bundle.manifest.contains("tensors")) {
    throw DataError("manifest " + manifest_path.string() +
                    " lacks tensor_file/tensors entries");
  }
  const auto tensor_path = manifest_path.parent_path() /
                           bundle.manifest["tensor_file"].get<std::string>();
  std::ifstream blocks(tensor_path, std::ios::binary);
  if (!blocks) throw DataError("cannot open " + tensor_path.string());
  for (const auto& entry : bundle.manifest["tensors"]) {
    Tensor t = read_tensor(blocks);
    const auto name = entry.at("name").get<std::string>();
    if (t.shape() != entry.at("shape").get<Shape>()) {
      throw DataError("tensor '" + name + "' in " + tensor_path.string() +
                      " has shape " + shape_to_string(t.shape()) +
                      ", manifest says " + entry.at("shape").dump());
    }
    bundle.tensors.push_back({name, std::move(t)});
  }
  return bundle;
}

}  // namespace medxai
