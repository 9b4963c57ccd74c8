#include "medxai/checkpoint.hpp"

#include "medxai/errors.hpp"
#include "medxai/logistic.hpp"
#include "medxai/pca_logistic.hpp"
#include "medxai/small_cnn.hpp"

namespace medxai {

namespace {

constexpr const char* kFormat = "medxai-checkpoint";
constexpr int kVersion = 1;

nlohmann::json cnn_layers(const SmallCnn& cnn) {
  nlohmann::json layers = nlohmann::json::array();
  for (const ConvLayer& c : cnn.conv_layers()) {
    const Shape& k = c.kernel.shape();
    layers.push_back({{"kind", "conv"},
                      {"in", k[1]},
                      {"out", k[0]},
                      {"kernel", {k[2], k[3]}},
                      {"activation", "relu"},
                      {"pool", c.pool}});
  }
  const auto& dense = cnn.dense_layers();
  for (std::size_t l = 0; l < dense.size(); ++l) {
    const Shape& w = dense[l].weight.shape();
    const char* activation = l + 1 < dense.size() ? "relu"
                             : w[0] == 1          ? "sigmoid"
                                                  : "softmax";
    layers.push_back({{"kind", "dense"}, {"in", w[1]}, {"out", w[0]},
                      {"activation", activation}});
  }
  return layers;
}

SmallCnn cnn_from_bundle(const TensorBundle& bundle, const std::string& name,
                         const Shape& input_shape) {
  std::vector<ConvLayer> conv;
  std::vector<DenseLayer> dense;
  std::size_t conv_index = 0, dense_index = 0;
  for (const auto& layer : bundle.manifest.at("layers")) {
    const auto kind = layer.at("kind").get<std::string>();
    if (kind == "conv") {
      const std::string p = "conv" + std::to_string(conv_index++);
      conv.push_back({bundle.get(p + ".kernel"), bundle.get(p + ".bias"),
                      layer.at("pool").get<bool>()});
    } else if (kind == "dense") {
      const std::string p = "dense" + std::to_string(dense_index++);
      dense.push_back({bundle.get(p + ".weight"), bundle.get(p + ".bias")});
    } else {
      throw DataError("unknown layer kind '" + kind + "' in checkpoint");
    }
  }
  return SmallCnn(name, input_shape, std::move(conv), std::move(dense));
}

}  // namespace

void save_checkpoint(const Predictor& model, const std::filesystem::path& manifest,
                     const CheckpointMeta& meta) {
  TensorBundle bundle;
  bundle.manifest = {{"format", kFormat},
                     {"version", kVersion},
                     {"name", model.name()},
                     {"arch", meta.arch},
                     {"class_count", model.class_count()},
                     {"input_shape", model.input_shape()},
                     {"seed", meta.seed},
                     {"baseline", meta.baseline}};
  if (const auto* cnn = dynamic_cast<const SmallCnn*>(&model)) {
    bundle.manifest["kind"] = "small_cnn";
    bundle.manifest["layers"] = cnn_layers(*cnn);
    bundle.tensors = cnn->named_parameters();
  } else if (const auto* logistic = dynamic_cast<const LogisticModel*>(&model)) {
    bundle.manifest["kind"] = "logistic";
    bundle.manifest["layers"] = nlohmann::json::array(
        {{{"kind", "logistic"}, {"in", logistic->weights().size()}, {"out", 1},
          {"activation", "sigmoid"}}});
    bundle.tensors = logistic->named_parameters();
  } else if (const auto* pipeline = dynamic_cast<const PcaLogisticModel*>(&model)) {
    bundle.manifest["kind"] = "pca_logistic";
    bundle.manifest["layers"] = nlohmann::json::array(
        {{{"kind", "pca"}, {"in", pipeline->pca().dimension()},
          {"out", pipeline->pca().component_count()}},
         {{"kind", "logistic"}, {"in", pipeline->pca().component_count()},
          {"out", 1}, {"activation", "sigmoid"}}});
    bundle.tensors = pca_to_bundle(pipeline->pca()).tensors;
    for (auto& t : pipeline->logistic().named_parameters())
      bundle.tensors.push_back(std::move(t));
  } else {
    throw ConfigError("model '" + model.name() + "' has no checkpoint format");
  }
  write_bundle(manifest, bundle);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& manifest) {
  const TensorBundle bundle = read_bundle(manifest);
  const auto& m = bundle.manifest;
  if (m.value("format", "") != kFormat || m.value("version", 0) != kVersion) {
    throw DataError(manifest.string() + " is not a version-1 checkpoint manifest");
  }
  LoadedCheckpoint loaded;
  try {
    loaded.meta.arch = m.value("arch", "");
    loaded.meta.seed = m.at("seed").get<std::uint64_t>();
    loaded.meta.baseline = m.at("baseline").get<double>();
    const auto name = m.at("name").get<std::string>();
    const auto input_shape = m.at("input_shape").get<Shape>();
    const auto kind = m.at("kind").get<std::string>();
    if (kind == "small_cnn") {
      loaded.model = std::make_shared<SmallCnn>(cnn_from_bundle(bundle, name, input_shape));
    } else if (kind == "logistic") {
      loaded.model = std::make_shared<LogisticModel>(
          name, input_shape, bundle.get("logistic.weight"), bundle.get("logistic.bias"));
    } else if (kind == "pca_logistic") {
      PcaModel pca = pca_from_bundle(bundle);
      LogisticModel head(name + ".head", {pca.component_count()},
                         bundle.get("logistic.weight"), bundle.get("logistic.bias"));
      loaded.model = std::make_shared<PcaLogisticModel>(name, input_shape, std::move(pca),
                                                        std::move(head));
    } else {
      throw DataError("unknown checkpoint kind '" + kind + "'");
    }
    if (loaded.model->class_count() != m.at("class_count").get<std::size_t>()) {
      throw DataError("class count in manifest does not match the stored layers");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed checkpoint manifest " + manifest.string() + ": " +
                    e.what());
  } catch (const ShapeError& e) {
    throw DataError("inconsistent checkpoint " + manifest.string() + ": " + e.what());
  }
  return loaded;
}

}  // namespace medxai
