#include "medxai/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "medxai/checkpoint.hpp"
#include "medxai/dataset.hpp"
#include "medxai/ensemble.hpp"
#include "medxai/errors.hpp"
#include "medxai/gradcam.hpp"
#include "medxai/image_io.hpp"
#include "medxai/lime.hpp"
#include "medxai/logistic.hpp"
#include "medxai/metrics.hpp"
#include "medxai/pca_logistic.hpp"
#include "medxai/random.hpp"
#include "medxai/shap.hpp"
#include "medxai/small_cnn.hpp"
#include "medxai/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace medxai {

namespace {

struct SyntheticArgs {
  std::string out;
  std::size_t per_class = 200;
  std::size_t size = 28;
  std::uint64_t seed = 42;
};

struct TrainArgs {
  std::string data;
  std::string out;
  std::vector<std::string> archs{"cnn", "cnn-tiny", "logistic"};
  std::size_t epochs = 20;
  double lr = 0.05;
  std::size_t batch = 16;
  std::uint64_t seed = 42;
  double train_fraction = 0.8;
  std::size_t components = 16;
};

struct EvaluateArgs {
  std::string data;
  std::vector<std::string> models;
  std::string out;
  std::vector<double> weights;
  std::uint64_t seed = 42;
  double train_fraction = 0.8;
};

struct ExplainArgs {
  std::vector<std::string> models;
  std::string image;
  std::string out;
  std::string method = "all";
  std::vector<double> weights;
  std::size_t segments = 7;
  std::size_t samples = 1000;
  double sigma = 0.25;
  double lambda = 1e-3;
  std::size_t top_k = 10;
  std::size_t class_index = 1;
  std::optional<double> baseline;
  std::string shap_mode = "auto";
  std::size_t budget = 200;
  std::uint64_t seed = 42;
};

struct PredictArgs {
  std::vector<std::string> models;
  std::vector<std::string> images;
  std::string out;
  std::vector<double> weights;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw DataError("failed while writing '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

std::vector<LoadedCheckpoint> load_models(const std::vector<std::string>& paths) {
  if (paths.empty()) throw ConfigError("at least one --models checkpoint is required");
  std::vector<LoadedCheckpoint> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(load_checkpoint(p));
  return out;
}

PredictorList predictors(const std::vector<LoadedCheckpoint>& ckpts) {
  PredictorList list;
  for (const auto& c : ckpts) list.push_back(c.model);
  return list;
}

WeightedConfig weight_config(const std::vector<double>& weights, std::size_t models) {
  if (!weights.empty() && weights.size() != models) {
    throw ConfigError("--weights has " + std::to_string(weights.size()) +
                      " entries for " + std::to_string(models) + " models");
  }
  return WeightedConfig{weights};
}

void check_input_shape(const Predictor& model, const Shape& shape, const std::string& what) {
  if (model.input_shape() != shape) {
    throw ShapeError("model '" + model.name() + "' expects input " +
                     shape_to_string(model.input_shape()) + " but " + what + " has " +
                     shape_to_string(shape));
  }
}

const std::string& class_name(std::size_t label) {
  static const Dataset names;
  return names.class_names.at(label);
}

// --- make-synthetic -------------------------------------------------------

int cmd_make_synthetic(const SyntheticArgs& args, std::ostream& out) {
  const Dataset ds = make_synthetic_dataset(args.per_class, args.size, args.seed);
  save_dataset(ds, ensure_dir(args.out));
  out << "wrote " << ds.size() << " images to " << args.out << "\n";
  return kExitOk;
}

// --- train ----------------------------------------------------------------

std::unique_ptr<TrainableModel> build_trainable(const std::string& arch,
                                                const std::string& name,
                                                const Shape& input, std::uint64_t seed) {
  if (arch == "logistic") return std::make_unique<LogisticModel>(name, input);
  CnnArchitecture a;
  a.input_shape = input;
  if (arch == "cnn") {
    a.conv_channels = {8, 16};
  } else if (arch == "cnn-tiny") {
    a.conv_channels = {4};
    a.hidden_units = {8};
  } else {
    throw ConfigError("unknown architecture '" + arch +
                      "' (expected cnn, cnn-tiny, logistic or pca-logistic)");
  }
  return std::make_unique<SmallCnn>(SmallCnn::initialized(name, a, seed));
}

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  if (args.archs.empty()) throw ConfigError("--arch lists no architectures");
  std::vector<std::string> warnings;
  const Dataset data = load_dataset(args.data, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  const auto [train, val] = split(data, args.train_fraction, args.seed);
  if (train.empty()) throw DataError("training split is empty");
  const fs::path dir = ensure_dir(args.out);
  const double baseline = mean_intensity(train);

  int status = kExitOk;
  for (std::size_t i = 0; i < args.archs.size(); ++i) {
    const std::string& arch = args.archs[i];
    const bool repeated = std::count(args.archs.begin(), args.archs.end(), arch) > 1;
    const std::string name = repeated ? arch + "-" + std::to_string(i) : arch;
    const std::uint64_t model_seed =
        derive_seed(args.seed, "model/" + std::to_string(i) + "/" + arch);
    TrainConfig config{args.epochs, args.lr, args.batch, derive_seed(model_seed, "batches")};

    std::unique_ptr<Predictor> model;
    TrainHistory history;
    try {
      if (arch == "pca-logistic") {
        const std::size_t d = shape_size(train.image_shape());
        const std::size_t k = std::min({args.components, train.size() - 1, d});
        auto [m, h] = train_pca_logistic(name, train, val, k, config);
        model = std::make_unique<PcaLogisticModel>(std::move(m));
        history = std::move(h);
      } else {
        auto init = build_trainable(arch, name, train.image_shape(), model_seed);
        auto [m, h] = train_sgd(*init, train, val, config);
        model = std::move(m);
        history = std::move(h);
      }
    } catch (const NumericError& e) {
      err << "error: model '" << name << "': " << e.what() << "\n";
      status = kExitNumeric;
      continue;
    }

    save_checkpoint(*model, dir / (name + ".json"), CheckpointMeta{arch, model_seed, baseline});
    write_text(dir / (name + ".history.csv"), history_to_csv(history));
    write_json(dir / (name + ".history.json"), history_to_json(history));
    const EpochStats& last = history.epochs.back();
    out << "trained " << name << ": train_accuracy " << last.train_accuracy
        << ", val_accuracy " << last.val_accuracy << "\n";
  }
  return status;
}

// --- evaluate -------------------------------------------------------------

json evaluate_row(const Predictor& model, const std::string& kind, const Dataset& train,
                  const Dataset& val, const fs::path& dir, json& confusions,
                  double& val_accuracy) {
  std::vector<int> truth, predicted;
  std::vector<double> scores;
  for (const auto& s : val.samples) {
    const auto probs = model.predict(s.image);
    truth.push_back(s.label);
    predicted.push_back(static_cast<int>(argmax(probs)));
    scores.push_back(probs.at(1));
  }
  const ConfusionMatrix cm = confusion(predicted, truth, kTumorLabel);
  const ClassificationScores sc = prf1_accuracy(cm);
  const EvalStats tr = evaluate(model, train);
  const EvalStats va = evaluate(model, val);
  val_accuracy = va.accuracy;

  json row = {{"model", model.name()},
              {"kind", kind},
              {"train_accuracy", tr.accuracy},
              {"train_loss", tr.loss},
              {"val_accuracy", va.accuracy},
              {"val_loss", va.loss},
              {"precision", sc.precision},
              {"recall", sc.recall},
              {"f1", sc.f1},
              {"degenerate", scores_to_json(sc)["degenerate"]}};
  confusions[model.name()] = confusion_to_json(cm);
  if (cm.tp + cm.fn > 0 && cm.fp + cm.tn > 0) {
    const RocResult roc = roc_auc(scores, truth);
    row["auc"] = roc.auc;
    write_text(dir / ("roc_" + model.name() + ".csv"), roc_to_csv(roc.curve));
  } else {
    row["auc"] = nullptr;
  }
  return row;
}

int cmd_evaluate(const EvaluateArgs& args, std::ostream& out, std::ostream& err) {
  const auto ckpts = load_models(args.models);
  std::vector<std::string> warnings;
  const Dataset data = load_dataset(args.data, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  const auto [train, val] = split(data, args.train_fraction, args.seed);
  if (val.empty()) throw DataError("validation split is empty");
  for (const auto& c : ckpts) check_input_shape(*c.model, val.image_shape(), "the dataset");
  const fs::path dir = ensure_dir(args.out);

  json rows = json::array();
  json confusions = json::object();
  std::vector<double> accuracies;
  for (const auto& c : ckpts) {
    double acc = 0.0;
    rows.push_back(evaluate_row(*c.model, c.meta.arch, train, val, dir, confusions, acc));
    accuracies.push_back(acc);
  }
  const EnsemblePredictor ensemble("ensemble", predictors(ckpts),
                                   weight_config(args.weights, ckpts.size()));
  double ensemble_acc = 0.0;
  rows.push_back(evaluate_row(ensemble, "ensemble", train, val, dir, confusions, ensemble_acc));

  std::vector<double> sorted = accuracies;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  const double median = m % 2 ? sorted[m / 2] : (sorted[m / 2 - 1] + sorted[m / 2]) / 2.0;

  json report = {{"rows", rows},
                 {"train_size", train.size()},
                 {"val_size", val.size()},
                 {"seed", args.seed},
                 {"median_base_val_accuracy", median},
                 {"ensemble_ge_median", ensemble_acc >= median}};
  write_json(dir / "metrics.json", report);
  write_json(dir / "confusion.json", confusions);

  for (const auto& row : rows) {
    out << row["model"].get<std::string>() << ": val_accuracy "
        << row["val_accuracy"].get<double>() << ", f1 " << row["f1"].get<double>() << "\n";
  }
  if (ensemble_acc < median) {
    err << "warning: ensemble accuracy " << ensemble_acc
        << " is below the median base-model accuracy " << median << "\n";
  }
  return kExitOk;
}

// --- explain --------------------------------------------------------------

Tensor side_by_side(const Tensor& left, const Tensor& right) {
  const std::size_t h = left.dim(1), w = left.dim(2);
  Tensor out({1, h, 2 * w});
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      out[y * 2 * w + x] = left[y * w + x];
      out[y * 2 * w + w + x] = right[y * w + x];
    }
  }
  return out;
}

int cmd_explain(const ExplainArgs& args, std::ostream& out) {
  static const std::vector<std::string> kMethods{"lime", "shap", "gradcam"};
  std::vector<std::string> methods;
  if (args.method == "all") {
    methods = kMethods;
  } else if (std::find(kMethods.begin(), kMethods.end(), args.method) != kMethods.end()) {
    methods = {args.method};
  } else {
    throw ConfigError("unknown method '" + args.method +
                      "' (expected lime, shap, gradcam or all)");
  }

  const auto ckpts = load_models(args.models);
  const Tensor image = read_image(args.image);
  for (const auto& c : ckpts) check_input_shape(*c.model, image.shape(), "'" + args.image + "'");

  const SmallCnn* cnn = nullptr;
  if (std::find(methods.begin(), methods.end(), "gradcam") != methods.end()) {
    if (ckpts.size() != 1) throw ConfigError("gradcam explains exactly one checkpoint");
    cnn = dynamic_cast<const SmallCnn*>(ckpts.front().model.get());
    if (cnn == nullptr || !cnn->has_conv_layers()) {
      throw ConfigError("gradcam needs feature maps and gradients, but model '" +
                        ckpts.front().model->name() + "' (" + ckpts.front().meta.arch +
                        ") is not a convolutional network");
    }
  }

  std::shared_ptr<const Predictor> predictor = ckpts.front().model;
  if (ckpts.size() > 1) {
    predictor = std::make_shared<EnsemblePredictor>(
        "ensemble", predictors(ckpts), weight_config(args.weights, ckpts.size()));
  }
  const double baseline = args.baseline.value_or(ckpts.front().meta.baseline);
  const fs::path dir = ensure_dir(args.out);
  const std::string id = fs::path(args.image).stem().string();

  for (const auto& method : methods) {
    const fs::path stem = dir / (id + "." + method);
    json j;
    Tensor picture;
    if (method == "lime") {
      LimeConfig cfg{args.segments, args.samples,     args.sigma, args.lambda,
                     args.top_k,    args.class_index, baseline,
                     derive_seed(args.seed, "explain/lime")};
      const LimeExplanation e = explain_lime(*predictor, image, cfg);
      j = lime_to_json(e);
      j["grid"] = args.segments;
      picture = render_lime_mask(image, segment_image(image, args.segments), e);
    } else if (method == "shap") {
      const SegmentMask mask = segment_image(image, args.segments);
      ShapConfig cfg{args.class_index, baseline, parse_shap_mode(args.shap_mode), args.budget,
                     derive_seed(args.seed, "explain/shap")};
      const ShapExplanation e = explain_shap(*predictor, image, mask, cfg);
      j = shap_to_json(e);
      j["grid"] = args.segments;
      j["legend"]["layout"] = "left half positive phi, right half negative phi";
      const ShapHeatmaps maps = render_shap(e, mask);
      picture = side_by_side(maps.positive, maps.negative);
    } else {
      const GradCamHeatmap h = explain_gradcam(*cnn, image, args.class_index);
      j = gradcam_to_json(h);
      picture = render_gradcam(h);
    }
    j["model"] = predictor->name();
    j["image_id"] = id;
    j["baseline"] = baseline;
    write_json(stem.string() + ".json", j);
    write_image(stem.string() + ".pgm", picture);
    out << "wrote " << stem.string() << ".json and .pgm\n";
  }
  return kExitOk;
}

// --- predict --------------------------------------------------------------

int cmd_predict(const PredictArgs& args, std::ostream& out) {
  if (args.models.empty()) throw ConfigError("predict needs at least one --models checkpoint");
  if (args.images.empty()) throw ConfigError("predict needs at least one --image");
  const auto ckpts = load_models(args.models);
  const PredictorList models = predictors(ckpts);
  const WeightedConfig config = weight_config(args.weights, models.size());
  std::optional<fs::path> dir;
  if (!args.out.empty()) dir = ensure_dir(args.out);

  for (const auto& path : args.images) {
    const Tensor image = read_image(path);
    const std::string id = fs::path(path).stem().string();
    const VoteRecord record = ensemble_predict(models, image, config, id);
    if (dir) write_json(*dir / (id + ".vote.json"), vote_record_to_json(record));
    out << "final_prediction: " << class_name(record.final_label) << "\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Explainable voting-ensemble classifier toolkit", "medxai"};
  app.require_subcommand(1);

  SyntheticArgs syn;
  auto* c_syn = app.add_subcommand("make-synthetic", "Write a synthetic ellipse dataset");
  c_syn->add_option("--out", syn.out, "Output dataset directory")->required();
  c_syn->add_option("--per-class", syn.per_class, "Images per class");
  c_syn->add_option("--size", syn.size, "Image side length");
  c_syn->add_option("--seed", syn.seed);

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train base models and write checkpoints");
  c_train->add_option("--data", tr.data, "Dataset directory")->required();
  c_train->add_option("--out", tr.out, "Checkpoint directory")->required();
  c_train->add_option("--arch", tr.archs, "cnn, cnn-tiny, logistic, pca-logistic")
      ->delimiter(',');
  c_train->add_option("--epochs", tr.epochs);
  c_train->add_option("--lr", tr.lr);
  c_train->add_option("--batch", tr.batch);
  c_train->add_option("--seed", tr.seed);
  c_train->add_option("--train-fraction", tr.train_fraction);
  c_train->add_option("--components", tr.components, "PCA components for pca-logistic");

  EvaluateArgs ev;
  auto* c_eval = app.add_subcommand("evaluate", "Metrics for each model and the ensemble");
  c_eval->add_option("--data", ev.data, "Dataset directory")->required();
  c_eval->add_option("--models", ev.models, "Checkpoint manifests")->delimiter(',')->required();
  c_eval->add_option("--out", ev.out, "Report directory")->required();
  c_eval->add_option("--weights", ev.weights)->delimiter(',');
  c_eval->add_option("--seed", ev.seed);
  c_eval->add_option("--train-fraction", ev.train_fraction);

  ExplainArgs ex;
  auto* c_explain = app.add_subcommand("explain", "Explain one image");
  c_explain->add_option("--models", ex.models, "Checkpoint manifests")->delimiter(',')->required();
  c_explain->add_option("--image", ex.image)->required();
  c_explain->add_option("--out", ex.out)->required();
  c_explain->add_option("--method", ex.method, "lime, shap, gradcam or all");
  c_explain->add_option("--weights", ex.weights)->delimiter(',');
  c_explain->add_option("--segments", ex.segments, "Segment grid side; segments = side^2");
  c_explain->add_option("--samples", ex.samples, "LIME perturbations");
  c_explain->add_option("--sigma", ex.sigma, "LIME kernel width");
  c_explain->add_option("--lambda", ex.lambda, "LIME ridge penalty");
  c_explain->add_option("--topk", ex.top_k, "LIME segments kept");
  c_explain->add_option("--class", ex.class_index, "Class to explain");
  c_explain->add_option("--baseline", ex.baseline, "Pixel value of a removed segment");
  c_explain->add_option("--shap-mode", ex.shap_mode, "auto, exact or sampled");
  c_explain->add_option("--budget", ex.budget, "Shapley permutations in sampled mode");
  c_explain->add_option("--seed", ex.seed);

  PredictArgs pr;
  auto* c_predict = app.add_subcommand("predict", "Ensemble vote for images");
  c_predict->add_option("--models", pr.models, "Checkpoint manifests")->delimiter(',');
  c_predict->add_option("--image", pr.images, "Input image (repeatable)");
  c_predict->add_option("--out", pr.out, "Directory for vote records");
  c_predict->add_option("--weights", pr.weights)->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_syn->parsed()) return cmd_make_synthetic(syn, out);
    if (c_train->parsed()) return cmd_train(tr, out, err);
    if (c_eval->parsed()) return cmd_evaluate(ev, out, err);
    if (c_explain->parsed()) return cmd_explain(ex, out);
    if (c_predict->parsed()) return cmd_predict(pr, out);
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ShapeError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace medxai
