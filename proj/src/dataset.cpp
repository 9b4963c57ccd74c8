#include "medxai/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "json.hpp"
#include "medxai/errors.hpp"
#include "medxai/image_io.hpp"
#include "medxai/random.hpp"

namespace medxai {

namespace fs = std::filesystem;

const Shape& Dataset::image_shape() const {
  if (samples.empty()) throw DataError("dataset is empty");
  return samples.front().image.shape();
}

std::size_t Dataset::count_label(int label) const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(),
                    [label](const Sample& s) { return s.label == label; }));
}

void Dataset::validate() const {
  std::set<std::string> ids;
  for (const auto& s : samples) {
    if (s.image.shape() != samples.front().image.shape()) {
      throw DataError("sample '" + s.id + "' has shape " +
                      shape_to_string(s.image.shape()) + ", expected " +
                      shape_to_string(samples.front().image.shape()));
    }
    if (s.label != kNonTumorLabel && s.label != kTumorLabel) {
      throw DataError("sample '" + s.id + "' has non-binary label " +
                      std::to_string(s.label));
    }
    if (!ids.insert(s.id).second) {
      throw DataError("duplicate sample id '" + s.id + "'");
    }
  }
}

namespace {

const char* kClassDirs[] = {"tumor", "non_tumor"};
constexpr int kClassDirLabels[] = {kTumorLabel, kNonTumorLabel};

std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".pgm" || ext == ".ppm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  return files;
}

nlohmann::json box_to_json(const BoundingBox& b) {
  return {b.row0, b.col0, b.row1, b.col1};
}

BoundingBox box_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw DataError("lesion boxes must be [row0, col0, row1, col1]");
  }
  return {j[0].get<std::size_t>(), j[1].get<std::size_t>(),
          j[2].get<std::size_t>(), j[3].get<std::size_t>()};
}

}  // namespace

Dataset load_dataset(const fs::path& root, std::vector<std::string>* warnings) {
  Dataset dataset;
  for (int c = 0; c < 2; ++c) {
    const fs::path dir = root / kClassDirs[c];
    if (!fs::is_directory(dir)) {
      throw DataError("dataset directory " + dir.string() + " is missing");
    }
    const auto files = list_images(dir);
    if (files.empty() && warnings) {
      warnings->push_back(std::string("class imbalance: no images in '") +
                          kClassDirs[c] + "'");
    }
    for (const auto& file : files) {
      Sample s;
      s.image = read_image(file);
      s.label = kClassDirLabels[c];
      s.id = file.stem().string();
      if (!dataset.samples.empty() &&
          s.image.shape() != dataset.samples.front().image.shape()) {
        throw DataError("image " + file.string() + " has shape " +
                        shape_to_string(s.image.shape()) + ", expected " +
                        shape_to_string(dataset.samples.front().image.shape()));
      }
      dataset.samples.push_back(std::move(s));
    }
  }

  const fs::path lesions = root / "lesions.json";
  if (fs::exists(lesions)) {
    std::ifstream in(lesions);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed " + lesions.string() + ": " + e.what());
    }
    for (auto& s : dataset.samples) {
      if (j.contains(s.id)) s.lesion = box_from_json(j[s.id]);
    }
  }
  dataset.validate();
  return dataset;
}

void save_dataset(const Dataset& dataset, const fs::path& root) {
  dataset.validate();
  nlohmann::json lesions = nlohmann::json::object();
  for (const char* dir : kClassDirs) fs::create_directories(root / dir);
  for (const auto& s : dataset.samples) {
    const char* dir = s.label == kTumorLabel ? "tumor" : "non_tumor";
    const char* ext = s.image.rank() == 3 && s.image.dim(0) == 3 ? ".ppm" : ".pgm";
    write_image(root / dir / (s.id + ext), s.image);
    if (s.lesion) lesions[s.id] = box_to_json(*s.lesion);
  }
  std::ofstream out(root / "lesions.json");
  out << lesions.dump(2) << '\n';
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1), got " +
                      std::to_string(train_fraction));
  }
  std::vector<bool> in_train(dataset.size(), false);
  for (int label : {kNonTumorLabel, kTumorLabel}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < dataset.size(); ++i)
      if (dataset.samples[i].label == label) members.push_back(i);
    if (members.size() < 2) {
      throw DataError("class '" + dataset.class_names[label] + "' has " +
                      std::to_string(members.size()) +
                      " samples; at least 2 are needed to split");
    }
    Rng rng(derive_seed(seed, "split/" + std::to_string(label)));
    rng.shuffle(std::span<std::size_t>(members));
    const auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(members.size())));
    for (std::size_t i = 0; i < n_train; ++i) in_train[members[i]] = true;
  }
  Dataset train, val;
  train.class_names = val.class_names = dataset.class_names;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    (in_train[i] ? train : val).samples.push_back(dataset.samples[i]);
  return {std::move(train), std::move(val)};
}

double mean_intensity(const Dataset& dataset) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& s : dataset.samples) {
    total += sum_all(s.image);
    count += s.image.size();
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

namespace {

double quantized(double v) {
  return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
}

Tensor textured_background(std::size_t size, Rng& rng) {
  const double base = rng.uniform(0.15, 0.30);
  const double amplitude = rng.uniform(0.02, 0.06);
  const double fx = rng.uniform(0.3, 0.9), fy = rng.uniform(0.3, 0.9);
  const double px = rng.uniform(0.0, 6.283), py = rng.uniform(0.0, 6.283);
  Tensor image({1, size, size});
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double texture = amplitude * std::sin(fx * static_cast<double>(x) + px) *
                             std::sin(fy * static_cast<double>(y) + py);
      const double noise = rng.uniform(-0.04, 0.04);
      image[y * size + x] = base + texture + noise;
    }
  }
  return image;
}

BoundingBox add_ellipse(Tensor& image, std::size_t size, Rng& rng) {
  const double s = static_cast<double>(size);
  const double ra = std::max(1.5, rng.uniform(0.10 * s, 0.20 * s));
  const double rb = std::max(1.5, rng.uniform(0.10 * s, 0.20 * s));
  const double cx = rng.uniform(ra, s - 1.0 - ra);
  const double cy = rng.uniform(rb, s - 1.0 - rb);
  const double boost = rng.uniform(0.45, 0.65);
  BoundingBox box{size, size, 0, 0};
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double dx = (static_cast<double>(x) - cx) / ra;
      const double dy = (static_cast<double>(y) - cy) / rb;
      if (dx * dx + dy * dy > 1.0) continue;
      image[y * size + x] += boost;
      box.row0 = std::min(box.row0, y);
      box.col0 = std::min(box.col0, x);
      box.row1 = std::max(box.row1, y);
      box.col1 = std::max(box.col1, x);
    }
  }
  return box;
}

std::string padded(std::size_t i) {
  std::string s = std::to_string(i);
  return std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
}

}  // namespace

Dataset make_synthetic_dataset(std::size_t per_class, std::size_t image_size,
                               std::uint64_t seed) {
  if (image_size < 8) {
    throw ConfigError("synthetic image size must be at least 8, got " +
                      std::to_string(image_size));
  }
  Dataset dataset;
  for (int label : {kTumorLabel, kNonTumorLabel}) {
    const std::string name = dataset.class_names[label];
    for (std::size_t i = 0; i < per_class; ++i) {
      Rng rng(derive_seed(seed, "synthetic/" + name + "/" + std::to_string(i)));
      Sample s;
      s.image = textured_background(image_size, rng);
      s.label = label;
      s.id = name + "_" + padded(i);
      if (label == kTumorLabel) s.lesion = add_ellipse(s.image, image_size, rng);
      for (double& v : s.image.mutable_data()) v = quantized(v);
      dataset.samples.push_back(std::move(s));
    }
  }
  return dataset;
}

}  // namespace medxai
