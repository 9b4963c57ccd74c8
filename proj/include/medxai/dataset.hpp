#ifndef MEDXAI_DATASET_HPP
#define MEDXAI_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "medxai/tensor.hpp"

namespace medxai {

inline constexpr int kNonTumorLabel = 0;
inline constexpr int kTumorLabel = 1;

// Inclusive pixel rectangle.
struct BoundingBox {
  std::size_t row0 = 0, col0 = 0, row1 = 0, col1 = 0;

  bool contains(std::size_t row, std::size_t col) const {
    return row >= row0 && row <= row1 && col >= col0 && col <= col1;
  }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Sample {
  Tensor image;  // [C,H,W]
  int label = 0;
  std::string id;
  // Ground-truth lesion extent, known for synthetic data only.
  std::optional<BoundingBox> lesion;
};

struct Dataset {
  std::vector<Sample> samples;
  std::vector<std::string> class_names{"non_tumor", "tumor"};

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  // Shape shared by all images; throws on an empty dataset.
  const Shape& image_shape() const;
  std::size_t count_label(int label) const;

  // Checks uniform image shapes, binary labels and unique ids.
  void validate() const;
};

// Reads root/tumor and root/non_tumor (*.pgm, *.ppm). Tumor samples come
// first, each class in lexicographic filename order. An optional
// root/lesions.json maps sample ids to bounding boxes.
Dataset load_dataset(const std::filesystem::path& root,
                     std::vector<std::string>* warnings = nullptr);

// Inverse of load_dataset: writes images and lesions.json.
void save_dataset(const Dataset& dataset, const std::filesystem::path& root);

// Stratified split. Each class contributes round(fraction * n_class) samples
// to the training side; original order is kept within each side.
std::pair<Dataset, Dataset> split(const Dataset& dataset,
                                  double train_fraction, std::uint64_t seed);

// Mean pixel value over every image; 0 for an empty dataset.
double mean_intensity(const Dataset& dataset);

// Class-1 images carry a bright ellipse on a textured background, class-0
// images only the background. Pixel values are multiples of 1/255 so the
// dataset survives a NetPBM round trip unchanged.
Dataset make_synthetic_dataset(std::size_t per_class, std::size_t image_size,
                               std::uint64_t seed);

}  // namespace medxai

#endif  // MEDXAI_DATASET_HPP
