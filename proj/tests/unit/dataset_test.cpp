#include "medxai/dataset.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "medxai/errors.hpp"
#include "medxai/image_io.hpp"
#include "test_support.hpp"

namespace medxai {
namespace {

namespace fs = std::filesystem;

Tensor flat_image(std::size_t size, double value) {
  return Tensor::full({1, size, size}, value);
}

void write_class(const fs::path& root, const std::string& cls,
                 const std::vector<std::string>& names, std::size_t size = 4) {
  fs::create_directories(root / cls);
  for (const auto& n : names) write_image(root / cls / (n + ".pgm"), flat_image(size, 0.2));
}

Dataset labelled(std::size_t tumor, std::size_t non_tumor) {
  Dataset d;
  for (std::size_t i = 0; i < tumor + non_tumor; ++i) {
    Sample s;
    s.image = Tensor::full({1, 1, 1}, static_cast<double>(i));
    s.label = i < tumor ? kTumorLabel : kNonTumorLabel;
    s.id = "s" + std::to_string(i);
    d.samples.push_back(std::move(s));
  }
  return d;
}

TEST(LoadDataset, TumorFirstThenLexicographic) {
  testing::TempDir dir("load");
  write_class(dir.path(), "tumor", {"t_b", "t_a", "t_c"});
  write_class(dir.path(), "non_tumor", {"n_2", "n_1"});
  std::vector<std::string> warnings;
  const Dataset d = load_dataset(dir.path(), &warnings);
  ASSERT_EQ(d.size(), 5u);
  std::vector<int> labels;
  std::vector<std::string> ids;
  for (const auto& s : d.samples) {
    labels.push_back(s.label);
    ids.push_back(s.id);
  }
  EXPECT_EQ(labels, (std::vector<int>{1, 1, 1, 0, 0}));
  EXPECT_EQ(ids, (std::vector<std::string>{"t_a", "t_b", "t_c", "n_1", "n_2"}));
  EXPECT_TRUE(warnings.empty());
}

TEST(LoadDataset, EmptyClassWarns) {
  testing::TempDir dir("load_empty");
  fs::create_directories(dir / "tumor");
  write_class(dir.path(), "non_tumor", {"a"});
  std::vector<std::string> warnings;
  const Dataset d = load_dataset(dir.path(), &warnings);
  EXPECT_EQ(d.size(), 1u);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("imbalance"), std::string::npos);
}

TEST(LoadDataset, MissingDirectoryIsDataError) {
  testing::TempDir dir("load_missing");
  fs::create_directories(dir / "tumor");
  EXPECT_THROW(load_dataset(dir.path()), DataError);
}

TEST(LoadDataset, MixedSizesNameTheOffender) {
  testing::TempDir dir("load_mixed");
  write_class(dir.path(), "tumor", {"a"}, 8);
  write_class(dir.path(), "non_tumor", {"odd"}, 16);
  try {
    load_dataset(dir.path());
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("odd.pgm"), std::string::npos) << e.what();
  }
}

TEST(LoadDataset, SaveLoadRoundTripKeepsLesions) {
  testing::TempDir dir("roundtrip");
  const Dataset d = make_synthetic_dataset(3, 12, 5);
  save_dataset(d, dir.path());
  const Dataset back = load_dataset(dir.path());
  ASSERT_EQ(back.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back.samples[i].id, d.samples[i].id);
    EXPECT_EQ(back.samples[i].label, d.samples[i].label);
    EXPECT_EQ(back.samples[i].image, d.samples[i].image);
    EXPECT_EQ(back.samples[i].lesion, d.samples[i].lesion);
  }
}

TEST(Split, PublishedSplitSizes) {
  const Dataset d = labelled(2590, 500);
  const auto [train, val] = split(d, 0.8, 42);
  EXPECT_EQ(train.size(), 2472u);
  EXPECT_EQ(val.size(), 618u);
  EXPECT_EQ(train.count_label(kTumorLabel), 2072u);
  EXPECT_EQ(train.count_label(kNonTumorLabel), 400u);
}

TEST(Split, HalfOfBalancedTen) {
  // round(2.5) = 3 training samples from each class.
  const auto [train, val] = split(labelled(5, 5), 0.5, 1);
  EXPECT_EQ(train.size(), 6u);
  EXPECT_EQ(val.size(), 4u);
  EXPECT_EQ(train.count_label(kTumorLabel), 3u);
  EXPECT_EQ(val.count_label(kNonTumorLabel), 2u);
}

TEST(Split, DeterministicAndAPartition) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Dataset d = labelled(2 + rng.below(30), 2 + rng.below(30));
    const double fraction = rng.uniform(0.05, 0.95);
    const std::uint64_t seed = rng.next();
    const auto [train, val] = split(d, fraction, seed);
    const auto [train2, val2] = split(d, fraction, seed);
    std::multiset<std::string> ids;
    for (const auto& s : train.samples) ids.insert(s.id);
    for (const auto& s : val.samples) ids.insert(s.id);
    ASSERT_EQ(ids.size(), d.size());
    EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), d.size());
    ASSERT_EQ(train.size(), train2.size());
    for (std::size_t i = 0; i < train.size(); ++i)
      EXPECT_EQ(train.samples[i].id, train2.samples[i].id);
  }
}

TEST(Split, RejectsTinyClassesAndBadFractions) {
  EXPECT_THROW(split(labelled(1, 5), 0.5, 1), DataError);
  EXPECT_THROW(split(labelled(5, 0), 0.5, 1), DataError);
  EXPECT_THROW(split(labelled(5, 5), 0.0, 1), ConfigError);
  EXPECT_THROW(split(labelled(5, 5), 1.0, 1), ConfigError);
}

TEST(Synthetic, DeterministicAndWellFormed) {
  const Dataset a = make_synthetic_dataset(50, 28, 11);
  const Dataset b = make_synthetic_dataset(50, 28, 11);
  ASSERT_EQ(a.size(), 100u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.samples[i].image, b.samples[i].image);
  EXPECT_EQ(a.count_label(kTumorLabel), 50u);
  EXPECT_NO_THROW(a.validate());
  for (const auto& s : a.samples) {
    EXPECT_EQ(s.image.shape(), (Shape{1, 28, 28}));
    EXPECT_EQ(s.lesion.has_value(), s.label == kTumorLabel);
    for (std::size_t i = 0; i < s.image.size(); ++i) {
      const double q = s.image[i] * 255.0;
      EXPECT_EQ(q, std::round(q));
    }
  }
}

TEST(Synthetic, LesionBoxHoldsTheBrightPixels) {
  const Dataset d = make_synthetic_dataset(20, 28, 2);
  for (const auto& s : d.samples) {
    if (!s.lesion) continue;
    double inside = 0.0, outside = 0.0;
    std::size_t n_in = 0, n_out = 0;
    for (std::size_t y = 0; y < 28; ++y) {
      for (std::size_t x = 0; x < 28; ++x) {
        const double v = s.image[y * 28 + x];
        if (s.lesion->contains(y, x)) {
          inside += v;
          ++n_in;
        } else {
          outside += v;
          ++n_out;
        }
      }
    }
    EXPECT_GT(inside / n_in, outside / n_out + 0.1) << s.id;
  }
}

TEST(Synthetic, TumorImagesAreBrighterOnAverage) {
  const Dataset d = make_synthetic_dataset(500, 16, 99);
  double tumor = 0.0, clean = 0.0;
  for (const auto& s : d.samples) {
    (s.label == kTumorLabel ? tumor : clean) += sum_all(s.image);
  }
  EXPECT_GT(tumor, clean);
}

TEST(Synthetic, EdgeCases) {
  EXPECT_TRUE(make_synthetic_dataset(0, 28, 1).empty());
  EXPECT_THROW(make_synthetic_dataset(1, 7, 1), ConfigError);
}

TEST(Dataset, MeanIntensity) {
  EXPECT_EQ(mean_intensity(Dataset{}), 0.0);
  EXPECT_DOUBLE_EQ(mean_intensity(labelled(2, 2)), 1.5);
}

}  // namespace
}  // namespace medxai
