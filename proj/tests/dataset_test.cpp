#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "proa/dataset.hpp"
#include "proa/errors.hpp"

namespace {

using namespace proa;
using namespace proa::dataset;
namespace fs = std::filesystem;

ImageTensor random_image(Shape s, std::mt19937_64& gen) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  ImageTensor img(s);
  for (double& v : img.data()) v = u(gen);  // f32-representable, so the round trip is exact
  return img;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "proa_dataset_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_index(const fs::path& dir, const std::string& text) {
  std::ofstream(dir / kLabelsFile) << text;
}

TEST(ImtFormat, RoundTripIsBitIdentical) {
  std::mt19937_64 gen(1);
  const auto dir = fresh_dir("roundtrip");
  for (int i = 0; i < 100; ++i) {
    const Shape s{1 + gen() % 9, 1 + gen() % 9, (gen() % 2) ? 3u : 1u};
    const auto img = random_image(s, gen);
    const auto path = dir / ("t" + std::to_string(i) + ".imt");
    save_image(img, path);
    ASSERT_EQ(load_image(path), img);
  }
}

TEST(ImtFormat, RejectsOutOfRangeIntensity) {
  ImageTensor img(Shape{1, 2, 1}, {0.5, 1.5});
  const auto bytes = encode_imt(img);
  try {
    decode_imt(bytes);
    FAIL() << "expected a range error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("outside [0,1]"), std::string::npos);
  }
}

TEST(ImtFormat, TruncatedAndCorrupt) {
  std::mt19937_64 gen(2);
  auto bytes = encode_imt(random_image({3, 3, 3}, gen));
  EXPECT_THROW(decode_imt(std::span(bytes).first(10)), ParseError);
  EXPECT_THROW(decode_imt(std::span(bytes).first(bytes.size() - 8)), ParseError);
  bytes[30] ^= 0x10;
  EXPECT_THROW(decode_imt(bytes), ChecksumError);
}

TEST(LoadDataset, SaveAndLoad) {
  std::mt19937_64 gen(3);
  const auto dir = fresh_dir("saved");
  std::vector<LabeledImage> items;
  for (int i = 0; i < 5; ++i) items.push_back({"im" + std::to_string(i) + ".imt", random_image({4, 4, 3}, gen), static_cast<std::size_t>(i % 2)});
  save_dataset(dir, items);
  const auto loaded = load_dataset(dir, {Shape{4, 4, 3}, 2});
  EXPECT_TRUE(loaded.issues.empty());
  ASSERT_EQ(loaded.items.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(loaded.items[i].id, items[i].id);
    EXPECT_EQ(loaded.items[i].label, items[i].label);
    EXPECT_EQ(loaded.items[i].image, items[i].image);
  }
}

TEST(LoadDataset, BadRowsAreSkippedWithIssues) {
  std::mt19937_64 gen(4);
  const auto dir = fresh_dir("issues");
  save_image(random_image({2, 2, 1}, gen), dir / "good.imt");
  save_image(random_image({3, 3, 1}, gen), dir / "wrongshape.imt");
  save_image(ImageTensor(Shape{2, 2, 1}, {0.1, 0.2, 0.3, 0.4}), dir / "highlabel.imt");
  {
    auto bytes = encode_imt(ImageTensor(Shape{2, 2, 1}, {0.1, 0.2, 0.3, 0.4}));
    bytes[bytes.size() - 1] ^= 0xff;
    std::ofstream(dir / "corrupt.imt", std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()),
                                                                static_cast<std::streamsize>(bytes.size()));
  }
  write_index(dir,
              "# comment\n"
              "good.imt\t1\n"
              "missing.imt\t0\n"
              "wrongshape.imt\t0\n"
              "highlabel.imt\t7\n"
              "corrupt.imt\t0\n"
              "good.imt\tminus\n"
              "no tab here\n");
  const auto r = load_dataset(dir, {Shape{2, 2, 1}, 3});
  ASSERT_EQ(r.items.size(), 1u);
  EXPECT_EQ(r.items[0].id, "good.imt");
  EXPECT_EQ(r.items[0].label, 1u);
  ASSERT_EQ(r.issues.size(), 6u);
  EXPECT_EQ(r.issues[0].file, "missing.imt");
  EXPECT_EQ(r.issues[0].line, 3u);
  EXPECT_NE(r.issues[0].message.find("not found"), std::string::npos);
}

TEST(LoadDataset, NothingLoadableIsFatal) {
  const auto dir = fresh_dir("empty");
  write_index(dir, "missing.imt\t0\n");
  EXPECT_THROW(load_dataset(dir), DatasetError);
  EXPECT_THROW(load_dataset(fresh_dir("noindex")), DatasetError);
}

TEST(LoadDataset, BundledToySet) {
  const auto r = load_dataset(fs::path(PROA_SOURCE_DIR) / "data" / "toy" / "images", {Shape{8, 8, 3}, 3});
  EXPECT_EQ(r.items.size(), 16u);
  EXPECT_TRUE(r.issues.empty());
}

}  // namespace
