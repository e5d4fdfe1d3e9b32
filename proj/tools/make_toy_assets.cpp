// Regenerates the bundled demo assets under data/:
//   data/toy/      3-class MLP on 8x8x3 images + 16 labelled images
//   data/constant/ 2-class model with zero weights (always [0.9, 0.1]) + 4 images

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>

#include "proa/classifier.hpp"
#include "proa/dataset.hpp"
#include "proa/rng.hpp"

namespace fs = std::filesystem;
using namespace proa;

namespace {

constexpr Shape kShape{8, 8, 3};

DenseLayer random_layer(std::size_t rows, std::size_t cols, double scale, RandomStream& rng) {
  DenseLayer l{rows, cols, std::vector<float>(rows * cols), std::vector<float>(rows)};
  for (auto& w : l.weights) w = static_cast<float>(scale * (2.0 * rng.uniform() - 1.0));
  for (auto& b : l.bias) b = static_cast<float>(0.1 * (2.0 * rng.uniform() - 1.0));
  return l;
}

// Smooth colour pattern: a tilted sinusoid per channel over a base tint.
ImageTensor pattern(RandomStream& rng) {
  ImageTensor img(kShape);
  for (std::size_t c = 0; c < 3; ++c) {
    const double base = 0.2 + 0.6 * rng.uniform();
    const double amp = 0.25 * rng.uniform();
    const double fx = 2.0 * std::numbers::pi * rng.uniform() / 4.0;
    const double fy = 2.0 * std::numbers::pi * rng.uniform() / 4.0;
    const double phase = 2.0 * std::numbers::pi * rng.uniform();
    for (std::size_t y = 0; y < kShape.height; ++y) {
      for (std::size_t x = 0; x < kShape.width; ++x) {
        const double v = base + amp * std::sin(fx * static_cast<double>(x) + fy * static_cast<double>(y) + phase);
        img.at(y, x, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return img;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path("data");
  RandomStream rng(20240611);

  const BuiltinNetwork toy(kShape, {random_layer(16, kShape.size(), 0.25, rng), random_layer(3, 16, 1.5, rng)});
  fs::create_directories(root / "toy");
  save_builtin(toy, root / "toy" / "model.nnw");

  std::vector<LabeledImage> images;
  for (int i = 0; i < 16; ++i) {
    ImageTensor img = pattern(rng);
    std::size_t label = argmax(toy.predict(img));
    if (i >= 14) label = (label + 1) % 3;  // two deliberately wrong labels
    char name[32];
    std::snprintf(name, sizeof name, "img%02d.imt", i);
    images.push_back({name, std::move(img), label});
  }
  dataset::save_dataset(root / "toy" / "images", images);

  DenseLayer constant{2, kShape.size(), std::vector<float>(2 * kShape.size(), 0.0f),
                      {static_cast<float>(std::log(9.0)), 0.0f}};
  fs::create_directories(root / "constant");
  save_builtin(BuiltinNetwork(kShape, {constant}), root / "constant" / "model.nnw");
  std::vector<LabeledImage> constant_images;
  for (int i = 0; i < 4; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "c%02d.imt", i);
    constant_images.push_back({name, images[static_cast<std::size_t>(i)].image, 0});
  }
  dataset::save_dataset(root / "constant" / "images", constant_images);

  std::cout << "wrote assets under " << root.string() << '\n';
  return 0;
}
