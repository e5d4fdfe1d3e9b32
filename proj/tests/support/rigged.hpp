#pragma once

// Synthetic classifiers whose stability probability is known exactly.

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>

#include "proa/classifier.hpp"
#include "proa/perturb.hpp"

namespace rigged {

using proa::ImageTensor;
using proa::ProbVector;
using proa::Shape;

class LambdaClassifier final : public proa::Classifier {
 public:
  using Fn = std::function<ProbVector(const ImageTensor&)>;
  LambdaClassifier(std::size_t classes, Shape shape, Fn fn)
      : classes_(classes), shape_(shape), fn_(std::move(fn)) {}

  std::size_t num_classes() const override { return classes_; }
  Shape input_shape() const override { return shape_; }
  std::vector<ProbVector> predict_batch(std::span<const ImageTensor> images) const override {
    check_inputs(images);
    std::vector<ProbVector> out;
    out.reserve(images.size());
    for (const auto& img : images) out.push_back(fn_(img));
    return out;
  }

 private:
  std::size_t classes_;
  Shape shape_;
  Fn fn_;
};

inline const ProbVector kStable{0.9, 0.1};
inline const ProbVector kFlipped{0.1, 0.9};

inline LambdaClassifier constant_classifier(Shape shape = {1, 1, 1}) {
  return LambdaClassifier(2, shape, [](const ImageTensor&) { return kStable; });
}

/// 1x1x1 input whose single intensity is the sampled brightness offset.
inline ImageTensor black_pixel() { return ImageTensor(Shape{1, 1, 1}); }

/// Brightness offset uniform on [0,1], contrast pinned to 0. Applied to
/// black_pixel() the output intensity equals theta_b exactly.
inline proa::perturb::PerturbationSpec unit_offset_spec() {
  return {proa::perturb::Family::BrightnessContrast, {{0.0, 1.0}, {0.0, 0.0}}};
}

/// Stable iff the pixel is <= mu, so P(Z = 1) = mu under unit_offset_spec.
inline LambdaClassifier bernoulli_classifier(double mu) {
  return LambdaClassifier(2, Shape{1, 1, 1}, [mu](const ImageTensor& img) {
    return img.data()[0] <= mu ? kStable : kFlipped;
  });
}

/// Flips exactly on pixel values inside (lo, hi).
inline LambdaClassifier window_classifier(double lo, double hi) {
  return LambdaClassifier(2, Shape{1, 1, 1}, [lo, hi](const ImageTensor& img) {
    const double v = img.data()[0];
    return (v > lo && v < hi) ? kFlipped : kStable;
  });
}

/// 8x8x1 horizontal ramp 0.5 + 0.3 u. Bilinear resampling reproduces a
/// linear function exactly, so the centre block of a rotated ramp encodes
/// the rotation angle without interpolation error.
inline ImageTensor ramp_image() {
  ImageTensor img(Shape{8, 8, 1});
  for (std::size_t y = 0; y < 8; ++y) {
    for (std::size_t x = 0; x < 8; ++x) img.at(y, x, 0) = 0.5 + 0.3 * (-1.0 + 2.0 * static_cast<double>(x) / 7.0);
  }
  return img;
}

/// Recovers the rotation angle of a rotated ramp from its centre 2x2 block.
inline double estimated_angle(const ImageTensor& img) {
  const double gx = (img.at(3, 4, 0) - img.at(3, 3, 0) + img.at(4, 4, 0) - img.at(4, 3, 0)) / 2.0;
  const double gy = (img.at(4, 3, 0) - img.at(3, 3, 0) + img.at(4, 4, 0) - img.at(3, 4, 0)) / 2.0;
  return std::atan2(-gy, gx);
}

inline double degrees(double d) { return d * std::numbers::pi / 180.0; }

/// 2-class model on ramp_image() rotations: flips when the angle exceeds
/// `threshold` radians. Over [-35, 35] deg with a 21 deg threshold the flip
/// region has measure 14/70 = 0.20.
inline LambdaClassifier rotation_classifier(double threshold) {
  return LambdaClassifier(2, Shape{8, 8, 1}, [threshold](const ImageTensor& img) {
    return estimated_angle(img) > threshold ? kFlipped : kStable;
  });
}

}  // namespace rigged
