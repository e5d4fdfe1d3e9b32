#include "proa/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "proa/errors.hpp"
#include "proa/rng.hpp"

namespace proa {

std::string to_string(const Shape& s) {
  return std::to_string(s.height) + "x" + std::to_string(s.width) + "x" +
         std::to_string(s.channels);
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.height == 0 || shape.width == 0) {
    throw ShapeError("image dimensions must be positive, got " + to_string(shape));
  }
  if (shape.channels != 1 && shape.channels != 3) {
    throw ShapeError("image must have 1 or 3 channels, got " + to_string(shape));
  }
}

}  // namespace

ImageTensor::ImageTensor(Shape shape) : shape_(shape) {
  check_shape(shape_);
  data_.assign(shape_.size(), 0.0);
}

ImageTensor::ImageTensor(Shape shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != shape_.size()) {
    throw ShapeError("image " + to_string(shape_) + " expects " + std::to_string(shape_.size()) +
                     " values, got " + std::to_string(data_.size()));
  }
}

double max_abs_diff(const ImageTensor& a, const ImageTensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("max_abs_diff: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
  double worst = 0.0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) worst = std::max(worst, std::abs(da[i] - db[i]));
  return worst;
}

std::uint64_t content_key(const ImageTensor& image) noexcept {
  const auto& s = image.shape();
  std::uint64_t key = hash_combine(hash_combine(s.height, s.width), s.channels);
  const auto bytes = std::as_bytes(image.data());
  return hash_combine(key, fnv1a64({reinterpret_cast<const unsigned char*>(bytes.data()),
                                    bytes.size()}));
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view text) noexcept {
  return fnv1a64({reinterpret_cast<const unsigned char*>(text.data()), text.size()});
}

}  // namespace proa
