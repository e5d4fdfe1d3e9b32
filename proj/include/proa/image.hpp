#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace proa {

struct Shape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  std::size_t size() const noexcept { return height * width * channels; }
  bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& s);

/// H x W x C intensities in [0,1], row-major with interleaved channels.
class ImageTensor {
 public:
  ImageTensor() = default;
  /// Zero-filled image. Throws ShapeError on a zero dimension or C not in {1,3}.
  explicit ImageTensor(Shape shape);
  ImageTensor(Shape shape, std::vector<double> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t height() const noexcept { return shape_.height; }
  std::size_t width() const noexcept { return shape_.width; }
  std::size_t channels() const noexcept { return shape_.channels; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  double& at(std::size_t y, std::size_t x, std::size_t c) noexcept {
    return data_[(y * shape_.width + x) * shape_.channels + c];
  }
  double at(std::size_t y, std::size_t x, std::size_t c) const noexcept {
    return data_[(y * shape_.width + x) * shape_.channels + c];
  }

  bool operator==(const ImageTensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Largest absolute elementwise difference; shapes must match.
double max_abs_diff(const ImageTensor& a, const ImageTensor& b);

/// Content hash of shape and pixel bytes.
std::uint64_t content_key(const ImageTensor& image) noexcept;

}  // namespace proa
