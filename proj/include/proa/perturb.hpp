#pragma once

// Parametric image perturbations: parameter boxes, uniform sampling of
// parameters, and the transformation families.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "proa/image.hpp"
#include "proa/rng.hpp"

namespace proa::perturb {

enum class Family { Rotation, Translation, Scaling, Hue, Saturation, BrightnessContrast, GaussianBlur };

inline constexpr std::array kAllFamilies{Family::Rotation,   Family::Translation,
                                         Family::Scaling,    Family::Hue,
                                         Family::Saturation, Family::BrightnessContrast,
                                         Family::GaussianBlur};

/// Config name: rotation, translation, scaling, hue, saturation,
/// brightness_contrast, gaussian_blur.
std::string_view family_name(Family f) noexcept;
std::optional<Family> parse_family(std::string_view name) noexcept;

/// Parameter dimensionality (1 or 2).
std::size_t parameter_count(Family f) noexcept;
inline constexpr std::size_t kMaxParameters = 2;

struct ParamRange {
  double low = 0.0;
  double high = 0.0;
};

/// Two published sets of default ranges. `Standard` is the default; the
/// alternative narrows rotation to +-30 deg and hue to +-pi/3, and widens
/// saturation to +-0.5.
enum class BoxPreset { Standard, Alternative };

struct PerturbationSpec {
  Family family = Family::Rotation;
  std::vector<ParamRange> box;

  static PerturbationSpec defaults(Family f, BoxPreset preset = BoxPreset::Standard);

  /// Throws ConfigError on a wrong dimensionality, low > high, or
  /// non-finite bounds.
  void validate() const;
};

/// One parameter vector theta. Fixed capacity; no allocation per sample.
class ThetaSample {
 public:
  ThetaSample() = default;
  ThetaSample(std::initializer_list<double> values);
  explicit ThetaSample(std::span<const double> values);

  std::size_t size() const noexcept { return size_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const double> values() const noexcept { return {values_.data(), size_}; }

 private:
  std::array<double, kMaxParameters> values_{};
  std::size_t size_ = 0;
};

/// Each coordinate drawn independently and uniformly from its range.
ThetaSample sample_theta(const PerturbationSpec& spec, RandomStream& stream);

/// 2x3 matrix acting on normalized coordinates in [-1,1]^2, mapping target
/// (output) positions to source positions.
struct AffineMatrix {
  std::array<double, 6> m{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};

  static AffineMatrix identity() noexcept { return {}; }
  double operator()(std::size_t row, std::size_t col) const noexcept { return m[row * 3 + col]; }
};

/// [[s cos r, -s sin r, 2 dx], [s sin r, s cos r, 2 dy]]. Translations are
/// fractions of the image extent; the normalized extent is 2.
AffineMatrix params_to_affine(double rotation_rad, double shift_x, double shift_y, double scale);

/// Bilinear resampling at m * (g, 1) for every normalized target g, zero
/// outside the source, clamped to [0,1].
ImageTensor affine_transform(const ImageTensor& image, const AffineMatrix& m);

/// Separable Gaussian with variance `variance`, truncated at
/// ceil(3 sqrt(variance)) and renormalized; edges replicated.
ImageTensor gaussian_blur(const ImageTensor& image, double variance);

/// Kernel used by gaussian_blur, centred, odd length.
std::vector<double> gaussian_kernel(double variance);

ImageTensor hue_shift(const ImageTensor& image, double radians);
ImageTensor saturation_shift(const ImageTensor& image, double fraction);
ImageTensor brightness_contrast(const ImageTensor& image, double brightness, double contrast);

/// Dispatches to the family's transformation.
ImageTensor apply(const PerturbationSpec& spec, const ThetaSample& theta, const ImageTensor& image);

// Hexcone colour model with hue in radians [0, 2 pi).
struct Hsb {
  double hue = 0.0;
  double saturation = 0.0;
  double brightness = 0.0;
};
struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
};
Hsb rgb_to_hsb(const Rgb& c) noexcept;
Rgb hsb_to_rgb(const Hsb& c) noexcept;

}  // namespace proa::perturb
