#include "proa/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "proa/errors.hpp"

namespace proa::perturb {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double deg(double degrees) { return degrees * std::numbers::pi / 180.0; }

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void require_color(const ImageTensor& image, const char* op) {
  if (image.channels() != 3) {
    throw DomainError(std::string(op) + " requires a 3-channel image, got " +
                      to_string(image.shape()));
  }
}

// Normalized coordinate of pixel index i on an axis of n pixels (corners
// aligned: index 0 -> -1, index n-1 -> +1).
double normalized(std::size_t i, std::size_t n) {
  if (n == 1) return 0.0;
  return -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
}

// Inverse of `normalized`. Values off the pixel grid are returned as-is so
// the caller's bounds test rejects them.
double to_pixel(double s, std::size_t n) {
  if (n == 1) return std::abs(s) <= 1.0 ? 0.0 : -2.0;
  const double p = (s + 1.0) * static_cast<double>(n - 1) / 2.0;
  const double r = std::round(p);
  return std::abs(p - r) < 1e-10 ? r : p;
}

}  // namespace

std::string_view family_name(Family f) noexcept {
  switch (f) {
    case Family::Rotation: return "rotation";
    case Family::Translation: return "translation";
    case Family::Scaling: return "scaling";
    case Family::Hue: return "hue";
    case Family::Saturation: return "saturation";
    case Family::BrightnessContrast: return "brightness_contrast";
    case Family::GaussianBlur: return "gaussian_blur";
  }
  return "unknown";
}

std::optional<Family> parse_family(std::string_view name) noexcept {
  for (Family f : kAllFamilies) {
    if (family_name(f) == name) return f;
  }
  return std::nullopt;
}

std::size_t parameter_count(Family f) noexcept {
  return (f == Family::Translation || f == Family::BrightnessContrast) ? 2 : 1;
}

PerturbationSpec PerturbationSpec::defaults(Family f, BoxPreset preset) {
  const bool alt = preset == BoxPreset::Alternative;
  switch (f) {
    case Family::Rotation: {
      const double r = deg(alt ? 30.0 : 35.0);
      return {f, {{-r, r}}};
    }
    case Family::Translation: return {f, {{-0.3, 0.3}, {-0.3, 0.3}}};
    case Family::Scaling: return {f, {{0.7, 1.3}}};
    case Family::Hue: {
      const double h = alt ? std::numbers::pi / 3.0 : std::numbers::pi / 2.0;
      return {f, {{-h, h}}};
    }
    case Family::Saturation: {
      const double s = alt ? 0.5 : 0.3;
      return {f, {{-s, s}}};
    }
    case Family::BrightnessContrast: return {f, {{-0.3, 0.3}, {-0.3, 0.3}}};
    case Family::GaussianBlur: return {f, {{0.0, 9.0}}};
  }
  throw ConfigError("unknown perturbation family");
}

void PerturbationSpec::validate() const {
  const auto name = std::string(family_name(family));
  if (box.size() != parameter_count(family)) {
    throw ConfigError(name + " takes " + std::to_string(parameter_count(family)) +
                      " parameter range(s), got " + std::to_string(box.size()));
  }
  for (const auto& r : box) {
    if (!std::isfinite(r.low) || !std::isfinite(r.high) || r.low > r.high) {
      throw ConfigError(name + ": invalid range [" + std::to_string(r.low) + ", " +
                        std::to_string(r.high) + "]");
    }
  }
  // Ranges that would leave an operation's domain.
  if (family == Family::Scaling && box[0].low <= 0.0) {
    throw ConfigError("scaling range must be strictly positive");
  }
  if (family == Family::GaussianBlur && box[0].low < 0.0) {
    throw ConfigError("gaussian_blur variance range must be nonnegative");
  }
  if (family == Family::Saturation && box[0].low < -1.0) {
    throw ConfigError("saturation range must not go below -1");
  }
  if (family == Family::BrightnessContrast && box[1].low <= -1.0) {
    throw ConfigError("contrast range must stay above -1");
  }
}

ThetaSample::ThetaSample(std::initializer_list<double> values)
    : ThetaSample(std::span<const double>(values.begin(), values.size())) {}

ThetaSample::ThetaSample(std::span<const double> values) : size_(values.size()) {
  if (values.size() > kMaxParameters) {
    throw ConfigError("theta has " + std::to_string(values.size()) + " entries, at most " +
                      std::to_string(kMaxParameters) + " supported");
  }
  std::copy(values.begin(), values.end(), values_.begin());
}

ThetaSample sample_theta(const PerturbationSpec& spec, RandomStream& stream) {
  std::array<double, kMaxParameters> v{};
  const std::size_t n = std::min(spec.box.size(), kMaxParameters);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = spec.box[i];
    const double u = stream.uniform();
    v[i] = r.low == r.high ? r.low : std::min(r.high, r.low + u * (r.high - r.low));
  }
  return ThetaSample(std::span<const double>(v.data(), n));
}

AffineMatrix params_to_affine(double rotation_rad, double shift_x, double shift_y, double scale) {
  if (!(scale > 0.0)) throw DomainError("params_to_affine: scale must be positive");
  double c = std::cos(rotation_rad);
  double s = std::sin(rotation_rad);
  // Snap so that quarter turns produce exact matrices.
  if (std::abs(c) < 1e-15) c = 0.0;
  if (std::abs(s) < 1e-15) s = 0.0;
  return {{scale * c, -scale * s, 2.0 * shift_x, scale * s, scale * c, 2.0 * shift_y}};
}

ImageTensor affine_transform(const ImageTensor& image, const AffineMatrix& m) {
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  const std::size_t ch = image.channels();
  ImageTensor out(image.shape());

  for (std::size_t y = 0; y < h; ++y) {
    const double gy = normalized(y, h);
    for (std::size_t x = 0; x < w; ++x) {
      const double gx = normalized(x, w);
      const double sx = m(0, 0) * gx + m(0, 1) * gy + m(0, 2);
      const double sy = m(1, 0) * gx + m(1, 1) * gy + m(1, 2);
      const double px = to_pixel(sx, w);
      const double py = to_pixel(sy, h);
      const double fx0 = std::floor(px);
      const double fy0 = std::floor(py);
      const double ax = px - fx0;
      const double ay = py - fy0;
      const auto x0 = static_cast<long long>(fx0);
      const auto y0 = static_cast<long long>(fy0);

      const std::array<std::pair<long long, long long>, 4> taps{
          {{y0, x0}, {y0, x0 + 1}, {y0 + 1, x0}, {y0 + 1, x0 + 1}}};
      const std::array<double, 4> weights{(1 - ay) * (1 - ax), (1 - ay) * ax, ay * (1 - ax),
                                          ay * ax};
      for (std::size_t c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (std::size_t t = 0; t < 4; ++t) {
          if (weights[t] == 0.0) continue;
          const auto [ty, tx] = taps[t];
          if (ty < 0 || tx < 0 || ty >= static_cast<long long>(h) ||
              tx >= static_cast<long long>(w)) {
            continue;
          }
          acc += weights[t] * image.at(static_cast<std::size_t>(ty), static_cast<std::size_t>(tx), c);
        }
        out.at(y, x, c) = clamp01(acc);
      }
    }
  }
  return out;
}

std::vector<double> gaussian_kernel(double variance) {
  if (!(variance >= 0.0) || !std::isfinite(variance)) {
    throw DomainError("gaussian_blur: variance must be a nonnegative finite number");
  }
  if (variance == 0.0) return {1.0};
  const auto radius = static_cast<std::size_t>(std::ceil(3.0 * std::sqrt(variance)));
  std::vector<double> k(2 * radius + 1);
  double total = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double off = static_cast<double>(i) - static_cast<double>(radius);
    k[i] = std::exp(-off * off / (2.0 * variance));
    total += k[i];
  }
  for (double& v : k) v /= total;
  return k;
}

ImageTensor gaussian_blur(const ImageTensor& image, double variance) {
  const auto kernel = gaussian_kernel(variance);
  if (kernel.size() == 1) return image;
  const auto radius = static_cast<long long>(kernel.size() / 2);
  const auto h = static_cast<long long>(image.height());
  const auto w = static_cast<long long>(image.width());
  const std::size_t ch = image.channels();

  ImageTensor rows(image.shape());
  for (long long y = 0; y < h; ++y) {
    for (long long x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (long long j = -radius; j <= radius; ++j) {
          const long long sx = std::clamp(x + j, 0LL, w - 1);
          acc += kernel[static_cast<std::size_t>(j + radius)] *
                 image.at(static_cast<std::size_t>(y), static_cast<std::size_t>(sx), c);
        }
        rows.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c) = acc;
      }
    }
  }

  ImageTensor out(image.shape());
  for (long long y = 0; y < h; ++y) {
    for (long long x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (long long j = -radius; j <= radius; ++j) {
          const long long sy = std::clamp(y + j, 0LL, h - 1);
          acc += kernel[static_cast<std::size_t>(j + radius)] *
                 rows.at(static_cast<std::size_t>(sy), static_cast<std::size_t>(x), c);
        }
        out.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c) = clamp01(acc);
      }
    }
  }
  return out;
}

Hsb rgb_to_hsb(const Rgb& c) noexcept {
  const double hi = std::max({c.r, c.g, c.b});
  const double lo = std::min({c.r, c.g, c.b});
  const double chroma = hi - lo;
  Hsb out;
  out.brightness = hi;
  out.saturation = hi > 0.0 ? chroma / hi : 0.0;
  if (chroma <= 0.0) return out;
  double sector;
  if (hi == c.r) {
    sector = std::fmod((c.g - c.b) / chroma, 6.0);
    if (sector < 0.0) sector += 6.0;
  } else if (hi == c.g) {
    sector = (c.b - c.r) / chroma + 2.0;
  } else {
    sector = (c.r - c.g) / chroma + 4.0;
  }
  out.hue = sector * std::numbers::pi / 3.0;
  return out;
}

Rgb hsb_to_rgb(const Hsb& c) noexcept {
  const double chroma = c.brightness * c.saturation;
  double sector = c.hue / (std::numbers::pi / 3.0);
  sector = std::fmod(sector, 6.0);
  if (sector < 0.0) sector += 6.0;
  const double x = chroma * (1.0 - std::abs(std::fmod(sector, 2.0) - 1.0));
  const double m = c.brightness - chroma;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(sector)) {
    case 0: r = chroma, g = x; break;
    case 1: r = x, g = chroma; break;
    case 2: g = chroma, b = x; break;
    case 3: g = x, b = chroma; break;
    case 4: r = x, b = chroma; break;
    default: r = chroma, b = x; break;
  }
  return {r + m, g + m, b + m};
}

namespace {

template <typename Fn>
ImageTensor map_hsb(const ImageTensor& image, Fn&& fn) {
  ImageTensor out(image.shape());
  const auto src = image.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); i += 3) {
    const Rgb rgb = hsb_to_rgb(fn(rgb_to_hsb({src[i], src[i + 1], src[i + 2]})));
    dst[i] = clamp01(rgb.r);
    dst[i + 1] = clamp01(rgb.g);
    dst[i + 2] = clamp01(rgb.b);
  }
  return out;
}

}  // namespace

ImageTensor hue_shift(const ImageTensor& image, double radians) {
  require_color(image, "hue_shift");
  return map_hsb(image, [radians](Hsb c) {
    double h = std::fmod(c.hue + radians, kTwoPi);
    if (h < 0.0) h += kTwoPi;
    if (h >= kTwoPi) h = 0.0;
    c.hue = h;
    return c;
  });
}

ImageTensor saturation_shift(const ImageTensor& image, double fraction) {
  require_color(image, "saturation_shift");
  if (fraction < -1.0) throw DomainError("saturation_shift: factor must be >= -1");
  return map_hsb(image, [fraction](Hsb c) {
    c.saturation = clamp01((1.0 + fraction) * c.saturation);
    return c;
  });
}

ImageTensor brightness_contrast(const ImageTensor& image, double brightness, double contrast) {
  if (!(contrast > -1.0)) throw DomainError("brightness_contrast: contrast must exceed -1");
  ImageTensor out(image.shape());
  const auto src = image.data();
  auto dst = out.data();
  const double gain = 1.0 + contrast;
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = clamp01(gain * src[i] + brightness);
  return out;
}

ImageTensor apply(const PerturbationSpec& spec, const ThetaSample& theta, const ImageTensor& image) {
  if (theta.size() != parameter_count(spec.family)) {
    throw ConfigError(std::string(family_name(spec.family)) + " expects " +
                      std::to_string(parameter_count(spec.family)) + " parameter(s), got " +
                      std::to_string(theta.size()));
  }
  switch (spec.family) {
    case Family::Rotation:
      return affine_transform(image, params_to_affine(theta[0], 0.0, 0.0, 1.0));
    case Family::Translation:
      return affine_transform(image, params_to_affine(0.0, theta[0], theta[1], 1.0));
    case Family::Scaling:
      return affine_transform(image, params_to_affine(0.0, 0.0, 0.0, theta[0]));
    case Family::Hue: return hue_shift(image, theta[0]);
    case Family::Saturation: return saturation_shift(image, theta[0]);
    case Family::BrightnessContrast: return brightness_contrast(image, theta[0], theta[1]);
    case Family::GaussianBlur: return gaussian_blur(image, theta[0]);
  }
  throw ConfigError("unknown perturbation family");
}

}  // namespace proa::perturb
