#include "proa/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "binary_io.hpp"
#include "proa/errors.hpp"

namespace proa {

namespace {

constexpr char kNnwMagic[5] = "PNNW";
constexpr std::uint8_t kNnwVersion = 1;
// Guards against absurd allocations when a header is corrupt.
constexpr std::uint32_t kMaxDimension = 1u << 24;

}  // namespace

void check_simplex(std::span<const double> p, std::size_t expected_classes) {
  if (p.size() < 2) {
    throw MalformedResponseError("probability vector needs at least 2 entries, got " +
                                 std::to_string(p.size()));
  }
  if (expected_classes != 0 && p.size() != expected_classes) {
    throw MalformedResponseError("expected " + std::to_string(expected_classes) +
                                 " probabilities, got " + std::to_string(p.size()));
  }
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw MalformedResponseError("probability entry " + std::to_string(v) + " outside [0,1]");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw MalformedResponseError("probabilities sum to " + std::to_string(sum) + ", not 1");
  }
}

std::size_t argmax(std::span<const double> p) noexcept {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

ProbVector Classifier::predict(const ImageTensor& image) const {
  auto out = predict_batch(std::span<const ImageTensor>(&image, 1));
  return std::move(out.front());
}

void Classifier::check_inputs(std::span<const ImageTensor> images) const {
  const Shape expected = input_shape();
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].shape() != expected) {
      throw ShapeError("image " + std::to_string(i) + " has shape " +
                       to_string(images[i].shape()) + ", model expects " + to_string(expected));
    }
  }
}

const char* to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::BuiltinLinear: return "builtin-linear";
    case ModelKind::BuiltinMLP: return "builtin-mlp";
    case ModelKind::External: return "external";
  }
  return "?";
}

BuiltinNetwork::BuiltinNetwork(Shape input_shape, std::vector<DenseLayer> layers)
    : input_shape_(input_shape), layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("network needs at least one layer");
  std::size_t width = input_shape_.size();
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    const auto tag = "layer " + std::to_string(i);
    if (l.cols != width) {
      throw ConfigError(tag + " expects " + std::to_string(l.cols) + " inputs, previous width is " +
                        std::to_string(width));
    }
    if (l.rows == 0 || l.weights.size() != l.rows * l.cols || l.bias.size() != l.rows) {
      throw ConfigError(tag + " has inconsistent sizes");
    }
    width = l.rows;
  }
  if (width < 2) throw ConfigError("network must output at least 2 classes");
}

std::size_t BuiltinNetwork::num_classes() const { return layers_.back().rows; }

ModelKind BuiltinNetwork::kind() const noexcept {
  return layers_.size() == 1 ? ModelKind::BuiltinLinear : ModelKind::BuiltinMLP;
}

ProbVector BuiltinNetwork::forward(std::span<const double> input) const {
  std::vector<double> act(input.begin(), input.end());
  std::vector<double> next;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const auto& l = layers_[li];
    next.assign(l.rows, 0.0);
    for (std::size_t r = 0; r < l.rows; ++r) {
      const float* row = l.weights.data() + r * l.cols;
      double acc = l.bias[r];
      for (std::size_t c = 0; c < l.cols; ++c) acc += static_cast<double>(row[c]) * act[c];
      next[r] = (li + 1 < layers_.size()) ? std::max(acc, 0.0) : acc;
    }
    act.swap(next);
  }
  const double top = *std::max_element(act.begin(), act.end());
  double total = 0.0;
  for (double& v : act) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : act) v /= total;
  return act;
}

std::vector<ProbVector> BuiltinNetwork::predict_batch(std::span<const ImageTensor> images) const {
  check_inputs(images);
  std::vector<ProbVector> out;
  out.reserve(images.size());
  for (const auto& img : images) out.push_back(forward(img.data()));
  return out;
}

std::vector<unsigned char> encode_nnw(const BuiltinNetwork& net) {
  detail::ByteWriter w;
  w.bytes(kNnwMagic, 4);
  w.u8(kNnwVersion);
  const Shape s = net.input_shape();
  w.u32(static_cast<std::uint32_t>(s.height));
  w.u32(static_cast<std::uint32_t>(s.width));
  w.u32(static_cast<std::uint32_t>(s.channels));
  w.u32(static_cast<std::uint32_t>(net.num_classes()));
  w.u32(static_cast<std::uint32_t>(net.layers().size()));
  for (const auto& l : net.layers()) {
    w.u32(static_cast<std::uint32_t>(l.rows));
    w.u32(static_cast<std::uint32_t>(l.cols));
    w.bytes(l.weights.data(), l.weights.size() * sizeof(float));
    w.bytes(l.bias.data(), l.bias.size() * sizeof(float));
  }
  w.checksum();
  return w.take();
}

BuiltinNetwork decode_nnw(std::span<const unsigned char> bytes) {
  detail::ByteReader r(bytes);
  r.expect_magic(kNnwMagic, "nnw");
  const auto version = r.u8("version");
  if (version != kNnwVersion) {
    throw ParseError("unsupported nnw version " + std::to_string(version), 4);
  }
  Shape shape;
  shape.height = r.u32("header (height)");
  shape.width = r.u32("header (width)");
  shape.channels = r.u32("header (channels)");
  const std::size_t classes = r.u32("header (num_classes)");
  const std::size_t header_end = r.offset();
  const std::uint32_t count = r.u32("header (layer count)");
  if (count == 0 || count > 1024) throw ParseError("implausible layer count", header_end);

  std::vector<DenseLayer> layers(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto tag = "layer " + std::to_string(i);
    auto& l = layers[i];
    const std::size_t at = r.offset();
    l.rows = r.u32(tag + " rows");
    l.cols = r.u32(tag + " cols");
    if (l.rows == 0 || l.cols == 0 || l.rows > kMaxDimension || l.cols > kMaxDimension) {
      throw ParseError(tag + " has implausible dimensions", at);
    }
    r.need(l.rows * l.cols * sizeof(float), tag + " weights");
    l.weights.resize(l.rows * l.cols);
    r.read(l.weights.data(), l.weights.size() * sizeof(float), tag + " weights");
    l.bias.resize(l.rows);
    r.read(l.bias.data(), l.bias.size() * sizeof(float), tag + " bias");
  }
  const std::size_t body_end = r.offset();
  r.verify_checksum("nnw");
  if (layers.back().rows != classes) {
    throw ParseError("header declares " + std::to_string(classes) + " classes but last layer has " +
                         std::to_string(layers.back().rows) + " outputs",
                     body_end);
  }
  try {
    return BuiltinNetwork(shape, std::move(layers));
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid network: ") + e.what(), body_end);
  }
}

void save_builtin(const BuiltinNetwork& net, const std::filesystem::path& path) {
  detail::write_file(path.string(), encode_nnw(net));
}

std::unique_ptr<BuiltinNetwork> load_builtin(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path.string());
  return std::make_unique<BuiltinNetwork>(decode_nnw(bytes));
}

bool is_external_source(const std::string& source) noexcept {
  return source.rfind("tcp://", 0) == 0 || source.rfind("stdio:", 0) == 0 || source == "external";
}

std::unique_ptr<Classifier> open_model(const std::string& source, ModelDescriptor* descriptor) {
  if (is_external_source(source)) {
    std::string address = source;
    if (const char* env = std::getenv("PROA_ENDPOINT"); env != nullptr && *env != '\0') {
      address = env;
    }
    if (address == "external") {
      throw ConfigError("model 'external' needs PROA_ENDPOINT to name an address");
    }
    auto model = std::make_unique<ExternalClassifier>(address);
    if (descriptor) {
      *descriptor = {ModelKind::External, address, model->num_classes(), model->input_shape()};
    }
    return model;
  }
  auto model = load_builtin(source);
  if (descriptor) {
    *descriptor = {model->kind(), source, model->num_classes(), model->input_shape()};
  }
  return model;
}

}  // namespace proa
