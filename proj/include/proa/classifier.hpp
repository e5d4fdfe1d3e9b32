#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "proa/image.hpp"

namespace proa {

/// Class probabilities; entries in [0,1] summing to 1 within kSimplexTolerance.
using ProbVector = std::vector<double>;

inline constexpr double kSimplexTolerance = 1e-4;

/// Throws MalformedResponseError unless `p` has K >= 2 entries (and exactly
/// `expected_classes` when nonzero) that form a probability vector.
void check_simplex(std::span<const double> p, std::size_t expected_classes = 0);

std::size_t argmax(std::span<const double> p) noexcept;

/// Strictly black-box model: images in, probability vectors out.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::size_t num_classes() const = 0;
  virtual Shape input_shape() const = 0;

  /// One ProbVector per image, in order. Throws ShapeError when an image
  /// does not match input_shape().
  virtual std::vector<ProbVector> predict_batch(std::span<const ImageTensor> images) const = 0;

  /// Whether predict_batch may be invoked from several threads at once.
  virtual bool concurrent_safe() const { return true; }

  ProbVector predict(const ImageTensor& image) const;

 protected:
  void check_inputs(std::span<const ImageTensor> images) const;
};

enum class ModelKind { BuiltinLinear, BuiltinMLP, External };

const char* to_string(ModelKind kind) noexcept;

struct ModelDescriptor {
  ModelKind kind = ModelKind::BuiltinLinear;
  std::string source;
  std::size_t num_classes = 0;
  Shape input_shape;
};

struct DenseLayer {
  std::size_t rows = 0;  // outputs
  std::size_t cols = 0;  // inputs
  std::vector<float> weights;  // rows x cols, row-major
  std::vector<float> bias;     // rows
};

/// Fully connected network: ReLU between layers, softmax on the output.
/// A single layer is the linear (softmax regression) model.
class BuiltinNetwork final : public Classifier {
 public:
  BuiltinNetwork(Shape input_shape, std::vector<DenseLayer> layers);

  std::size_t num_classes() const override;
  Shape input_shape() const override { return input_shape_; }
  std::vector<ProbVector> predict_batch(std::span<const ImageTensor> images) const override;

  ModelKind kind() const noexcept;
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

 private:
  ProbVector forward(std::span<const double> input) const;

  Shape input_shape_;
  std::vector<DenseLayer> layers_;
};

/// .nnw container (little endian):
///   "PNNW" | u8 version=1 | u32 H W C | u32 K | u32 layer_count |
///   per layer: u32 rows, u32 cols, f32[rows*cols] weights, f32[rows] bias |
///   u32 CRC-32 of every preceding byte.
std::vector<unsigned char> encode_nnw(const BuiltinNetwork& net);
BuiltinNetwork decode_nnw(std::span<const unsigned char> bytes);
void save_builtin(const BuiltinNetwork& net, const std::filesystem::path& path);
std::unique_ptr<BuiltinNetwork> load_builtin(const std::filesystem::path& path);

struct ExternalOptions {
  std::chrono::milliseconds timeout{30'000};  // per batch
  int max_attempts = 3;                      // connection attempts per batch
};

/// Client for the newline-delimited JSON protocol. `address` is either
/// "tcp://host:port" or "stdio:<shell command>".
class ExternalClassifier final : public Classifier {
 public:
  explicit ExternalClassifier(std::string address, ExternalOptions options = {});
  ~ExternalClassifier() override;

  ExternalClassifier(const ExternalClassifier&) = delete;
  ExternalClassifier& operator=(const ExternalClassifier&) = delete;

  std::size_t num_classes() const override;
  Shape input_shape() const override;
  std::vector<ProbVector> predict_batch(std::span<const ImageTensor> images) const override;

  const std::string& address() const noexcept;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

/// Same contract as predict_batch on a freshly opened connection.
std::vector<ProbVector> external_predict(const std::string& address,
                                         std::span<const ImageTensor> images,
                                         ExternalOptions options = {});

/// Opens a model from a CLI-style source: a .nnw path, "tcp://..." or
/// "stdio:...". A nonempty PROA_ENDPOINT replaces the address of external
/// sources.
std::unique_ptr<Classifier> open_model(const std::string& source, ModelDescriptor* descriptor = nullptr);

bool is_external_source(const std::string& source) noexcept;

}  // namespace proa
