#pragma once

// Adaptive certification of one (image, perturbation) pair and the
// dataset-level certified-accuracy harness.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "proa/classifier.hpp"
#include "proa/image.hpp"
#include "proa/perturb.hpp"
#include "proa/stats.hpp"

namespace proa {

struct VerifyConfig {
  double tau = 0.05;
  double delta = 1e-4;
  std::size_t n0 = 100;
  std::size_t n_max = 10'000;
  std::uint64_t seed = 0;

  /// Throws ConfigError unless 0 <= tau < 1, 0 < delta < 1, 1 <= n0 <= n_max.
  void validate() const;
};

enum class Verdict { Certified, Violated, Undetermined, Misclassified };

/// Lower-case report name: certified, violated, undetermined, misclassified.
const char* to_string(Verdict v) noexcept;

struct VerifyOutcome {
  Verdict verdict = Verdict::Undetermined;
  double mu_hat = 0.0;
  double epsilon = 0.0;
  std::uint64_t samples_used = 0;
  double margin_d = 0.0;
  double wall_time = 0.0;  // seconds
};

struct MarginContext {
  ProbVector p;
  double d = 0.0;
  bool hit = false;
};

/// Half the gap between the two largest entries.
double margin(std::span<const double> p);

MarginContext margin_context(ProbVector p, std::size_t label);

/// 1 iff max_k |p_k - p_f_k| < d. Throws ShapeError on a length mismatch.
bool stability_indicator(std::span<const double> p, std::span<const double> p_f, double d);

/// Runs the sequential test: batches of n0 fresh perturbations until the
/// hypothesis test decides or the next batch would exceed n_max. Sample i
/// draws its parameters from sample_stream(config.seed, image_key, i).
VerifyOutcome certify(const Classifier& classifier, const ImageTensor& image, std::size_t label,
                      const perturb::PerturbationSpec& spec, const VerifyConfig& config,
                      std::uint64_t image_key);

/// Keys the image by its content.
VerifyOutcome certify(const Classifier& classifier, const ImageTensor& image, std::size_t label,
                      const perturb::PerturbationSpec& spec, const VerifyConfig& config);

struct LabeledImage {
  std::string id;  // stable identity, e.g. the file name
  ImageTensor image;
  std::size_t label = 0;
};

/// FNV-1a of the id, or the content key when the id is empty.
std::uint64_t image_key(const LabeledImage& item) noexcept;

struct ImageResult {
  std::string id;
  VerifyOutcome outcome;
  std::string error;  // nonempty when evaluation failed

  bool ok() const noexcept { return error.empty(); }
};

struct VerdictCounts {
  std::size_t certified = 0;
  std::size_t violated = 0;
  std::size_t undetermined = 0;
  std::size_t misclassified = 0;
  std::size_t failed = 0;

  std::size_t evaluated() const noexcept { return certified + violated + undetermined + misclassified; }
  void add(const ImageResult& r) noexcept;
};

struct DatasetSummary {
  std::vector<ImageResult> results;  // dataset order
  VerdictCounts counts;

  /// certified / evaluated (failed images excluded from the denominator).
  double certified_accuracy() const noexcept;
};

/// Evaluates every image; `workers` > 1 fans images out to threads.
/// Per-image exceptions become failure records.
DatasetSummary certify_dataset(const Classifier& classifier, std::span<const LabeledImage> dataset,
                               const perturb::PerturbationSpec& spec, const VerifyConfig& config,
                               std::size_t workers = 1);

}  // namespace proa
