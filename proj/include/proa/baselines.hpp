#pragma once

// Fixed-sample Agresti-Coull certification and the empirical Grid / Random
// adversaries. Grid and Random test argmax preservation with zero tolerance.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "proa/classifier.hpp"
#include "proa/perturb.hpp"
#include "proa/rng.hpp"
#include "proa/verifier.hpp"

namespace proa::baselines {

/// Draws exactly n_fixed perturbations (the same per-sample streams as
/// certify), counts stable samples and inverts the interval at alpha = delta.
/// Reported mu_hat / epsilon are the interval midpoint and half-width, so
/// the verdict equals hypothesis_decision(mu_hat, epsilon, tau).
VerifyOutcome ac_certify(const Classifier& classifier, const ImageTensor& image, std::size_t label,
                         const perturb::PerturbationSpec& spec, std::size_t n_fixed, double tau,
                         double delta, std::uint64_t seed, std::uint64_t image_key);

VerifyOutcome ac_certify(const Classifier& classifier, const ImageTensor& image, std::size_t label,
                         const perturb::PerturbationSpec& spec, std::size_t n_fixed, double tau,
                         double delta, std::uint64_t seed = 0);

struct EmpiricalResult {
  bool clean_correct = false;
  std::size_t evaluated = 0;  // parameter vectors tried
  std::size_t preserved = 0;  // of which kept the clean argmax

  /// Clean prediction correct and no tried parameter flipped it.
  bool robust() const noexcept { return clean_correct && preserved == evaluated; }
};

/// Regular Cartesian grid over the box, endpoints included.
std::vector<perturb::ThetaSample> grid_points(const perturb::PerturbationSpec& spec,
                                              std::size_t points_per_dim);

EmpiricalResult grid_search(const Classifier& classifier, const ImageTensor& image, std::size_t label,
                            const perturb::PerturbationSpec& spec, std::size_t points_per_dim);

bool grid_accuracy(const Classifier& classifier, const ImageTensor& image, std::size_t label,
                   const perturb::PerturbationSpec& spec, std::size_t points_per_dim);

EmpiricalResult random_search(const Classifier& classifier, const ImageTensor& image, std::size_t label,
                              const perturb::PerturbationSpec& spec, std::size_t n_random,
                              RandomStream& stream);

bool random_accuracy(const Classifier& classifier, const ImageTensor& image, std::size_t label,
                     const perturb::PerturbationSpec& spec, std::size_t n_random, RandomStream& stream);

/// Report form of an empirical result, scored at zero tolerance:
/// certified when robust, misclassified when the clean prediction is wrong,
/// violated otherwise. mu_hat is the preserved fraction, epsilon 0.
VerifyOutcome to_outcome(const EmpiricalResult& r);

}  // namespace proa::baselines
