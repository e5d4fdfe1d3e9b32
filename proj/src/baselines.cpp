#include "proa/baselines.hpp"

#include <algorithm>
#include <chrono>

#include "proa/errors.hpp"
#include "proa/stats.hpp"

namespace proa::baselines {

namespace {

constexpr std::size_t kChunk = 256;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Applies every theta, predicts in chunks, and reports how many kept the
// clean argmax.
EmpiricalResult count_preserved(const Classifier& classifier, const ImageTensor& image,
                                std::size_t label, const perturb::PerturbationSpec& spec,
                                const std::vector<perturb::ThetaSample>& thetas) {
  EmpiricalResult r;
  const auto clean = classifier.predict(image);
  r.clean_correct = argmax(clean) == label;
  if (!r.clean_correct) return r;
  const std::size_t clean_label = argmax(clean);
  std::vector<ImageTensor> batch;
  for (std::size_t start = 0; start < thetas.size(); start += kChunk) {
    const std::size_t end = std::min(thetas.size(), start + kChunk);
    batch.clear();
    for (std::size_t i = start; i < end; ++i) batch.push_back(perturb::apply(spec, thetas[i], image));
    for (const auto& p : classifier.predict_batch(batch)) {
      ++r.evaluated;
      if (argmax(p) == clean_label) ++r.preserved;
    }
  }
  return r;
}

}  // namespace

VerifyOutcome ac_certify(const Classifier& classifier, const ImageTensor& image, std::size_t label,
                         const perturb::PerturbationSpec& spec, std::size_t n_fixed, double tau,
                         double delta, std::uint64_t seed, std::uint64_t key) {
  if (n_fixed < 1) throw ConfigError("ac_certify: n_fixed must be at least 1");
  stats::ConfidenceParams{delta, tau}.validate();
  spec.validate();
  const auto start = std::chrono::steady_clock::now();

  const MarginContext ctx = margin_context(classifier.predict(image), label);
  VerifyOutcome out;
  out.margin_d = ctx.d;
  if (!ctx.hit) {
    out.verdict = Verdict::Misclassified;
    out.wall_time = seconds_since(start);
    return out;
  }

  std::uint64_t stable = 0;
  std::vector<ImageTensor> batch;
  for (std::size_t first = 0; first < n_fixed; first += kChunk) {
    const std::size_t end = std::min(n_fixed, first + kChunk);
    batch.clear();
    for (std::size_t i = first; i < end; ++i) {
      auto stream = sample_stream(seed, key, i);
      batch.push_back(perturb::apply(spec, perturb::sample_theta(spec, stream), image));
    }
    for (const auto& pf : classifier.predict_batch(batch)) {
      stable += stability_indicator(ctx.p, pf, ctx.d) ? 1 : 0;
    }
  }

  const auto ci = stats::agresti_coull_interval(stable, n_fixed, delta);
  out.mu_hat = (ci.lower + ci.upper) / 2.0;
  out.epsilon = (ci.upper - ci.lower) / 2.0;
  out.samples_used = n_fixed;
  switch (stats::hypothesis_decision(out.mu_hat, out.epsilon, tau)) {
    case stats::TestVerdict::CertifiedHolds: out.verdict = Verdict::Certified; break;
    case stats::TestVerdict::CertifiedViolated: out.verdict = Verdict::Violated; break;
    case stats::TestVerdict::Undecided: out.verdict = Verdict::Undetermined; break;
  }
  out.wall_time = seconds_since(start);
  return out;
}

VerifyOutcome ac_certify(const Classifier& classifier, const ImageTensor& image, std::size_t label,
                         const perturb::PerturbationSpec& spec, std::size_t n_fixed, double tau,
                         double delta, std::uint64_t seed) {
  return ac_certify(classifier, image, label, spec, n_fixed, tau, delta, seed, content_key(image));
}

std::vector<perturb::ThetaSample> grid_points(const perturb::PerturbationSpec& spec,
                                              std::size_t points_per_dim) {
  if (points_per_dim < 2) throw ConfigError("grid needs at least 2 points per dimension");
  spec.validate();
  const std::size_t dims = spec.box.size();
  std::size_t total = 1;
  for (std::size_t d = 0; d < dims; ++d) total *= points_per_dim;

  std::vector<perturb::ThetaSample> out;
  out.reserve(total);
  std::vector<double> v(dims);
  const double steps = static_cast<double>(points_per_dim - 1);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    for (std::size_t d = 0; d < dims; ++d) {
      const std::size_t idx = rest % points_per_dim;
      rest /= points_per_dim;
      const auto& r = spec.box[d];
      v[d] = idx + 1 == points_per_dim ? r.high
                                       : r.low + (r.high - r.low) * static_cast<double>(idx) / steps;
    }
    out.emplace_back(std::span<const double>(v));
  }
  return out;
}

EmpiricalResult grid_search(const Classifier& classifier, const ImageTensor& image, std::size_t label,
                            const perturb::PerturbationSpec& spec, std::size_t points_per_dim) {
  return count_preserved(classifier, image, label, spec, grid_points(spec, points_per_dim));
}

bool grid_accuracy(const Classifier& classifier, const ImageTensor& image, std::size_t label,
                   const perturb::PerturbationSpec& spec, std::size_t points_per_dim) {
  return grid_search(classifier, image, label, spec, points_per_dim).robust();
}

EmpiricalResult random_search(const Classifier& classifier, const ImageTensor& image, std::size_t label,
                              const perturb::PerturbationSpec& spec, std::size_t n_random,
                              RandomStream& stream) {
  if (n_random < 1) throw ConfigError("random search needs at least 1 sample");
  spec.validate();
  std::vector<perturb::ThetaSample> thetas;
  thetas.reserve(n_random);
  for (std::size_t i = 0; i < n_random; ++i) thetas.push_back(perturb::sample_theta(spec, stream));
  return count_preserved(classifier, image, label, spec, thetas);
}

bool random_accuracy(const Classifier& classifier, const ImageTensor& image, std::size_t label,
                     const perturb::PerturbationSpec& spec, std::size_t n_random, RandomStream& stream) {
  return random_search(classifier, image, label, spec, n_random, stream).robust();
}

VerifyOutcome to_outcome(const EmpiricalResult& r) {
  VerifyOutcome out;
  out.samples_used = r.evaluated;
  if (!r.clean_correct) {
    out.verdict = Verdict::Misclassified;
    return out;
  }
  out.mu_hat = r.evaluated == 0 ? 1.0
                                : static_cast<double>(r.preserved) / static_cast<double>(r.evaluated);
  out.verdict = r.robust() ? Verdict::Certified : Verdict::Violated;
  return out;
}

}  // namespace proa::baselines
