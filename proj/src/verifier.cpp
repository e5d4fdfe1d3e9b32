#include "proa/verifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>

#include "proa/errors.hpp"
#include "proa/parallel.hpp"
#include "proa/rng.hpp"

namespace proa {

void VerifyConfig::validate() const {
  if (!(tau >= 0.0 && tau < 1.0)) throw ConfigError("tau must lie in [0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
  if (n0 < 1) throw ConfigError("n0 must be at least 1");
  if (n0 > n_max) throw ConfigError("n0 must not exceed n_max");
}

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Certified: return "certified";
    case Verdict::Violated: return "violated";
    case Verdict::Undetermined: return "undetermined";
    case Verdict::Misclassified: return "misclassified";
  }
  return "?";
}

double margin(std::span<const double> p) {
  if (p.size() < 2) throw DomainError("margin needs at least two classes");
  double first = -std::numeric_limits<double>::infinity();
  double second = first;
  for (double v : p) {
    if (v > first) {
      second = first;
      first = v;
    } else if (v > second) {
      second = v;
    }
  }
  return (first - second) / 2.0;
}

MarginContext margin_context(ProbVector p, std::size_t label) {
  MarginContext ctx;
  ctx.d = margin(p);
  ctx.hit = argmax(p) == label;
  ctx.p = std::move(p);
  return ctx;
}

bool stability_indicator(std::span<const double> p, std::span<const double> p_f, double d) {
  if (p.size() != p_f.size()) {
    throw ShapeError("stability_indicator: " + std::to_string(p.size()) + " vs " +
                     std::to_string(p_f.size()) + " classes");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) worst = std::max(worst, std::abs(p[k] - p_f[k]));
  return worst < d;
}

VerifyOutcome certify(const Classifier& classifier, const ImageTensor& image, std::size_t label,
                      const perturb::PerturbationSpec& spec, const VerifyConfig& config,
                      std::uint64_t key) {
  config.validate();
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  const MarginContext ctx = margin_context(classifier.predict(image), label);
  VerifyOutcome out;
  out.margin_d = ctx.d;
  if (!ctx.hit) {
    out.verdict = Verdict::Misclassified;
    out.wall_time = elapsed();
    return out;
  }

  stats::SequentialTest test({config.delta, config.tau});
  std::vector<ImageTensor> batch(config.n0);
  std::uint64_t drawn = 0;
  while (drawn + config.n0 <= config.n_max) {
    for (std::size_t i = 0; i < config.n0; ++i) {
      auto stream = sample_stream(config.seed, key, drawn + i);
      batch[i] = perturb::apply(spec, perturb::sample_theta(spec, stream), image);
    }
    const auto probs = classifier.predict_batch(batch);
    std::uint64_t stable = 0;
    for (const auto& pf : probs) stable += stability_indicator(ctx.p, pf, ctx.d) ? 1 : 0;
    drawn += config.n0;

    const auto decision = test.update(stable, config.n0);
    if (decision != stats::TestVerdict::Undecided) {
      out.verdict = decision == stats::TestVerdict::CertifiedHolds ? Verdict::Certified
                                                                    : Verdict::Violated;
      break;
    }
  }
  out.mu_hat = test.mu_hat();
  out.epsilon = test.epsilon();
  out.samples_used = test.samples();
  out.wall_time = elapsed();
  return out;
}

VerifyOutcome certify(const Classifier& classifier, const ImageTensor& image, std::size_t label,
                      const perturb::PerturbationSpec& spec, const VerifyConfig& config) {
  return certify(classifier, image, label, spec, config, content_key(image));
}

std::uint64_t image_key(const LabeledImage& item) noexcept {
  return item.id.empty() ? content_key(item.image) : fnv1a64(item.id);
}

void VerdictCounts::add(const ImageResult& r) noexcept {
  if (!r.ok()) {
    ++failed;
    return;
  }
  switch (r.outcome.verdict) {
    case Verdict::Certified: ++certified; break;
    case Verdict::Violated: ++violated; break;
    case Verdict::Undetermined: ++undetermined; break;
    case Verdict::Misclassified: ++misclassified; break;
  }
}

double DatasetSummary::certified_accuracy() const noexcept {
  const auto n = counts.evaluated();
  return n == 0 ? 0.0 : static_cast<double>(counts.certified) / static_cast<double>(n);
}

DatasetSummary certify_dataset(const Classifier& classifier, std::span<const LabeledImage> dataset,
                               const perturb::PerturbationSpec& spec, const VerifyConfig& config,
                               std::size_t workers) {
  if (dataset.empty()) throw DatasetError("certify_dataset: empty dataset");
  config.validate();
  spec.validate();
  if (!classifier.concurrent_safe()) workers = 1;

  DatasetSummary summary;
  summary.results.resize(dataset.size());
  parallel_for(dataset.size(), workers, [&](std::size_t i) {
    const auto& item = dataset[i];
    auto& slot = summary.results[i];
    slot.id = item.id;
    try {
      slot.outcome = certify(classifier, item.image, item.label, spec, config, image_key(item));
    } catch (const std::exception& e) {
      slot.error = e.what();
      if (slot.error.empty()) slot.error = "unknown error";
    }
  });
  for (const auto& r : summary.results) summary.counts.add(r);
  return summary;
}

}  // namespace proa
