#include "proa/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "proa/errors.hpp"

namespace proa::stats {

void ConfidenceParams::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw DomainError("delta must lie in (0,1), got " + std::to_string(delta));
  }
  if (!(tau >= 0.0 && tau < 1.0)) {
    throw DomainError("tau must lie in [0,1), got " + std::to_string(tau));
  }
}

const char* to_string(TestVerdict v) noexcept {
  switch (v) {
    case TestVerdict::CertifiedHolds: return "holds";
    case TestVerdict::CertifiedViolated: return "violated";
    case TestVerdict::Undecided: return "undecided";
  }
  return "?";
}

double adaptive_epsilon_unchecked(double delta, std::uint64_t n) {
  if (n == 0) throw DomainError("adaptive_epsilon requires n >= 1");
  const double nn = static_cast<double>(n);
  const double inner = std::log(nn) / std::log(kBaseC) + 1.0;
  const double numerator =
      kShapeA * std::log(inner) + kTailCoefficient * std::log(kTailNumerator / delta);
  return std::sqrt(numerator / nn);
}

BoundValue adaptive_epsilon(double delta, std::uint64_t n) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw DomainError("adaptive_epsilon: delta must lie in (0,1), got " + std::to_string(delta));
  }
  return {adaptive_epsilon_unchecked(delta, n), n};
}

BoundValue adaptive_epsilon(const ConfidenceParams& params, std::uint64_t n) {
  params.validate();
  return adaptive_epsilon(params.delta, n);
}

BoundValue hoeffding_epsilon(double delta, std::uint64_t n) {
  if (n == 0) throw DomainError("hoeffding_epsilon requires n >= 1");
  if (!(delta > 0.0 && delta <= 2.0)) {
    throw DomainError("hoeffding_epsilon: delta must lie in (0,2], got " + std::to_string(delta));
  }
  return {std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n))), n};
}

TestVerdict hypothesis_decision(double mu_hat, double epsilon, double tau) {
  if (mu_hat + tau - epsilon - 1.0 >= 0.0) return TestVerdict::CertifiedHolds;
  if (mu_hat + tau + epsilon - 1.0 < 0.0) return TestVerdict::CertifiedViolated;
  return TestVerdict::Undecided;
}

Interval agresti_coull_interval(std::uint64_t successes, std::uint64_t n, double alpha) {
  if (n == 0) throw DomainError("agresti_coull_interval requires n >= 1");
  if (successes > n) {
    throw DomainError("agresti_coull_interval: successes (" + std::to_string(successes) +
                      ") exceed n (" + std::to_string(n) + ")");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("agresti_coull_interval: alpha must lie in (0,1)");
  }
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = p + z2 / (2.0 * nn);
  const double spread = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  Interval out{(center - spread) / denom, (center + spread) / denom};
  out.lower = std::clamp(out.lower, 0.0, 1.0);
  out.upper = std::clamp(out.upper, 0.0, 1.0);
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace {

// Acklam's rational approximation, relative error ~1e-9 before refinement.
double quantile_lower_half(double p) {
  constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
  constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
  constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
  constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }

  // One Halley step on Phi(x) - p.
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("normal_quantile: p must lie in (0,1), got " + std::to_string(p));
  }
  if (p == 0.5) return 0.0;
  // 1 - p is exact for p >= 0.5, so the upper half reflects onto the lower.
  if (p > 0.5) return -quantile_lower_half(1.0 - p);
  return quantile_lower_half(p);
}

SequentialTest::SequentialTest(ConfidenceParams params)
    : params_(params), epsilon_(std::numeric_limits<double>::infinity()) {
  params_.validate();
}

TestVerdict SequentialTest::update(std::uint64_t successes, std::uint64_t count) {
  if (successes > count) throw DomainError("SequentialTest::update: successes exceed count");
  if (count == 0) return verdict_;
  samples_ += count;
  successes_ += successes;
  epsilon_ = adaptive_epsilon_unchecked(params_.delta, samples_);
  verdict_ = hypothesis_decision(mu_hat(), epsilon_, params_.tau);
  return verdict_;
}

double SequentialTest::mu_hat() const noexcept {
  if (samples_ == 0) return 0.0;
  return static_cast<double>(successes_) / static_cast<double>(samples_);
}

}  // namespace proa::stats
