#pragma once

// Concentration bounds, the sequential two-sided test, and the
// Agresti-Coull interval used by the fixed-sample baseline.

#include <cstdint>

namespace proa::stats {

/// Shape constants of the adaptive Hoeffding envelope. The tail term uses
/// the published coefficient 1/1.8 and numerator 24 verbatim.
inline constexpr double kShapeA = 0.6;
inline constexpr double kBaseC = 1.1;
inline constexpr double kTailCoefficient = 1.0 / 1.8;
inline constexpr double kTailNumerator = 24.0;

struct ConfidenceParams {
  double delta = 1e-4;
  double tau = 0.05;

  /// Throws DomainError unless 0 < delta < 1 and 0 <= tau < 1.
  void validate() const;
};

struct BoundValue {
  double epsilon = 0.0;
  std::uint64_t n = 0;
};

enum class TestVerdict { CertifiedHolds, CertifiedViolated, Undecided };

const char* to_string(TestVerdict v) noexcept;

/// Anytime-valid half-width
///   eps(delta, n) = sqrt((0.6 ln(log_1.1 n + 1) + ln(24/delta) / 1.8) / n).
/// Requires n >= 1 and 0 < delta < 1.
BoundValue adaptive_epsilon(double delta, std::uint64_t n);
BoundValue adaptive_epsilon(const ConfidenceParams& params, std::uint64_t n);

/// Same formula without the delta range check. Only n >= 1 is enforced.
double adaptive_epsilon_unchecked(double delta, std::uint64_t n);

/// Fixed-n Hoeffding half-width sqrt(ln(2/delta) / (2n)), 0 < delta <= 2.
BoundValue hoeffding_epsilon(double delta, std::uint64_t n);

/// H0: mu + tau - eps - 1 >= 0  -> CertifiedHolds
/// H1: mu + tau + eps - 1 <  0  -> CertifiedViolated
TestVerdict hypothesis_decision(double mu_hat, double epsilon, double tau);

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
};

/// Two-sided 100(1-alpha)% interval for a binomial proportion obtained by
/// inverting the large-sample test, clamped to [0,1].
Interval agresti_coull_interval(std::uint64_t successes, std::uint64_t n, double alpha);

/// Standard normal CDF.
double normal_cdf(double x);

/// Inverse standard normal CDF; 0 < p < 1.
double normal_quantile(double p);

/// Running tally of the stability indicator plus the sequential decision.
class SequentialTest {
 public:
  explicit SequentialTest(ConfidenceParams params);

  /// Adds a batch of `count` indicators with `successes` ones, then
  /// re-evaluates the bound and the decision.
  TestVerdict update(std::uint64_t successes, std::uint64_t count);

  std::uint64_t samples() const noexcept { return samples_; }
  std::uint64_t successes() const noexcept { return successes_; }
  double mu_hat() const noexcept;
  double epsilon() const noexcept { return epsilon_; }
  TestVerdict verdict() const noexcept { return verdict_; }
  const ConfidenceParams& params() const noexcept { return params_; }

 private:
  ConfidenceParams params_;
  std::uint64_t samples_ = 0;
  std::uint64_t successes_ = 0;
  double epsilon_ = 0.0;
  TestVerdict verdict_ = TestVerdict::Undecided;
};

}  // namespace proa::stats
