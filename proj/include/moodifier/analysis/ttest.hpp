#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace moodifier::analysis {

enum class TTestVariant { Welch, Pooled, Paired, OneSample };

std::string_view to_string(TTestVariant v);
std::optional<TTestVariant> parse_variant(std::string_view text);

struct TTestResult {
  double t = 0.0;
  double dof = 0.0;
  double p = 1.0;  // two-sided
  TTestVariant variant = TTestVariant::Welch;
};

// Two-sample t-test, Welch (default) or pooled variance.
// Throws Error(InsufficientData) for fewer than 2 values on either side,
// Error(NonFiniteValue) for NaN/inf input, and Error(DegenerateVariance)
// when both samples are constant (the standard error is zero).
TTestResult two_sample_t(std::span<const double> a, std::span<const double> b,
                         TTestVariant variant = TTestVariant::Welch);

// One-sample t-test of the mean against `mu`. All values equal to `mu`
// yields t = 0, p = 1; any other constant sample throws
// Error(DegenerateVariance).
TTestResult one_sample_t(std::span<const double> x, double mu = 0.0);

// One-sample test on post[i] - pre[i]. Throws Error(LengthMismatch) for
// unequal lengths; otherwise as one_sample_t, with variant Paired.
TTestResult paired_t(std::span<const double> pre, std::span<const double> post);

}  // namespace moodifier::analysis
