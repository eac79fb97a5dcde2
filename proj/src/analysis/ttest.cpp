#include "moodifier/analysis/ttest.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "moodifier/analysis/special_functions.hpp"
#include "moodifier/common/error.hpp"

namespace moodifier::analysis {

namespace {

struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double var = 0.0;  // sample variance (n - 1)
};

// Summation runs over sorted values so the result does not depend on input
// order, which keeps identical multisets bit-identical.
Moments moments(std::span<const double> x) {
  std::vector<double> v(x.begin(), x.end());
  for (double d : v) {
    if (!std::isfinite(d)) throw Error(Errc::NonFiniteValue, "sample contains a non-finite value");
  }
  std::sort(v.begin(), v.end());
  Moments m;
  m.n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double d : v) sum += d;
  m.mean = sum / m.n;
  double ss = 0.0;
  for (double d : v) ss += (d - m.mean) * (d - m.mean);
  m.var = ss / (m.n - 1.0);
  return m;
}

void require_size(std::span<const double> x, std::string_view what) {
  if (x.size() < 2) {
    throw Error(Errc::InsufficientData, fmt::format("{} needs at least 2 values, got {}", what, x.size()));
  }
}

}  // namespace

std::string_view to_string(TTestVariant v) {
  switch (v) {
    case TTestVariant::Welch: return "welch";
    case TTestVariant::Pooled: return "pooled";
    case TTestVariant::Paired: return "paired";
    case TTestVariant::OneSample: return "one_sample";
  }
  return "welch";
}

std::optional<TTestVariant> parse_variant(std::string_view text) {
  for (auto v : {TTestVariant::Welch, TTestVariant::Pooled, TTestVariant::Paired, TTestVariant::OneSample}) {
    if (to_string(v) == text) return v;
  }
  return std::nullopt;
}

TTestResult two_sample_t(std::span<const double> a, std::span<const double> b, TTestVariant variant) {
  if (variant != TTestVariant::Welch && variant != TTestVariant::Pooled) {
    throw Error(Errc::InvalidArgument, "two_sample_t takes the welch or pooled variant");
  }
  require_size(a, "first sample");
  require_size(b, "second sample");
  const auto ma = moments(a);
  const auto mb = moments(b);

  double se2 = 0.0;
  double dof = 0.0;
  if (variant == TTestVariant::Pooled) {
    dof = ma.n + mb.n - 2.0;
    const double sp2 = ((ma.n - 1.0) * ma.var + (mb.n - 1.0) * mb.var) / dof;
    se2 = sp2 * (1.0 / ma.n + 1.0 / mb.n);
  } else {
    const double va = ma.var / ma.n;
    const double vb = mb.var / mb.n;
    se2 = va + vb;
    dof = se2 * se2 / (va * va / (ma.n - 1.0) + vb * vb / (mb.n - 1.0));
  }
  if (!(se2 > 0.0)) {
    throw Error(Errc::DegenerateVariance, "both samples are constant; t is undefined");
  }
  TTestResult r;
  r.variant = variant;
  r.dof = dof;
  r.t = (ma.mean - mb.mean) / std::sqrt(se2);
  r.p = student_t_two_sided_p(r.t, dof);
  return r;
}

TTestResult one_sample_t(std::span<const double> x, double mu) {
  require_size(x, "sample");
  const auto m = moments(x);
  TTestResult r;
  r.variant = TTestVariant::OneSample;
  r.dof = m.n - 1.0;
  if (!(m.var > 0.0)) {
    if (m.mean == mu) {
      r.t = 0.0;
      r.p = 1.0;
      return r;
    }
    throw Error(Errc::DegenerateVariance, "constant sample away from the hypothesized mean");
  }
  r.t = (m.mean - mu) / std::sqrt(m.var / m.n);
  r.p = student_t_two_sided_p(r.t, r.dof);
  return r;
}

TTestResult paired_t(std::span<const double> pre, std::span<const double> post) {
  if (pre.size() != post.size()) {
    throw Error(Errc::LengthMismatch,
                fmt::format("paired samples differ in length ({} vs {})", pre.size(), post.size()));
  }
  std::vector<double> diff(pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) diff[i] = post[i] - pre[i];
  auto r = one_sample_t(diff, 0.0);
  r.variant = TTestVariant::Paired;
  return r;
}

}  // namespace moodifier::analysis
