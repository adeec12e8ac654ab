// Copyright 2026 The gsclip Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Two-sample t-tests and the special functions behind the Student-t tail.
// Everything here is a pure function of its arguments.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>

#include "gsclip/error.hpp"

namespace gsclip::stats {

inline constexpr int kBetaCfMaxIterations = 300;
inline constexpr double kBetaCfTolerance = 1e-14;
inline constexpr double kDegenerateVariance = 1e-24;

/// Smallest p-value ever reported; results that underflow are clamped here.
inline constexpr double kMinPValue = std::numeric_limits<double>::min();

/// ln Γ(x) for x > 0 (Lanczos, g = 7, 9 terms; reflection below 0.5).
inline double ln_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw Error(ErrorCode::DomainError, "ln_gamma requires x > 0, got " + std::to_string(x));
  }
  static constexpr std::array<double, 9> kCoef = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    // Γ(x)Γ(1−x) = π / sin(πx)
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - ln_gamma(1.0 - x);
  }
  const double z = x - 1.0;
  double series = kCoef[0];
  for (std::size_t i = 1; i < kCoef.size(); ++i) series += kCoef[i] / (z + static_cast<double>(i));
  const double t = z + 7.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(series);
}

namespace detail {

// Continued fraction for I_x(a,b), modified Lentz.
inline double beta_continued_fraction(double x, double a, double b) {
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kBetaCfMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kBetaCfTolerance) return h;
  }
  throw Error(ErrorCode::ConvergenceFailure,
              "incomplete beta continued fraction did not converge in " +
                  std::to_string(kBetaCfMaxIterations) + " iterations (x=" + std::to_string(x) +
                  ", a=" + std::to_string(a) + ", b=" + std::to_string(b) + ")");
}

// I_x(a,b) given both x and y = 1 − x, so callers that know y exactly avoid
// the cancellation in 1 − x.
inline double reg_inc_beta(double x, double y, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front =
      ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * std::log(x) + b * std::log(y);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(x, a, b) / a;
  }
  return 1.0 - front * beta_continued_fraction(y, b, a) / b;
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double reg_inc_beta(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0) || !(a > 0.0) || !(b > 0.0) || !std::isfinite(a) ||
      !std::isfinite(b)) {
    throw Error(ErrorCode::DomainError, "reg_inc_beta requires x in [0,1], a > 0, b > 0");
  }
  return detail::reg_inc_beta(x, 1.0 - x, a, b);
}

/// 2·P(T ≥ |t|) for T ~ Student-t(df), clamped to [kMinPValue, 1].
inline double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0) || std::isnan(df)) {
    throw Error(ErrorCode::DomainError, "degrees of freedom must be > 0, got " + std::to_string(df));
  }
  if (std::isnan(t)) throw Error(ErrorCode::DomainError, "t statistic is NaN");
  if (t == 0.0) return 1.0;
  if (std::isinf(t)) return kMinPValue;
  const double t2 = t * t;
  double p;
  if (std::isinf(t2)) {
    p = 0.0;
  } else if (std::isinf(df)) {
    p = std::erfc(std::fabs(t) / std::numbers::sqrt2);
  } else {
    const double denom = df + t2;
    p = detail::reg_inc_beta(df / denom, t2 / denom, 0.5 * df, 0.5);
  }
  if (!(p >= kMinPValue)) return kMinPValue;
  return p > 1.0 ? 1.0 : p;
}

enum class TTestKind { welch, student };

struct TTestResult {
  double t_stat = 0.0;
  double df = 0.0;
  double p_two_sided = 1.0;
  // Both samples were (numerically) constant; see welch_t_test.
  bool degenerate_variance = false;
};

struct SampleSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // Bessel-corrected
};

/// Mean and unbiased variance, two passes in index order.
inline SampleSummary summarize(std::span<const double> xs) {
  SampleSummary s;
  s.n = xs.size();
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n < 2) return s;
  double ss = 0.0;
  for (double x : xs) {
    const double d = x - s.mean;
    ss += d * d;
  }
  s.variance = ss / static_cast<double>(s.n - 1);
  return s;
}

/// t-test from precomputed summaries. Swapping the two summaries negates t
/// and leaves df and p bit-identical.
inline TTestResult t_test(const SampleSummary& a, const SampleSummary& b,
                          TTestKind kind = TTestKind::welch) {
  if (a.n < 2 || b.n < 2) {
    throw Error(ErrorCode::InsufficientSamples, "t-test needs at least 2 values per sample, got " +
                                                    std::to_string(a.n) + " and " +
                                                    std::to_string(b.n));
  }
  const double n = static_cast<double>(a.n);
  const double m = static_cast<double>(b.n);
  TTestResult r;

  if (a.variance < kDegenerateVariance && b.variance < kDegenerateVariance) {
    r.df = n + m - 2.0;
    if (a.mean == b.mean) {
      r.t_stat = 0.0;
      r.p_two_sided = 1.0;
    } else {
      r.t_stat = a.mean > b.mean ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
      r.p_two_sided = kMinPValue;
      r.degenerate_variance = true;
    }
    return r;
  }

  if (kind == TTestKind::welch) {
    const double ea = a.variance / n;
    const double eb = b.variance / m;
    const double se2 = ea + eb;
    r.t_stat = (a.mean - b.mean) / std::sqrt(se2);
    r.df = (se2 * se2) / (ea * ea / (n - 1.0) + eb * eb / (m - 1.0));
  } else {
    r.df = n + m - 2.0;
    const double pooled = ((n - 1.0) * a.variance + (m - 1.0) * b.variance) / r.df;
    r.t_stat = (a.mean - b.mean) / std::sqrt(pooled * (1.0 / n + 1.0 / m));
  }
  r.p_two_sided = student_t_two_sided_p(r.t_stat, r.df);
  return r;
}

/// Two-sided two-sample t-test, Welch's unequal-variance form by default.
/// When both sample variances fall below 1e-24 the test is degenerate: equal
/// means give t = 0, p = 1; otherwise t = ±inf, p = kMinPValue and the
/// degenerate_variance flag is set. df is n + m − 2 in both cases.
inline TTestResult welch_t_test(std::span<const double> a, std::span<const double> b,
                                TTestKind kind = TTestKind::welch) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::InsufficientSamples, "t-test needs at least 2 values per sample, got " +
                                                    std::to_string(a.size()) + " and " +
                                                    std::to_string(b.size()));
  }
  for (std::span<const double> s : {a, b}) {
    for (double x : s) {
      if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteValue, "t-test input is not finite");
    }
  }
  return t_test(summarize(a), summarize(b), kind);
}

}  // namespace gsclip::stats
