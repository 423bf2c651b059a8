#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace groupanno {

/// Probability clamp applied to classifier outputs and posteriors before logs.
inline constexpr double kProbFloor = 1e-12;

inline double clamp(double x, double lo, double hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

/// Clamp into [kProbFloor, 1 - kProbFloor].
inline double clamp_prob(double p) { return clamp(p, kProbFloor, 1.0 - kProbFloor); }

/// Numerically stable logistic function.
inline double sigmoid(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// Inverse of sigmoid; requires p in (0, 1).
inline double logit(double p) { return std::log(p) - std::log1p(-p); }

/// Digamma (psi) function: d/dx ln Gamma(x), for x > 0.
///
/// Uses the recurrence psi(x) = psi(x+1) - 1/x to push the argument above 10,
/// then the asymptotic series psi(x) ~ ln x - 1/(2x) - sum B_{2k}/(2k x^{2k});
/// the truncation error of the series is below 1e-13 from there. Accurate to
/// ~1e-13 relative over the range used here (arguments >= 1e-4).
inline double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: argument must be positive");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli-number coefficients B_2/2, B_4/4, ... of the asymptotic expansion.
  result += std::log(x) - 0.5 * inv
          - inv2 * (1.0 / 12.0
          - inv2 * (1.0 / 120.0
          - inv2 * (1.0 / 252.0
          - inv2 * (1.0 / 240.0
          - inv2 * (1.0 / 132.0)))));
  return result;
}

namespace detail {

/// Continued-fraction for the regularized incomplete beta (Lentz's method).
/// Valid for x < (a+1)/(a+b+2); callers use the symmetry I_x(a,b)=1-I_{1-x}(b,a).
inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
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
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b), absolute accuracy ~1e-10.
inline double betainc(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("betainc: a, b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b)
                        + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::betacf(a, b, x) / a;
  }
  return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

/// Upper tail of the F distribution with (d1, d2) degrees of freedom:
/// P(F_{d1,d2} > f) = I_{d2/(d2 + d1 f)}(d2/2, d1/2).
inline double f_sf(double f, double d1, double d2) {
  if (f <= 0.0) return 1.0;
  return betainc(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f));
}

/// Log density of Beta(a, b) at x in (0, 1).
inline double log_beta_pdf(double x, double a, double b) {
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x)
       - (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

}  // namespace groupanno
