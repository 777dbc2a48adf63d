// ============================================================================
// specfun.hpp -- special functions behind the closed-form detection laws
//
//   log_gamma         ln Gamma(x), Lanczos approximation
//   reg_lower_gamma   P(u, x) = gamma(u, x) / Gamma(u)
//   reg_upper_gamma   Q(u, x) = Gamma(u, x) / Gamma(u)
//   marcum_q          generalized Marcum Q_u(a, b), real order u > 0
//   normal_quantile   inverse standard normal CDF
//
// Everything here is a pure function of its arguments.
// ============================================================================
#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "coopsense/core.hpp"

namespace coopsense {

/// Iteration budget shared by every series / continued fraction in this file.
inline constexpr int kMaxIterations = 10'000;
/// Relative size below which a series term is considered negligible.
inline constexpr double kTermTolerance = 1e-14;

/// ln Gamma(x) for x > 0.
[[nodiscard]] inline double log_gamma(double x) {
  detail::require(std::isfinite(x) && x > 0.0, "log_gamma: x must be finite and > 0");
  // Lanczos, g = 7, n = 9.
  static constexpr std::array<double, 9> kCoef = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr double kG = 7.0;
  if (x < 0.5) {
    // Gamma(x) = Gamma(x + 1) / x keeps the approximation in its accurate range.
    return log_gamma(x + 1.0) - std::log(x);
  }
  const double z = x - 1.0;
  double acc = kCoef[0];
  for (std::size_t i = 1; i < kCoef.size(); ++i) acc += kCoef[i] / (z + static_cast<double>(i));
  const double t = z + kG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(acc);
}

namespace detail {

struct GammaPair {
  double lower;  // P(u, x)
  double upper;  // Q(u, x)
};

inline void check_gamma_args(double u, double x, const char* who) {
  if (!(std::isfinite(u) && u > 0.0)) throw domain_error(std::string(who) + ": order must be finite and > 0");
  if (!(std::isfinite(x) && x >= 0.0)) throw domain_error(std::string(who) + ": x must be finite and >= 0");
}

// Series for P when x < u + 1, Lentz continued fraction for Q otherwise.
inline GammaPair incomplete_gamma(double u, double x) {
  if (x == 0.0) return {0.0, 1.0};
  const double log_prefactor = -x + u * std::log(x) - log_gamma(u);

  if (x < u + 1.0) {
    double ap = u;
    double del = 1.0 / u;
    double sum = del;
    for (int it = 0;; ++it) {
      if (it >= kMaxIterations) throw convergence_error("incomplete gamma series did not converge");
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * kTermTolerance) break;
    }
    const double p = std::exp(log_prefactor) * sum;
    return {p, 1.0 - p};
  }

  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - u;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1;; ++i) {
    if (i >= kMaxIterations) throw convergence_error("incomplete gamma continued fraction did not converge");
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - u);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kTermTolerance) break;
  }
  const double q = std::exp(log_prefactor) * h;
  return {1.0 - q, q};
}

}  // namespace detail

/// Regularized lower incomplete gamma P(u, x).
[[nodiscard]] inline Probability reg_lower_gamma(double u, double x) {
  detail::check_gamma_args(u, x, "reg_lower_gamma");
  return Probability::clamped(detail::incomplete_gamma(u, x).lower);
}

/// Regularized upper incomplete gamma Q(u, x) = Gamma(u, x) / Gamma(u).
[[nodiscard]] inline Probability reg_upper_gamma(double u, double x) {
  detail::check_gamma_args(u, x, "reg_upper_gamma");
  return Probability::clamped(detail::incomplete_gamma(u, x).upper);
}

/// Generalized Marcum Q-function of real order u > 0:
/// Q_u(a, b) = P(chi'^2_{2u}(a^2) > b^2).
///
/// Evaluated as the Poisson(a^2/2) mixture of Q(u + j, b^2/2). The sum starts
/// at the Poisson mode; the upper branch accumulates Q(u + j) upward and the
/// lower branch accumulates the complements P(u + j) downward, so both
/// recurrences only ever add positive terms.
[[nodiscard]] inline Probability marcum_q(double u, double a, double b) {
  if (!(std::isfinite(u) && u > 0.0)) throw domain_error("marcum_q: order must be finite and > 0");
  if (!(std::isfinite(a) && a >= 0.0)) throw domain_error("marcum_q: a must be finite and >= 0");
  if (!(std::isfinite(b) && b >= 0.0)) throw domain_error("marcum_q: b must be finite and >= 0");

  if (b == 0.0) return Probability{1.0};
  const double x = 0.5 * b * b;
  const double lambda = 0.5 * a * a;
  if (lambda == 0.0) return reg_upper_gamma(u, x);

  // Poisson tail mass below this is dropped; Q and P are bounded by 1.
  constexpr double kMassTolerance = 1e-17;
  const double j0 = std::floor(lambda);
  const double log_x = std::log(x);
  const double w0 = std::exp(-lambda + j0 * std::log(lambda) - log_gamma(j0 + 1.0));
  const auto mode = detail::incomplete_gamma(u + j0, x);
  // t(s) = x^s e^{-x} / Gamma(s + 1); Q(s + 1, x) = Q(s, x) + t(s).
  auto t_at = [&](double s) { return std::exp(s * log_x - x - log_gamma(s + 1.0)); };

  int iterations = 0;
  auto tick = [&] {
    if (++iterations > kMaxIterations) throw convergence_error("marcum_q: iteration budget exhausted");
  };

  // Upper branch, j >= j0.
  double upper_sum = w0 * mode.upper;
  double upper_mass = w0;
  {
    double w = w0;
    double q = mode.upper;
    double t = t_at(u + j0);
    for (double j = j0 + 1.0;; j += 1.0) {
      tick();
      q += t;
      w *= lambda / j;
      upper_mass += w;
      upper_sum += w * q;
      const double s = u + j;
      t = (t > 0.0) ? t * x / s : t_at(s);
      // Remaining Poisson mass is at most w * r / (1 - r), r = lambda / (j + 1).
      const double r = lambda / (j + 1.0);
      if (r < 1.0 && w * r / (1.0 - r) < kMassTolerance) break;
    }
  }

  // Lower branch, j < j0: Q = sum w_j (1 - P_j).
  double lower_mass = 0.0;
  double lower_p = 0.0;
  {
    double w = w0;
    double p = mode.lower;
    double t = 0.0;
    for (double j = j0 - 1.0; j >= 0.0; j -= 1.0) {
      tick();
      // P(s, x) = P(s + 1, x) + t(s); t(s) = t(s + 1) * (s + 1) / x.
      const double s = u + j;
      t = (t > 0.0) ? t * (s + 1.0) / x : t_at(s);
      p += t;
      w *= (j + 1.0) / lambda;
      lower_mass += w;
      lower_p += w * p;
      // Remaining mass below j is at most w * r / (1 - r), r = j / lambda.
      const double r = j / lambda;
      if (r < 1.0 && w * r / (1.0 - r) < kMassTolerance) break;
    }
  }

  // Every weight is w0 times exact ratios, so dividing by the accumulated
  // mass cancels the rounding in w0.
  return Probability::clamped((upper_sum + lower_mass - lower_p) / (upper_mass + lower_mass));
}

/// Standard normal CDF.
[[nodiscard]] inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// Inverse standard normal CDF for p in (0, 1). Wichura's AS 241 followed by
/// one Halley step against erfc.
[[nodiscard]] inline double normal_quantile(double p) {
  detail::require(p > 0.0 && p < 1.0, "normal_quantile: p must lie in (0,1)");

  auto poly = [](const std::array<double, 8>& c, double r) {
    double acc = c[7];
    for (int i = 6; i >= 0; --i) acc = acc * r + c[static_cast<std::size_t>(i)];
    return acc;
  };
  static constexpr std::array<double, 8> a = {
      3.3871328727963666080e0, 1.3314166789178437745e+2, 1.9715909503065514427e+3,
      1.3731693765509461125e+4, 4.5921953931549871457e+4, 6.7265770927008700853e+4,
      3.3430575583588128105e+4, 2.5090809287301226727e+3};
  static constexpr std::array<double, 8> b = {
      1.0, 4.2313330701600911252e+1, 6.8718700749205790830e+2, 5.3941960214247511077e+3,
      2.1213794301586595867e+4, 3.9307895800092710610e+4, 2.8729085735721942674e+4,
      5.2264952788528545610e+3};
  static constexpr std::array<double, 8> c = {
      1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr std::array<double, 8> d = {
      1.0, 2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9};
  static constexpr std::array<double, 8> e = {
      6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr std::array<double, 8> f = {
      1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15};

  const double q = p - 0.5;
  double z;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    z = q * poly(a, r) / poly(b, r);
  } else {
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    if (r <= 5.0) {
      r -= 1.6;
      z = poly(c, r) / poly(d, r);
    } else {
      r -= 5.0;
      z = poly(e, r) / poly(f, r);
    }
    if (q < 0.0) z = -z;
  }

  const double err = normal_cdf(z) - p;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  const double step = err / pdf;
  return z - step / (1.0 + 0.5 * z * step);
}

/// Two-sided standard normal quantile kappa with P(|Z| <= kappa) = confidence.
[[nodiscard]] inline double two_sided_quantile(double confidence) {
  detail::require(confidence > 0.0 && confidence < 1.0, "confidence must lie in (0,1)");
  return normal_quantile(0.5 * (1.0 + confidence));
}

}  // namespace coopsense
