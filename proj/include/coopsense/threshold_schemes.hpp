// ============================================================================
// threshold_schemes.hpp -- enhanced energy-detection schemes
//
//   Fixed             Y normalized by the nominal variance.
//   TwoStep           Y evaluated at both ends of the variance bracket; the
//                     resulting interval is compared with gamma and only an
//                     interval straddling gamma is re-decided with GammaPrime.
//   GammaPrime        Y normalized by the estimated noise expectation E(sigma^2).
//   GammaDoublePrime  Y normalized by the smallest weighted window average
//                     min_i sum_t mu_{t-i}^g E_t / sum_t mu_{t-i}^g of the
//                     per-component expectations.
//
// The interval reading of TwoStep is a reconstruction: the statistic is
// evaluated at the extreme admissible noise variances, which gives the
// least-upper / greatest-lower bounds that the comparison needs.
// ============================================================================
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coopsense/core.hpp"
#include "coopsense/detector.hpp"
#include "coopsense/noise_model.hpp"

namespace coopsense {

enum class SchemeKind { Fixed, TwoStep, GammaPrime, GammaDoublePrime };

[[nodiscard]] constexpr const char* to_string(SchemeKind s) noexcept {
  switch (s) {
    case SchemeKind::Fixed: return "fixed";
    case SchemeKind::TwoStep: return "two_step";
    case SchemeKind::GammaPrime: return "gamma_prime";
    case SchemeKind::GammaDoublePrime: return "gamma_double_prime";
  }
  return "?";
}

[[nodiscard]] inline std::optional<SchemeKind> scheme_from_string(std::string_view s) {
  if (s == "fixed") return SchemeKind::Fixed;
  if (s == "two_step") return SchemeKind::TwoStep;
  if (s == "gamma_prime") return SchemeKind::GammaPrime;
  if (s == "gamma_double_prime") return SchemeKind::GammaDoublePrime;
  return std::nullopt;
}

struct SchemeConfig {
  SchemeKind kind = SchemeKind::Fixed;
  std::vector<double> weights;  ///< mu, GammaDoublePrime only
  int exponent = 1;             ///< g, GammaDoublePrime only
};

inline void validate(const SchemeConfig& s) {
  if (s.exponent < 1) throw domain_error("scheme: exponent g must be >= 1");
  for (double w : s.weights) {
    if (!(std::isfinite(w) && w > 0.0)) throw domain_error("scheme: weights must be > 0");
  }
}

/// mu_j = ratio^j, j = 0..length-1.
[[nodiscard]] inline std::vector<double> geometric_weights(std::size_t length, double ratio) {
  if (!(std::isfinite(ratio) && ratio > 0.0)) throw domain_error("geometric weights: ratio must be > 0");
  std::vector<double> w(length);
  double v = 1.0;
  for (auto& x : w) {
    x = v;
    v *= ratio;
  }
  return w;
}

struct StatisticInterval {
  double low = 0.0;
  double high = 0.0;
};

enum class IntervalOutcome { H0, H1, Indeterminate };

struct IntervalDecision {
  IntervalOutcome outcome = IntervalOutcome::Indeterminate;
  double statistic_low = 0.0;
  double statistic_high = 0.0;
};

namespace detail {

inline double energy_sum(std::span<const double> energies) {
  if (energies.empty()) throw domain_error("no energies supplied");
  double s = 0.0;
  for (double e : energies) {
    if (!(std::isfinite(e) && e >= 0.0)) throw domain_error("energies must be finite and >= 0");
    s += e;
  }
  return s;
}

inline void require_k(std::size_t k) {
  if (k < 1) throw domain_error("k must be >= 1");
}

}  // namespace detail

/// Statistic evaluated at the worst-case (high) and best-case (low) variance.
[[nodiscard]] inline StatisticInterval statistic_interval(std::span<const double> energies,
                                                          const VarianceBracket& bracket, std::size_t k) {
  validate(bracket);
  detail::require_k(k);
  const double e = detail::energy_sum(energies);
  const double kk = static_cast<double>(k);
  return {e / (kk * bracket.high), e / (kk * bracket.low)};
}

[[nodiscard]] inline IntervalDecision two_step_decide(StatisticInterval interval, double gamma) {
  IntervalDecision d{IntervalOutcome::Indeterminate, interval.low, interval.high};
  if (interval.low >= gamma) {
    d.outcome = IntervalOutcome::H1;
  } else if (interval.high < gamma) {
    d.outcome = IntervalOutcome::H0;
  }
  return d;
}

[[nodiscard]] inline EnergyStatistic gamma_prime_statistic(std::span<const double> energies, double expected_variance,
                                                           std::size_t k) {
  if (!(std::isfinite(expected_variance) && expected_variance > 0.0)) {
    throw domain_error("gamma_prime_statistic: expected variance must be > 0");
  }
  detail::require_k(k);
  return EnergyStatistic{detail::energy_sum(energies) / (static_cast<double>(k) * expected_variance)};
}

/// min over circular offsets i of sum_t mu_{(t-i) mod L}^g E_t / sum_t mu^g.
[[nodiscard]] inline double convex_noise_level(std::span<const double> expectations, std::span<const double> weights,
                                               int g) {
  if (expectations.size() != weights.size()) throw domain_error("weights and expectations differ in length");
  if (expectations.empty()) throw domain_error("no noise expectations supplied");
  if (g < 1) throw domain_error("exponent g must be >= 1");
  const std::size_t L = expectations.size();
  std::vector<double> powered(L);
  double denom = 0.0;
  for (std::size_t j = 0; j < L; ++j) {
    if (!(std::isfinite(weights[j]) && weights[j] > 0.0)) throw domain_error("weights must be > 0");
    if (!(std::isfinite(expectations[j]) && expectations[j] > 0.0)) throw domain_error("expectations must be > 0");
    powered[j] = std::pow(weights[j], g);
    denom += powered[j];
  }
  double best = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    double num = 0.0;
    for (std::size_t t = 0; t < L; ++t) num += powered[(t + L - i) % L] * expectations[t];
    const double level = num / denom;
    if (i == 0 || level < best) best = level;
  }
  return best;
}

[[nodiscard]] inline EnergyStatistic gamma_double_prime_statistic(std::span<const double> energies,
                                                                  std::span<const double> noise_expectations,
                                                                  std::span<const double> weights, int g,
                                                                  std::size_t k) {
  detail::require_k(k);
  const double level = convex_noise_level(noise_expectations, weights, g);
  return EnergyStatistic{detail::energy_sum(energies) / (static_cast<double>(k) * level)};
}

/// Mean of per-component expectations, summed in index order.
[[nodiscard]] inline double mean_expectation(std::span<const double> expectations) {
  if (expectations.empty()) throw domain_error("no noise expectations supplied");
  double s = 0.0;
  for (double e : expectations) s += e;
  return s / static_cast<double>(expectations.size());
}

/// Raised by decide_enhanced when the context lacks what the scheme needs.
class missing_context_error : public std::invalid_argument {
public:
  explicit missing_context_error(const std::string& field)
      : std::invalid_argument("observation context is missing '" + field + "'"), field_{field} {}
  [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

// Everything a scheme may need for one SU decision.
struct ObservationContext {
  std::span<const double> energies;          ///< energy terms summed into the statistic
  std::size_t k = 0;                         ///< normalization count
  double gamma = 0.0;                        ///< threshold on the Y scale
  std::optional<double> nominal_variance;    ///< Fixed
  std::optional<VarianceBracket> bracket;    ///< TwoStep
  std::optional<double> expected_variance;   ///< TwoStep (second step), GammaPrime
  std::span<const double> noise_expectations;  ///< GammaDoublePrime
};

struct EnhancedDecision {
  Hypothesis decision = Hypothesis::H0;
  int steps = 1;
};

[[nodiscard]] inline EnhancedDecision decide_enhanced(const SchemeConfig& scheme, const ObservationContext& ctx) {
  if (ctx.energies.empty()) throw missing_context_error("energies");
  if (ctx.k == 0) throw missing_context_error("k");

  auto gamma_prime = [&] {
    if (!ctx.expected_variance) throw missing_context_error("expected_variance");
    return decide(gamma_prime_statistic(ctx.energies, *ctx.expected_variance, ctx.k), ctx.gamma);
  };

  switch (scheme.kind) {
    case SchemeKind::Fixed: {
      if (!ctx.nominal_variance) throw missing_context_error("nominal_variance");
      const double e = detail::energy_sum(ctx.energies);
      if (!(*ctx.nominal_variance > 0.0)) throw domain_error("nominal variance must be > 0");
      return {decide(EnergyStatistic{e / (static_cast<double>(ctx.k) * *ctx.nominal_variance)}, ctx.gamma), 1};
    }
    case SchemeKind::TwoStep: {
      if (!ctx.bracket) throw missing_context_error("bracket");
      const auto first = two_step_decide(statistic_interval(ctx.energies, *ctx.bracket, ctx.k), ctx.gamma);
      if (first.outcome == IntervalOutcome::H1) return {Hypothesis::H1, 1};
      if (first.outcome == IntervalOutcome::H0) return {Hypothesis::H0, 1};
      return {gamma_prime(), 2};
    }
    case SchemeKind::GammaPrime:
      return {gamma_prime(), 1};
    case SchemeKind::GammaDoublePrime: {
      if (ctx.noise_expectations.empty()) throw missing_context_error("noise_expectations");
      if (scheme.weights.size() != ctx.noise_expectations.size()) {
        throw domain_error("scheme weights and noise expectations differ in length");
      }
      return {decide(gamma_double_prime_statistic(ctx.energies, ctx.noise_expectations, scheme.weights,
                                                  scheme.exponent, ctx.k),
                     ctx.gamma),
              1};
    }
  }
  throw domain_error("unknown scheme");
}

}  // namespace coopsense
