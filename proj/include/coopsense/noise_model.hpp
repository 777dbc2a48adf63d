// ============================================================================
// noise_model.hpp -- complex Gaussian noise with an uncertain variance
//
// Covers three jobs:
//   * estimating the noise expectation E(sigma^2) = E(x x^H) - E(x) E(x^H)
//     from a component-by-observation sample matrix, averaged over components;
//   * bracketing the variance at a confidence level, optionally re-scaling
//     the half-width to a second (working) confidence level;
//   * drawing variances and circular complex Gaussian samples.
// ============================================================================
#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "coopsense/core.hpp"
#include "coopsense/random.hpp"
#include "coopsense/specfun.hpp"

namespace coopsense {

using Complex = std::complex<double>;

/// Smallest variance the library will normalize by.
inline constexpr double kVarianceFloor = 1e-12;

struct VarianceBracket {
  double low = 1.0;
  double high = 1.0;

  [[nodiscard]] bool degenerate() const noexcept { return low == high; }
  [[nodiscard]] bool contains(double v) const noexcept { return v >= low && v <= high; }
  [[nodiscard]] double midpoint() const noexcept { return 0.5 * (low + high); }
  [[nodiscard]] double width() const noexcept { return high - low; }
};

inline void validate(const VarianceBracket& b) {
  if (!(std::isfinite(b.low) && std::isfinite(b.high))) throw domain_error("variance bracket must be finite");
  if (!(b.low > 0.0)) throw domain_error("variance bracket low end must be > 0");
  if (!(b.low <= b.high)) throw domain_error("variance bracket must satisfy low <= high");
}

// Samples indexed by (component, observation): rows are the k signal
// components, columns the m observations (SUs or snapshots) of each.
class ComplexSampleMatrix {
public:
  ComplexSampleMatrix(std::size_t components, std::size_t observations, std::vector<Complex> entries)
      : components_{components}, observations_{observations}, entries_{std::move(entries)} {
    detail::require(components_ >= 1 && observations_ >= 1, "sample matrix needs k >= 1 and m >= 1");
    detail::require(entries_.size() == components_ * observations_, "sample matrix size does not match k*m");
    for (const auto& z : entries_) {
      detail::require(std::isfinite(z.real()) && std::isfinite(z.imag()), "sample matrix entries must be finite");
    }
  }

  [[nodiscard]] std::size_t components() const noexcept { return components_; }
  [[nodiscard]] std::size_t observations() const noexcept { return observations_; }

  [[nodiscard]] const Complex& operator()(std::size_t component, std::size_t observation) const {
    return entries_[component * observations_ + observation];
  }

  [[nodiscard]] std::span<const Complex> row(std::size_t component) const {
    return std::span<const Complex>(entries_).subspan(component * observations_, observations_);
  }

private:
  std::size_t components_;
  std::size_t observations_;
  std::vector<Complex> entries_;
};

/// Per-component variance E(x x^H) - E(x) E(x^H), with the unbiased m-1 divisor.
[[nodiscard]] inline std::vector<double> component_noise_expectations(const ComplexSampleMatrix& samples) {
  const std::size_t m = samples.observations();
  if (m < 2) throw domain_error("noise expectation needs at least 2 samples per component");
  std::vector<double> out;
  out.reserve(samples.components());
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t c = 0; c < samples.components(); ++c) {
    Complex mean{0.0, 0.0};
    double power = 0.0;
    for (const auto& z : samples.row(c)) {
      mean += z;
      power += std::norm(z);
    }
    mean *= inv_m;
    power *= inv_m;
    const double biased = power - std::norm(mean);
    const double v = biased * static_cast<double>(m) / static_cast<double>(m - 1);
    out.push_back(v > 0.0 ? v : 0.0);
  }
  return out;
}

/// E(sigma^2) averaged over every component (the 1/n averaging step).
[[nodiscard]] inline double estimate_noise_expectation(const ComplexSampleMatrix& samples) {
  const auto per_component = component_noise_expectations(samples);
  double sum = 0.0;
  for (double v : per_component) sum += v;
  return sum / static_cast<double>(per_component.size());
}

struct ConfidenceBracket {
  double kappa = 0.0;          ///< two-sided normal quantile at `confidence`
  double half_width = 0.0;     ///< kappa * sd / sqrt(n) * rescale
  VarianceBracket bracket;
};

/// Bracket [mean - kappa*sd/sqrt(n)*adj, mean + kappa*sd/sqrt(n)*adj].
///
/// Without `working_confidence` adj is 1. With it, adj is
/// kappa(working) / kappa(confidence): the half-width obtained at the
/// calibration confidence is rescaled to the working one.
[[nodiscard]] inline ConfidenceBracket confidence_bracket(double sample_mean, double sample_sd, std::size_t n,
                                                          double confidence,
                                                          std::optional<double> working_confidence = std::nullopt) {
  if (n < 2) throw domain_error("confidence_bracket: n must be >= 2");
  if (!(confidence > 0.0 && confidence < 1.0)) throw domain_error("confidence_bracket: confidence must lie in (0,1)");
  if (working_confidence && !(*working_confidence > 0.0 && *working_confidence < 1.0)) {
    throw domain_error("confidence_bracket: working confidence must lie in (0,1)");
  }
  if (!(std::isfinite(sample_mean) && sample_mean > 0.0)) throw domain_error("confidence_bracket: mean must be > 0");
  if (!(std::isfinite(sample_sd) && sample_sd >= 0.0)) throw domain_error("confidence_bracket: sd must be >= 0");

  ConfidenceBracket out;
  out.kappa = two_sided_quantile(confidence);
  double adj = 1.0;
  if (working_confidence) adj = two_sided_quantile(*working_confidence) / out.kappa;
  out.half_width = out.kappa * sample_sd / std::sqrt(static_cast<double>(n)) * adj;
  const double low = sample_mean - out.half_width;
  out.bracket = {low > kVarianceFloor ? low : kVarianceFloor, sample_mean + out.half_width};
  return out;
}

// Nominal variance plus the interval the true variance is believed to lie in.
class NoiseUncertaintyModel {
public:
  NoiseUncertaintyModel(double nominal_variance, double confidence, VarianceBracket bracket, std::size_t sample_count)
      : nominal_{nominal_variance}, confidence_{confidence}, bracket_{bracket}, sample_count_{sample_count} {
    validate(bracket_);
    if (!(std::isfinite(nominal_) && nominal_ > 0.0)) throw domain_error("nominal variance must be > 0");
    if (!(confidence_ > 0.0 && confidence_ < 1.0)) throw domain_error("confidence must lie in (0,1)");
    if (!(bracket_.low <= nominal_ && nominal_ <= bracket_.high)) {
      throw domain_error("nominal variance must lie inside the bracket");
    }
  }

  /// No uncertainty: the bracket collapses onto the nominal variance.
  [[nodiscard]] static NoiseUncertaintyModel exact(double nominal_variance) {
    return {nominal_variance, 0.99, {nominal_variance, nominal_variance}, 2};
  }

  /// Bracket built from calibration statistics via confidence_bracket().
  [[nodiscard]] static NoiseUncertaintyModel calibrated(double nominal_variance, double spread, std::size_t n,
                                                        double confidence,
                                                        std::optional<double> working_confidence = std::nullopt) {
    const auto cb = confidence_bracket(nominal_variance, spread, n, confidence, working_confidence);
    return {nominal_variance, confidence, cb.bracket, n};
  }

  [[nodiscard]] double nominal_variance() const noexcept { return nominal_; }
  [[nodiscard]] double confidence() const noexcept { return confidence_; }
  [[nodiscard]] const VarianceBracket& bracket() const noexcept { return bracket_; }
  [[nodiscard]] std::size_t sample_count() const noexcept { return sample_count_; }
  /// Mean of the variance draw distribution (uniform over the bracket).
  [[nodiscard]] double expected_variance() const noexcept { return bracket_.midpoint(); }

private:
  double nominal_;
  double confidence_;
  VarianceBracket bracket_;
  std::size_t sample_count_;
};

/// A variance drawn uniformly from the model's bracket.
template <typename Rng>
[[nodiscard]] double sample_noise_variance(const NoiseUncertaintyModel& model, Rng& rng) {
  const auto& b = model.bracket();
  if (b.degenerate()) {
    (void)rng();  // keep stream consumption independent of the bracket
    return b.low;
  }
  return b.low + b.width() * uniform01(rng);
}

/// Fills `out` with i.i.d. circular complex Gaussian samples of the given variance.
template <typename Rng>
void fill_noise(std::span<Complex> out, double variance, Rng& rng) {
  if (!(std::isfinite(variance) && variance > 0.0)) throw domain_error("noise variance must be > 0");
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * variance));
  for (auto& z : out) {
    const double re = normal(rng);
    const double im = normal(rng);
    z = Complex{re, im};
  }
}

template <typename Rng>
[[nodiscard]] std::vector<Complex> generate_noise(double variance, std::size_t k, Rng& rng) {
  if (k < 1) throw domain_error("generate_noise: k must be >= 1");
  std::vector<Complex> out(k);
  fill_noise(out, variance, rng);
  return out;
}

/// Draws what a per-component noise expectation estimate over `snapshots`
/// noise-only observations would return: sigma^2 * Gamma(m-1, 1) / (m-1).
template <typename Rng>
[[nodiscard]] double draw_variance_estimate(double true_variance, std::size_t snapshots, Rng& rng) {
  if (snapshots < 2) throw domain_error("variance estimate needs at least 2 snapshots");
  const double dof = static_cast<double>(snapshots - 1);
  std::gamma_distribution<double> g(dof, 1.0);
  return true_variance * g(rng) / dof;
}

}  // namespace coopsense
