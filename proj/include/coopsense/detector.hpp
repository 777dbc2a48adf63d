// ============================================================================
// detector.hpp -- single-SU energy detector
//
// Two analytic families live side by side:
//   * chi-square family: P_f = Gamma(u, gamma/2)/Gamma(u) and
//     P_d = Q_u(sqrt(2 SNR), sqrt(gamma)), with gamma on the scale
//     T = 2 sum |y|^2 / sigma^2 (chi-square with 2u degrees of freedom);
//   * exponential family for the normalized statistic y/w:
//     f(y|H0) = exp(-y/w)/w, f(y|H1) = exp(-y/(w(1+SNR)))/(w(1+SNR)).
// ============================================================================
#pragma once

#include <cmath>
#include <complex>
#include <span>

#include "coopsense/core.hpp"
#include "coopsense/specfun.hpp"

namespace coopsense {

enum class SignalModel {
  Deterministic,  ///< constant envelope, random phase; P_d follows the Marcum-Q law
  Gaussian,       ///< circular complex Gaussian; H1 statistic is a scaled central chi-square
};

struct DetectorConfig {
  std::size_t k = 5;             ///< complex samples per sensing interval
  double u = 5.0;                ///< time-bandwidth product (order of the chi-square laws)
  double gamma = 30.0;           ///< threshold on the chi-square scale 2 sum|y|^2 / sigma^2
  double channel_gain = 1.0;     ///< h
  double signal_variance = 0.0;  ///< sigma_s^2
  SignalModel signal = SignalModel::Deterministic;

  /// gamma expressed on the scale of the normalized statistic Y (mean 1 under H0).
  [[nodiscard]] double statistic_threshold() const noexcept { return gamma / (2.0 * static_cast<double>(k)); }
};

inline void validate(const DetectorConfig& c) {
  if (c.k < 1) throw domain_error("detector: k must be >= 1");
  if (!(std::isfinite(c.u) && c.u > 0.0)) throw domain_error("detector: u must be > 0");
  if (!(std::isfinite(c.gamma) && c.gamma >= 0.0)) throw domain_error("detector: gamma must be >= 0");
  if (!std::isfinite(c.channel_gain)) throw domain_error("detector: channel gain must be finite");
  if (!(std::isfinite(c.signal_variance) && c.signal_variance >= 0.0)) {
    throw domain_error("detector: signal variance must be >= 0");
  }
}

/// Normalized energy Y, nonnegative and finite.
class EnergyStatistic {
public:
  explicit EnergyStatistic(double v) : value_{v} {
    if (!(std::isfinite(v) && v >= 0.0)) throw domain_error("energy statistic must be finite and >= 0");
  }
  [[nodiscard]] double value() const noexcept { return value_; }

private:
  double value_;
};

/// Y = (1/k) sum |y(i)|^2 / noise_variance.
[[nodiscard]] inline EnergyStatistic energy_statistic(std::span<const std::complex<double>> samples,
                                                      double noise_variance) {
  if (samples.empty()) throw domain_error("energy_statistic: no samples");
  if (!(std::isfinite(noise_variance) && noise_variance > 0.0)) {
    throw domain_error("energy_statistic: noise variance must be > 0");
  }
  double energy = 0.0;
  for (const auto& z : samples) energy += std::norm(z);
  return EnergyStatistic{energy / (static_cast<double>(samples.size()) * noise_variance)};
}

/// H1 iff Y >= gamma.
[[nodiscard]] inline Hypothesis decide(EnergyStatistic y, double gamma) noexcept {
  return y.value() >= gamma ? Hypothesis::H1 : Hypothesis::H0;
}

[[nodiscard]] inline Probability analytic_pf(double u, double gamma) {
  if (!(std::isfinite(gamma) && gamma >= 0.0)) throw domain_error("analytic_pf: gamma must be >= 0");
  return reg_upper_gamma(u, 0.5 * gamma);
}

/// Deterministic-signal detection probability; `snr` is the SNR accumulated
/// over the sensing interval.
[[nodiscard]] inline Probability analytic_pd(double u, double snr, double gamma) {
  if (!(std::isfinite(snr) && snr >= 0.0)) throw domain_error("analytic_pd: snr must be >= 0");
  if (!(std::isfinite(gamma) && gamma >= 0.0)) throw domain_error("analytic_pd: gamma must be >= 0");
  return marcum_q(u, std::sqrt(2.0 * snr), std::sqrt(gamma));
}

/// Detection probability for a Gaussian signal with per-sample SNR `snr`.
[[nodiscard]] inline Probability analytic_pd_gaussian(double u, double snr, double gamma) {
  if (!(std::isfinite(snr) && snr >= 0.0)) throw domain_error("analytic_pd_gaussian: snr must be >= 0");
  if (!(std::isfinite(gamma) && gamma >= 0.0)) throw domain_error("analytic_pd_gaussian: gamma must be >= 0");
  return reg_upper_gamma(u, 0.5 * gamma / (1.0 + snr));
}

/// Closed-form single-SU (P_d, P_f) of the chi-square family for a detector
/// whose per-sample SNR is `snr`.
struct DetectionPair {
  Probability pd;
  Probability pf;
};

[[nodiscard]] inline DetectionPair analytic_rates(const DetectorConfig& c, double snr) {
  const Probability pf = analytic_pf(c.u, c.gamma);
  const Probability pd = c.signal == SignalModel::Deterministic
                             ? analytic_pd(c.u, static_cast<double>(c.k) * snr, c.gamma)
                             : analytic_pd_gaussian(c.u, snr, c.gamma);
  return {pd, pf};
}

/// Density of the normalized statistic under either hypothesis.
[[nodiscard]] inline double pdf_normalized(double y, double w, double snr_bar, Hypothesis h) {
  if (!(std::isfinite(w) && w > 0.0)) throw domain_error("pdf_normalized: w must be > 0");
  if (!(std::isfinite(y) && y >= 0.0)) throw domain_error("pdf_normalized: y must be >= 0");
  if (!(std::isfinite(snr_bar) && snr_bar >= 0.0)) throw domain_error("pdf_normalized: snr must be >= 0");
  const double scale = h == Hypothesis::H1 ? w * (1.0 + snr_bar) : w;
  return std::exp(-y / scale) / scale;
}

struct FalseAlarmMiss {
  Probability pf;
  Probability pm;
};

/// P_f = 1 - int_0^gamma f(y|H0), P_m = int_0^gamma f(y|H1).
[[nodiscard]] inline FalseAlarmMiss pf_pm_from_pdf(double gamma, double w, double snr_bar) {
  if (!(std::isfinite(gamma) && gamma >= 0.0)) throw domain_error("pf_pm_from_pdf: gamma must be >= 0");
  if (!(std::isfinite(w) && w > 0.0)) throw domain_error("pf_pm_from_pdf: w must be > 0");
  if (!(std::isfinite(snr_bar) && snr_bar >= 0.0)) throw domain_error("pf_pm_from_pdf: snr must be >= 0");
  const double pf = std::exp(-gamma / w);
  const double pm = -std::expm1(-gamma / (w * (1.0 + snr_bar)));
  return {Probability::clamped(pf), Probability::clamped(pm)};
}

}  // namespace coopsense
