// ============================================================================
// fusion.hpp -- fusion-center logic for hard-decision cooperative sensing
// ============================================================================
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "coopsense/core.hpp"
#include "coopsense/random.hpp"
#include "coopsense/specfun.hpp"

namespace coopsense {

struct FusionConfig {
  std::size_t K = 1;          ///< number of SUs
  std::size_t n = 1;          ///< vote threshold: 1 = OR, K = AND
  double prior_h0 = 0.5;      ///< alpha = P(H0)
  double report_error = 0.0;  ///< q, per-bit flip probability on the reporting channel

  /// The complementary convention N* = K - n.
  [[nodiscard]] std::size_t n_star() const noexcept { return K - n; }
};

inline void validate(const FusionConfig& f) {
  if (f.K < 1) throw domain_error("fusion: K must be >= 1");
  if (f.n < 1 || f.n > f.K) throw domain_error("fusion: vote threshold n must lie in [1, K]");
  if (!(f.prior_h0 >= 0.0 && f.prior_h0 <= 1.0)) throw domain_error("fusion: prior_h0 must lie in [0,1]");
  if (!(f.report_error >= 0.0 && f.report_error <= 0.5)) throw domain_error("fusion: report error must lie in [0,0.5]");
}

struct CooperativeRates {
  Probability qf;
  Probability qm;
  double qe = 0.0;
};

/// H1 iff at least n of the decisions are H1.
[[nodiscard]] inline Hypothesis vote(std::span<const Hypothesis> decisions, std::size_t n) {
  if (n < 1 || n > decisions.size()) throw domain_error("vote: n must lie in [1, number of decisions]");
  std::size_t ones = 0;
  for (auto d : decisions) ones += d == Hypothesis::H1 ? 1U : 0U;
  return ones >= n ? Hypothesis::H1 : Hypothesis::H0;
}

namespace detail {

inline void check_binomial(std::size_t K, std::size_t n, Probability) {
  if (K < 1) throw domain_error("K must be >= 1");
  if (n < 1 || n > K) throw domain_error("n must lie in [1, K]");
}

// sum_{l=lo}^{hi} C(K,l) p^l (1-p)^(K-l), evaluated term by term in log space.
inline double binomial_range(std::size_t K, std::size_t lo, std::size_t hi, double p) {
  if (lo > hi) return 0.0;
  if (p == 0.0) return lo == 0 ? 1.0 : 0.0;
  if (p == 1.0) return hi == K ? 1.0 : 0.0;
  const double kk = static_cast<double>(K);
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double log_k_fact = log_gamma(kk + 1.0);
  double sum = 0.0;
  for (std::size_t l = lo; l <= hi; ++l) {
    const double ll = static_cast<double>(l);
    const double log_term = log_k_fact - log_gamma(ll + 1.0) - log_gamma(kk - ll + 1.0) + ll * log_p + (kk - ll) * log_q;
    sum += std::exp(log_term);
  }
  return sum;
}

}  // namespace detail

/// Q_f = sum_{l=n}^{K} C(K,l) p_f^l (1-p_f)^(K-l).
[[nodiscard]] inline Probability coop_qf(std::size_t K, std::size_t n, Probability pf) {
  detail::check_binomial(K, n, pf);
  return Probability::clamped(detail::binomial_range(K, n, K, pf.value()));
}

/// Q_m = 1 - sum_{l=n}^{K} C(K,l) p_d^l (1-p_d)^(K-l), summed as the lower tail.
[[nodiscard]] inline Probability coop_qm(std::size_t K, std::size_t n, Probability pd) {
  detail::check_binomial(K, n, pd);
  return Probability::clamped(detail::binomial_range(K, 0, n - 1, pd.value()));
}

/// Q_e = alpha Q_f + (1 - alpha) Q_m.
[[nodiscard]] inline double total_error(double alpha, Probability qf, Probability qm) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw domain_error("total_error: alpha must lie in [0,1]");
  return alpha * qf.value() + (1.0 - alpha) * qm.value();
}

[[nodiscard]] inline CooperativeRates cooperative_rates(const FusionConfig& f, Probability pf, Probability pd) {
  validate(f);
  const auto qf = coop_qf(f.K, f.n, pf);
  const auto qm = coop_qm(f.K, f.n, pd);
  return {qf, qm, total_error(f.prior_h0, qf, qm)};
}

/// One noise state of a Bayesian mixture over noise variances.
struct NoiseState {
  double weight_h0 = 0.0;  ///< P(sigma^2 | H0)
  double weight_h1 = 0.0;  ///< P(sigma^2 | H1)
  Probability qf;
  Probability qm;
};

/// sum_states alpha P(s|H0) Q_f(s) + (1-alpha) P(s|H1) Q_m(s).
[[nodiscard]] inline double total_error_over_noise_states(double alpha, std::span<const NoiseState> states) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw domain_error("alpha must lie in [0,1]");
  if (states.empty()) throw domain_error("no noise states supplied");
  double w0 = 0.0, w1 = 0.0, acc = 0.0;
  for (const auto& s : states) {
    if (!(s.weight_h0 >= 0.0 && s.weight_h1 >= 0.0)) throw domain_error("noise state weights must be >= 0");
    w0 += s.weight_h0;
    w1 += s.weight_h1;
    acc += alpha * s.weight_h0 * s.qf.value() + (1.0 - alpha) * s.weight_h1 * s.qm.value();
  }
  if (std::fabs(w0 - 1.0) > 1e-9 || std::fabs(w1 - 1.0) > 1e-9) {
    throw domain_error("noise state weights must each sum to 1");
  }
  return acc;
}

struct VoteOptimum {
  std::size_t n = 1;
  double qe = 0.0;
  std::size_t K = 1;

  [[nodiscard]] std::size_t n_star() const noexcept { return K - n; }
};

/// Relative gap below which two total errors count as tied.
inline constexpr double kTieTolerance = 1e-12;

/// Exhaustive argmin over n in [1, K]; ties go to the smaller n.
[[nodiscard]] inline VoteOptimum optimize_vote_count(std::size_t K, Probability pf, Probability pd, double alpha) {
  if (K < 1) throw domain_error("optimize_vote_count: K must be >= 1");
  VoteOptimum best{1, total_error(alpha, coop_qf(K, 1, pf), coop_qm(K, 1, pd)), K};
  for (std::size_t n = 2; n <= K; ++n) {
    const double qe = total_error(alpha, coop_qf(K, n, pf), coop_qm(K, n, pd));
    if (qe < best.qe * (1.0 - kTieTolerance)) best = {n, qe, K};
  }
  return best;
}

/// Flips each bit independently with probability q.
template <typename Rng>
[[nodiscard]] std::vector<Hypothesis> apply_reporting_errors(std::span<const Hypothesis> decisions, double q,
                                                            Rng& rng) {
  if (!(q >= 0.0 && q <= 0.5)) throw domain_error("reporting error q must lie in [0,0.5]");
  std::vector<Hypothesis> out(decisions.begin(), decisions.end());
  for (auto& d : out) {
    if (uniform01(rng) < q) d = d == Hypothesis::H1 ? Hypothesis::H0 : Hypothesis::H1;
  }
  return out;
}

/// Per-SU probability of reporting H1 after the reporting channel.
[[nodiscard]] inline Probability through_channel(Probability p, double q) {
  return Probability::clamped(p.value() * (1.0 - q) + (1.0 - p.value()) * q);
}

}  // namespace coopsense
