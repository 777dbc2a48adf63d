// ============================================================================
// montecarlo.hpp -- end-to-end cooperative sensing trials
//
// One trial: every SU draws its noise variance from the uncertainty model,
// receives k samples (noise only, or channel-scaled PU signal plus noise),
// decides with the configured scheme, reports its bit over a channel that
// flips it with probability q, and the fusion center votes.
//
// Each random quantity comes from a stream keyed by (seed, trial, SU,
// hypothesis), so results are a pure function of the scenario and do not
// depend on the number of workers. The draws never depend on the scheme or
// on the SNR, which gives common random numbers across both.
// ============================================================================
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "coopsense/core.hpp"
#include "coopsense/detector.hpp"
#include "coopsense/fusion.hpp"
#include "coopsense/noise_model.hpp"
#include "coopsense/random.hpp"
#include "coopsense/threshold_schemes.hpp"

namespace coopsense {

enum class TruthMode {
  H0,     ///< every trial under H0
  H1,     ///< every trial under H1
  Mixed,  ///< each trial draws H0 with probability prior_h0
  Both,   ///< every trial index is run once under H0 and once under H1
};

enum class VarianceDraw {
  PerSu,         ///< one variance per SU per trial, shared by its k components
  PerComponent,  ///< an independent variance for every component
};

struct Scenario {
  DetectorConfig detector;
  NoiseUncertaintyModel noise = NoiseUncertaintyModel::exact(1.0);
  VarianceDraw variance_draw = VarianceDraw::PerSu;
  std::size_t reference_snapshots = 200;  ///< noise-only snapshots behind each E(sigma^2) estimate
  SchemeConfig scheme;
  FusionConfig fusion;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
  TruthMode truth = TruthMode::Both;

  /// Per-sample SNR h^2 sigma_s^2 / sigma_c^2 at the nominal noise variance.
  [[nodiscard]] double snr() const noexcept {
    return detector.channel_gain * detector.channel_gain * detector.signal_variance / noise.nominal_variance();
  }
};

/// sigma_s^2 giving the requested per-sample SNR.
[[nodiscard]] inline double signal_variance_for_snr(double snr, double nominal_variance, double channel_gain) {
  if (!(std::isfinite(snr) && snr >= 0.0)) throw domain_error("snr must be finite and >= 0");
  if (channel_gain == 0.0) throw domain_error("channel gain must be nonzero to reach a target snr");
  return snr * nominal_variance / (channel_gain * channel_gain);
}

/// Fills in defaults a scheme needs for this scenario (GammaDoublePrime weights).
[[nodiscard]] inline SchemeConfig resolve_scheme(SchemeConfig s, std::size_t k) {
  if (s.kind == SchemeKind::GammaDoublePrime && s.weights.empty()) s.weights = geometric_weights(k, 0.5);
  return s;
}

inline void validate(const Scenario& s) {
  validate(s.detector);
  validate(s.fusion);
  validate(s.scheme);
  if (s.trials < 1) throw domain_error("scenario: trials must be >= 1");
  if (s.reference_snapshots < 2) throw domain_error("scenario: reference_snapshots must be >= 2");
  if (s.scheme.kind == SchemeKind::GammaDoublePrime && !s.scheme.weights.empty() &&
      s.scheme.weights.size() != s.detector.k) {
    throw domain_error("scenario: gamma_double_prime weights must have length k");
  }
}

struct TrialOutcome {
  Hypothesis truth = Hypothesis::H0;
  std::vector<Hypothesis> local;     ///< per-SU decisions
  std::vector<Hypothesis> reported;  ///< after reporting errors
  Hypothesis fused = Hypothesis::H0;
  int steps = 0;                     ///< decision steps summed over SUs
};

namespace detail {

enum : std::uint64_t { kTagSu = 1, kTagSignal = 2, kTagTruth = 3 };

[[nodiscard]] inline std::uint64_t hyp_tag(Hypothesis h) { return h == Hypothesis::H1 ? 1 : 0; }

// Per-SU quantities that every scheme consumes.
struct SuObservation {
  std::vector<double> energies;      // |y_t|^2
  std::vector<double> expectations;  // estimated E(sigma_t^2)
  double expected_variance = 0.0;    // mean of `expectations`
  double flip_draw = 1.0;            // uniform in [0,1); flip iff < q
};

struct SignalPhases {
  std::vector<Complex> unit;  // e^{i phi_t}, shared by every SU of a trial
};

inline void draw_signal(const Scenario& s, std::uint64_t trial, Hypothesis truth, SignalPhases& out) {
  out.unit.resize(s.detector.k);
  auto rng = derive_stream(s.seed, kTagSignal, trial, hyp_tag(truth));
  for (auto& z : out.unit) {
    const double phi = 2.0 * std::numbers::pi * uniform01(rng);
    z = Complex{std::cos(phi), std::sin(phi)};
  }
}

inline void observe_su(const Scenario& s, std::uint64_t trial, std::size_t su, Hypothesis truth,
                       const SignalPhases& phases, SuObservation& out) {
  const std::size_t k = s.detector.k;
  auto rng = derive_stream(s.seed, kTagSu, trial, su, hyp_tag(truth));

  out.energies.resize(k);
  out.expectations.resize(k);

  // Per-component true variances (stored temporarily in `energies`).
  if (s.variance_draw == VarianceDraw::PerSu) {
    const double v = sample_noise_variance(s.noise, rng);
    std::fill(out.energies.begin(), out.energies.end(), v);
  } else {
    for (auto& v : out.energies) v = sample_noise_variance(s.noise, rng);
  }

  double sum = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    out.expectations[t] = draw_variance_estimate(out.energies[t], s.reference_snapshots, rng);
    sum += out.expectations[t];
  }
  out.expected_variance = sum / static_cast<double>(k);

  const double h = s.detector.channel_gain;
  const double sig_var = s.detector.signal_variance;
  std::normal_distribution<double> normal(0.0, std::numbers::sqrt2 / 2.0);
  for (std::size_t t = 0; t < k; ++t) {
    const double var = out.energies[t];
    const double re = normal(rng);
    const double im = normal(rng);
    const Complex z{re, im};  // unit-variance circular Gaussian
    Complex y;
    if (truth == Hypothesis::H0) {
      y = std::sqrt(var) * z;
    } else if (s.detector.signal == SignalModel::Gaussian) {
      y = std::sqrt(var + h * h * sig_var) * z;
    } else {
      y = h * std::sqrt(sig_var) * phases.unit[t] + std::sqrt(var) * z;
    }
    out.energies[t] = std::norm(y);
  }
  out.flip_draw = uniform01(rng);
}

[[nodiscard]] inline EnhancedDecision decide_su(const Scenario& s, const SchemeConfig& scheme,
                                                const SuObservation& obs) {
  ObservationContext ctx;
  ctx.energies = obs.energies;
  ctx.k = s.detector.k;
  ctx.gamma = s.detector.statistic_threshold();
  ctx.nominal_variance = s.noise.nominal_variance();
  ctx.bracket = s.noise.bracket();
  ctx.expected_variance = obs.expected_variance;
  ctx.noise_expectations = obs.expectations;
  return decide_enhanced(scheme, ctx);
}

// Integer counts; merging is plain addition, so any partition of trials
// across workers yields identical totals.
struct Tally {
  std::uint64_t h0_trials = 0;
  std::uint64_t h1_trials = 0;
  std::uint64_t su_h0 = 0;
  std::uint64_t su_false_alarms = 0;
  std::uint64_t su_h1 = 0;
  std::uint64_t su_detections = 0;
  std::uint64_t fused_false_alarms = 0;
  std::uint64_t fused_detections = 0;
  std::uint64_t steps = 0;
  std::uint64_t decisions = 0;
  std::uint64_t errors = 0;  // fused != truth

  Tally& operator+=(const Tally& o) {
    h0_trials += o.h0_trials;
    h1_trials += o.h1_trials;
    su_h0 += o.su_h0;
    su_false_alarms += o.su_false_alarms;
    su_h1 += o.su_h1;
    su_detections += o.su_detections;
    fused_false_alarms += o.fused_false_alarms;
    fused_detections += o.fused_detections;
    steps += o.steps;
    decisions += o.decisions;
    errors += o.errors;
    return *this;
  }
  friend bool operator==(const Tally&, const Tally&) = default;
};

[[nodiscard]] inline Hypothesis draw_truth(const Scenario& s, std::uint64_t trial) {
  switch (s.truth) {
    case TruthMode::H0: return Hypothesis::H0;
    case TruthMode::H1: return Hypothesis::H1;
    case TruthMode::Mixed: {
      auto rng = derive_stream(s.seed, kTagTruth, trial);
      return uniform01(rng) < s.fusion.prior_h0 ? Hypothesis::H0 : Hypothesis::H1;
    }
    case TruthMode::Both: break;
  }
  throw domain_error("truth mode 'both' runs each trial under both hypotheses; pass the hypothesis explicitly");
}

// Scratch space reused across trials by one worker.
struct Workspace {
  SignalPhases phases;
  SuObservation obs;
  std::vector<std::vector<Hypothesis>> reported;  // per scheme
};

inline void simulate(const Scenario& s, std::span<const SchemeConfig> schemes, std::uint64_t trial, Hypothesis truth,
                     Workspace& ws, std::span<Tally> tallies) {
  const std::size_t K = s.fusion.K;
  ws.reported.resize(schemes.size());
  for (auto& r : ws.reported) r.resize(K);
  if (truth == Hypothesis::H1 && s.detector.signal == SignalModel::Deterministic) {
    draw_signal(s, trial, truth, ws.phases);
  }

  for (std::size_t su = 0; su < K; ++su) {
    observe_su(s, trial, su, truth, ws.phases, ws.obs);
    const bool flip = ws.obs.flip_draw < s.fusion.report_error;
    for (std::size_t i = 0; i < schemes.size(); ++i) {
      const auto d = decide_su(s, schemes[i], ws.obs);
      auto& t = tallies[i];
      t.steps += static_cast<std::uint64_t>(d.steps);
      t.decisions += 1;
      if (truth == Hypothesis::H0) {
        t.su_h0 += 1;
        t.su_false_alarms += d.decision == Hypothesis::H1 ? 1U : 0U;
      } else {
        t.su_h1 += 1;
        t.su_detections += d.decision == Hypothesis::H1 ? 1U : 0U;
      }
      Hypothesis rep = d.decision;
      if (flip) rep = rep == Hypothesis::H1 ? Hypothesis::H0 : Hypothesis::H1;
      ws.reported[i][su] = rep;
    }
  }

  for (std::size_t i = 0; i < schemes.size(); ++i) {
    const auto fused = vote(ws.reported[i], s.fusion.n);
    auto& t = tallies[i];
    if (truth == Hypothesis::H0) {
      t.h0_trials += 1;
      t.fused_false_alarms += fused == Hypothesis::H1 ? 1U : 0U;
    } else {
      t.h1_trials += 1;
      t.fused_detections += fused == Hypothesis::H1 ? 1U : 0U;
    }
    t.errors += fused != truth ? 1U : 0U;
  }
}

inline void run_range(const Scenario& s, std::span<const SchemeConfig> schemes, std::uint64_t begin,
                      std::uint64_t end, std::span<Tally> tallies) {
  Workspace ws;
  for (std::uint64_t trial = begin; trial < end; ++trial) {
    if (s.truth == TruthMode::Both) {
      simulate(s, schemes, trial, Hypothesis::H0, ws, tallies);
      simulate(s, schemes, trial, Hypothesis::H1, ws, tallies);
    } else {
      simulate(s, schemes, trial, draw_truth(s, trial), ws, tallies);
    }
  }
}

}  // namespace detail

/// One trial under an explicit hypothesis, using the scenario's scheme.
[[nodiscard]] inline TrialOutcome run_trial(const Scenario& scenario, std::uint64_t trial_index, Hypothesis truth) {
  validate(scenario);
  const auto scheme = resolve_scheme(scenario.scheme, scenario.detector.k);
  TrialOutcome out;
  out.truth = truth;
  detail::SignalPhases phases;
  if (truth == Hypothesis::H1 && scenario.detector.signal == SignalModel::Deterministic) {
    detail::draw_signal(scenario, trial_index, truth, phases);
  }
  detail::SuObservation obs;
  for (std::size_t su = 0; su < scenario.fusion.K; ++su) {
    detail::observe_su(scenario, trial_index, su, truth, phases, obs);
    const auto d = detail::decide_su(scenario, scheme, obs);
    out.steps += d.steps;
    out.local.push_back(d.decision);
    Hypothesis rep = d.decision;
    if (obs.flip_draw < scenario.fusion.report_error) rep = rep == Hypothesis::H1 ? Hypothesis::H0 : Hypothesis::H1;
    out.reported.push_back(rep);
  }
  out.fused = vote(out.reported, scenario.fusion.n);
  return out;
}

/// One trial whose hypothesis follows the scenario's truth mode (H0, H1 or Mixed).
[[nodiscard]] inline TrialOutcome run_trial(const Scenario& scenario, std::uint64_t trial_index) {
  return run_trial(scenario, trial_index, detail::draw_truth(scenario, trial_index));
}

struct RateEstimate {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double point = 0.0;
  double lo = 0.0;
  double hi = 1.0;

  [[nodiscard]] double half_width() const noexcept { return 0.5 * (hi - lo); }
  [[nodiscard]] bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

inline constexpr double kZ95 = 1.959963984540054;

/// Wilson score interval for a binomial proportion.
[[nodiscard]] inline RateEstimate wilson(std::uint64_t successes, std::uint64_t trials, double z = kZ95) {
  if (trials == 0) throw domain_error("wilson: no trials");
  if (successes > trials) throw domain_error("wilson: successes exceed trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  RateEstimate r{successes, trials, p, std::max(0.0, centre - half), std::min(1.0, centre + half)};
  // Guard the endpoints against rounding so the interval always holds p.
  r.lo = std::min(r.lo, p);
  r.hi = std::max(r.hi, p);
  return r;
}

struct Interval {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct AnalyticCounterparts {
  Probability pd;     ///< chi-square family, nominal variance, no reporting errors
  Probability pf;
  Probability qf;     ///< cooperative, through the reporting channel
  Probability qm;
  double qe = 0.0;
  Probability exp_pf;  ///< exponential model, w = E(sigma^2)/sigma_c^2
  Probability exp_pm;
};

struct ScenarioEstimate {
  SchemeKind scheme = SchemeKind::Fixed;
  std::optional<RateEstimate> pd;  ///< per-SU detection rate
  std::optional<RateEstimate> pf;  ///< per-SU false-alarm rate
  std::optional<RateEstimate> qf;  ///< cooperative false alarm
  std::optional<RateEstimate> qm;  ///< cooperative miss
  std::optional<Interval> qe;      ///< total error
  AnalyticCounterparts analytic;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  double steps_mean = 0.0;
  detail::Tally tally;
};

[[nodiscard]] inline AnalyticCounterparts analytic_counterparts(const Scenario& s) {
  const double snr = s.snr();
  const auto rates = analytic_rates(s.detector, snr);
  const double q = s.fusion.report_error;
  const auto coop = cooperative_rates(s.fusion, through_channel(rates.pf, q), through_channel(rates.pd, q));
  const double w = s.noise.expected_variance() / s.noise.nominal_variance();
  const auto expo = pf_pm_from_pdf(s.detector.statistic_threshold(), w, snr);
  return {rates.pd, rates.pf, coop.qf, coop.qm, coop.qe, expo.pf, expo.pm};
}

namespace detail {

[[nodiscard]] inline ScenarioEstimate summarize(const Scenario& s, SchemeKind kind, const Tally& t,
                                                const AnalyticCounterparts& analytic) {
  ScenarioEstimate e;
  e.scheme = kind;
  e.tally = t;
  e.analytic = analytic;
  e.trials = s.trials;
  e.seed = s.seed;
  e.steps_mean = t.decisions ? static_cast<double>(t.steps) / static_cast<double>(t.decisions) : 0.0;
  if (t.su_h0) e.pf = wilson(t.su_false_alarms, t.su_h0);
  if (t.su_h1) e.pd = wilson(t.su_detections, t.su_h1);
  if (t.h0_trials) e.qf = wilson(t.fused_false_alarms, t.h0_trials);
  if (t.h1_trials) e.qm = wilson(t.h1_trials - t.fused_detections, t.h1_trials);

  const double a = s.fusion.prior_h0;
  if (s.truth == TruthMode::Mixed) {
    const auto r = wilson(t.errors, t.h0_trials + t.h1_trials);
    e.qe = Interval{r.point, r.lo, r.hi};
  } else if (e.qf && e.qm) {
    e.qe = Interval{a * e.qf->point + (1.0 - a) * e.qm->point, a * e.qf->lo + (1.0 - a) * e.qm->lo,
                    a * e.qf->hi + (1.0 - a) * e.qm->hi};
  }
  return e;
}

}  // namespace detail

[[nodiscard]] inline unsigned default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1U : n;
}

/// Runs the scenario once for each scheme on shared draws.
[[nodiscard]] inline std::vector<ScenarioEstimate> estimate_schemes(const Scenario& scenario,
                                                                    std::span<const SchemeConfig> schemes,
                                                                    unsigned workers = default_workers()) {
  validate(scenario);
  if (schemes.empty()) throw domain_error("estimate: no schemes");
  std::vector<SchemeConfig> resolved;
  for (const auto& sc : schemes) {
    validate(sc);
    resolved.push_back(resolve_scheme(sc, scenario.detector.k));
    if (resolved.back().kind == SchemeKind::GammaDoublePrime && resolved.back().weights.size() != scenario.detector.k) {
      throw domain_error("gamma_double_prime weights must have length k");
    }
  }
  const auto analytic = analytic_counterparts(scenario);

  const std::uint64_t n = scenario.trials;
  const std::uint64_t w = std::max<std::uint64_t>(1, std::min<std::uint64_t>(workers, n));
  std::vector<std::vector<detail::Tally>> parts(w, std::vector<detail::Tally>(resolved.size()));
  auto bounds = [&](std::uint64_t i) { return n * i / w; };

  if (w == 1) {
    detail::run_range(scenario, resolved, 0, n, parts[0]);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(w);
    for (std::uint64_t i = 0; i < w; ++i) {
      pool.emplace_back([&, i] {
        try {
          detail::run_range(scenario, resolved, bounds(i), bounds(i + 1), parts[i]);
        } catch (...) {
          failures[i] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  }

  std::vector<ScenarioEstimate> out;
  for (std::size_t i = 0; i < resolved.size(); ++i) {
    detail::Tally total;
    for (const auto& p : parts) total += p[i];
    out.push_back(detail::summarize(scenario, resolved[i].kind, total, analytic));
  }
  return out;
}

[[nodiscard]] inline ScenarioEstimate estimate(const Scenario& scenario, unsigned workers = default_workers()) {
  const SchemeConfig one[] = {scenario.scheme};
  return estimate_schemes(scenario, one, workers).front();
}

}  // namespace coopsense
