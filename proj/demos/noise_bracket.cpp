// Builds a variance bracket from calibration snapshots and compares the
// false-alarm rate of each scheme when the true variance wanders inside it.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "coopsense/coopsense.hpp"

int main() {
  using namespace coopsense;
  SplitMix64 rng(7);
  const std::size_t n = 25;
  const auto snaps = generate_noise(1.0, n, rng);
  double mean = 0.0;
  for (const auto& z : snaps) mean += std::norm(z) / n;
  double ss = 0.0;
  for (const auto& z : snaps) ss += (std::norm(z) - mean) * (std::norm(z) - mean);
  const auto cb = confidence_bracket(mean, std::sqrt(ss / (n - 1)), n, 0.99);
  std::printf("calibration: mean %.4f, kappa %.4f, bracket [%.4f, %.4f]\n", mean, cb.kappa, cb.bracket.low,
              cb.bracket.high);

  Scenario s;
  s.noise = NoiseUncertaintyModel(std::clamp(1.0, cb.bracket.low, cb.bracket.high), 0.99, cb.bracket, n);
  s.fusion = {1, 1, 0.5, 0.0};
  s.truth = TruthMode::H0;
  s.trials = 200'000;
  const std::vector<SchemeConfig> schemes = {{SchemeKind::Fixed, {}, 1},
                                             {SchemeKind::TwoStep, {}, 1},
                                             {SchemeKind::GammaPrime, {}, 1},
                                             {SchemeKind::GammaDoublePrime, {}, 1}};
  std::printf("nominal P_f %.3e\n", analytic_pf(s.detector.u, s.detector.gamma).value());
  for (const auto& e : estimate_schemes(s, schemes)) {
    std::printf("%-19s P_f %.3e  [%.3e, %.3e]  steps %.3f\n", to_string(e.scheme), e.pf->point, e.pf->lo, e.pf->hi,
                e.steps_mean);
  }
}
