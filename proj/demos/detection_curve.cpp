// Closed-form single-SU detection probability against SNR, next to a quick
// simulation of the fixed-threshold detector.
#include <cstdio>

#include "coopsense/coopsense.hpp"

int main() {
  using namespace coopsense;
  Scenario s;
  s.detector.signal = SignalModel::Deterministic;
  s.fusion = {1, 1, 0.5, 0.0};
  s.trials = 20'000;
  s.truth = TruthMode::H1;
  std::printf("%8s %12s %12s\n", "snr_db", "pd_analytic", "pd_sim");
  for (double db = -10.0; db <= 6.0; db += 2.0) {
    s.detector.signal_variance = signal_variance_for_snr(db_to_linear(db), 1.0, 1.0);
    const auto e = estimate(s);
    std::printf("%8.1f %12.5f %12.5f\n", db, e.analytic.pd.value(), e.pd->point);
  }
}
