// Total error of every vote threshold for ten SUs, and the optimum.
#include <cstdio>

#include "coopsense/fusion.hpp"

int main() {
  using namespace coopsense;
  const std::size_t K = 10;
  const Probability pf{0.05}, pd{0.6};
  const double alpha = 0.5;
  for (std::size_t n = 1; n <= K; ++n) {
    std::printf("n=%2zu  Q_f=%.5f  Q_m=%.5f  Q_e=%.5f\n", n, coop_qf(K, n, pf).value(), coop_qm(K, n, pd).value(),
                total_error(alpha, coop_qf(K, n, pf), coop_qm(K, n, pd)));
  }
  const auto best = optimize_vote_count(K, pf, pd, alpha);
  std::printf("best n=%zu (N*=%zu), Q_e=%.5f\n", best.n, best.n_star(), best.qe);
}
