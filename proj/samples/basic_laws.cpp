// Prints the speed laws of a few initial profiles next to their
// supremum-comparison estimates.

#include <cstdio>

#include "rarefan/limit_laws.hpp"

using namespace rarefan;

int main() {
  const LimitLaw tc = two_corner_cdf(2, 3), per = periodic_tasep_cdf(2, 3), ber = bernoulli_cdf(0.2, 0.8);
  std::printf("%6s  %-12s %-12s %-12s\n", "u", "two_corner", "periodic", "bernoulli");
  for (double u = -0.5; u <= 0.51; u += 0.25) std::printf("%6.2f  %-12.6f %-12.6f %-12.6f\n", u, tc(u), per(u), ber(u));

  // Monte Carlo side: P(sup S_- >= sup S_+) at the density for u = 0.25
  const auto est = general_law_estimate(ModelKind::tasep_speed, two_corner(2, 3), 0.25, 20000, 7);
  std::printf("\ntwo_corner(2,3) at u=0.25: law %.4f, estimate %.4f +- %.4f\n", tc(0.25), est.estimate.value,
              est.estimate.half_width());

  const LimitLaw hp = hammersley_periodic_cdf(1.0, 2.0);
  std::printf("hammersley periodic (1,2) at v=1/2.25: P(V <= v) = %.4f\n", hp(1.0 / 2.25));
}
