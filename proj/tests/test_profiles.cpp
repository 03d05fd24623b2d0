#include <gtest/gtest.h>

#include <cmath>

#include "rarefan/profiles.hpp"

using namespace rarefan;

TEST(TasepProfile, TwoCornerOccupation) {
  const TasepProfile eta = two_corner(2, 3);
  // particles at k <= -2 and 1..2, holes elsewhere
  for (long k = -20; k <= 20; ++k) {
    const int want = (k <= -2 || (k >= 1 && k <= 2)) ? 1 : 0;
    EXPECT_EQ(eta(k), want) << "k=" << k;
  }
  EXPECT_FALSE(eta.random());
}

TEST(TasepProfile, BarInsertsHoleParticlePair) {
  const BarProfile bar(two_corner(1, 1));
  EXPECT_EQ(bar(0), 0);
  EXPECT_EQ(bar(1), 1);
  EXPECT_EQ(bar(-1), 1);
  EXPECT_EQ(bar(2), 0);
  EXPECT_EQ(bar(5), 0);
}

TEST(TasepProfile, BernoulliTailIsPureFunctionOfSeedAndSite) {
  const TasepProfile a = bernoulli_profile(0.2, 0.8, 42);
  const TasepProfile b = bernoulli_profile(0.2, 0.8, 42);
  std::vector<int> fwd, back;
  for (long k = -500; k <= 500; ++k) fwd.push_back(a(k));
  for (long k = 500; k >= -500; --k) back.push_back(b(k));
  std::reverse(back.begin(), back.end());
  EXPECT_EQ(fwd, back);
  const TasepProfile c = a.reseeded(43);
  int differ = 0;
  for (long k = -500; k <= 500; ++k) differ += a(k) != c(k);
  EXPECT_GT(differ, 100);
}

TEST(TasepProfile, BernoulliTailDensities) {
  const TasepProfile eta = bernoulli_profile(0.2, 0.8, 7);
  double left = 0, right = 0;
  const long n = 200000;
  for (long k = 1; k <= n; ++k) {
    right += eta(k);
    left += eta(-k);
  }
  EXPECT_NEAR(right / n, 0.2, 0.005);
  EXPECT_NEAR(left / n, 0.8, 0.005);
}

TEST(TasepProfile, PeriodicPattern) {
  const TasepProfile eta = periodic_profile(2, 3);
  // right: particle iff k mod 3 == 0; left: hole iff k mod 4 == 0
  for (long k = 1; k <= 30; ++k) EXPECT_EQ(eta(k), k % 3 == 0 ? 1 : 0);
  for (long k = -30; k <= -1; ++k) EXPECT_EQ(eta(k), floor_mod(k, 4) == 0 ? 0 : 1);
  const Densities d = asymptotic_densities(eta);
  EXPECT_DOUBLE_EQ(d.lower, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(d.upper, 3.0 / 4.0);
  EXPECT_TRUE(d.rarefaction);
}

TEST(TasepProfile, RejectsBadInput) {
  EXPECT_THROW(two_corner(0, 1), InvalidParameter);
  EXPECT_THROW(bernoulli_profile(0.8, 0.2), InvalidParameter);
  EXPECT_THROW(TasepProfile(1, {0, 1}, Tail::constant(1), Tail::constant(0)), InvalidParameter);
  EXPECT_THROW(Tail::periodic({}), InvalidParameter);
  EXPECT_THROW(Tail::constant(2), InvalidParameter);
}

TEST(Sigma, TwoCornerShape) {
  const SigmaPath s = sigma_from_eta(two_corner(1, 1), -5, 5);
  EXPECT_EQ(s.at(0), (Site{0, 0}));
  EXPECT_EQ(s.at(-1), (Site{-1, 0}));
  EXPECT_EQ(s.at(1), (Site{0, -1}));
  EXPECT_EQ(s.at(2), (Site{1, -1}));
  // σ⁻ climbs the column x = -1, σ⁺ runs along the row y = -1
  for (long k = -5; k <= -1; ++k) EXPECT_EQ(s.at(k), (Site{-1, -1 - k}));
  for (long k = 1; k <= 5; ++k) EXPECT_EQ(s.at(k), (Site{k - 1, -1}));
  EXPECT_THROW(s.at(6), WindowError);
}

TEST(Sigma, StepsFollowBarProfile) {
  const TasepProfile eta = bernoulli_profile(0.3, 0.7, 11);
  const BarProfile bar(eta);
  const SigmaPath s = sigma_from_eta(eta, -300, 300);
  for (long k = -299; k <= 300; ++k) {
    const Site d{s.at(k).x - s.at(k - 1).x, s.at(k).y - s.at(k - 1).y};
    if (bar(k) == 0) EXPECT_EQ(d, (Site{1, 0})) << k;
    else EXPECT_EQ(d, (Site{0, -1})) << k;
  }
}

TEST(Sigma, DownRightAndThroughOrigin) {
  const SigmaPath s = sigma_from_eta(periodic_profile(3, 2), -100, 100);
  for (long k = -99; k <= 100; ++k) {
    EXPECT_GE(s.at(k).x, s.at(k - 1).x);
    EXPECT_LE(s.at(k).y, s.at(k - 1).y);
    EXPECT_EQ(std::abs(s.at(k).x - s.at(k - 1).x) + std::abs(s.at(k).y - s.at(k - 1).y), 1);
  }
}

TEST(CountingProcess, SignedConvention) {
  const CountingProcess nu(3.0, {{-2.5, 1}, {-1.0, 2}, {0.5, 1}, {2.0, 3}}, AtomTail::empty(), AtomTail::empty());
  EXPECT_EQ(nu.nu(0.0), 0.0);
  EXPECT_EQ(nu.nu(0.5), 1.0);
  EXPECT_EQ(nu.nu(2.0), 4.0);
  EXPECT_EQ(nu.nu(-0.5), 0.0);
  EXPECT_EQ(nu.nu(-1.0), 0.0);  // (−1, 0] holds no atom
  EXPECT_EQ(nu.nu(-1.5), -2.0);
  EXPECT_EQ(nu.nu(-2.5), -2.0);
  EXPECT_EQ(nu.nu(-3.0), -3.0);
}

TEST(CountingProcess, IncrementsCountMassInHalfOpenIntervals) {
  const CountingProcess nu(3.0, {{-2.5, 1}, {-1.0, 2}, {0.5, 1}, {2.0, 3}}, AtomTail::empty(), AtomTail::empty());
  for (double a : {-3.0, -2.5, -1.5, -1.0, 0.0, 0.5, 1.0}) {
    for (double b : {-2.0, -1.0, 0.0, 0.5, 2.0, 2.5}) {
      if (!(a < b)) continue;
      EXPECT_EQ(nu.nu(b) - nu.nu(a), static_cast<double>(CountingProcess::mass(nu.atoms(a, b)))) << a << " " << b;
    }
  }
}

TEST(CountingProcess, MergesAtomsAndValidates) {
  const CountingProcess nu(1.0, {{0.5, 1}, {0.5, 2}}, AtomTail::empty(), AtomTail::empty());
  ASSERT_EQ(nu.core().size(), 1u);
  EXPECT_EQ(nu.core()[0].mass, 3);
  EXPECT_THROW(CountingProcess(1.0, {{2.0, 1}}, AtomTail::empty(), AtomTail::empty()), InvalidParameter);
  EXPECT_THROW(CountingProcess(1.0, {{0.5, 0}}, AtomTail::empty(), AtomTail::empty()), InvalidParameter);
}

TEST(CountingProcess, PoissonTailIsOrderIndependentAndHasRightIntensity) {
  const CountingProcess nu = hammersley_poisson(1.0, 2.0, 5);
  const auto whole = nu.atoms(-1000.0, 1000.0);
  auto pieces = nu.atoms(-1000.0, -3.7);
  for (const auto& a : nu.atoms(-3.7, 12.25)) pieces.push_back(a);
  for (const auto& a : nu.atoms(12.25, 1000.0)) pieces.push_back(a);
  ASSERT_EQ(whole.size(), pieces.size());
  for (std::size_t i = 0; i < whole.size(); ++i) EXPECT_EQ(whole[i].loc, pieces[i].loc);
  EXPECT_NEAR(-nu.nu(-1000.0) / 1000.0, 2.0, 0.15);
  EXPECT_NEAR(nu.nu(1000.0) / 1000.0, 1.0, 0.1);
}

TEST(CountingProcess, PeriodicTail) {
  const CountingProcess nu = hammersley_periodic(1.0, 2.0);
  EXPECT_EQ(nu.nu(10.0), 10.0);
  EXPECT_EQ(nu.nu(-10.25), -20.0);  // ν(z) = −⌊μ|z|⌋ off the atoms
  EXPECT_EQ(nu.nu(10.5), 10.0);
  EXPECT_EQ(nu.mass_at_zero(), 0);
}

TEST(CountingProcess, FloorDeficit) {
  for (long n : {0L, 1L, 7L, 8L, 26L, 27L, 1000L, 123456L}) {
    const long f = floor_two_thirds(n);
    EXPECT_LE(f * f * f, n * n);
    EXPECT_GT((f + 1) * (f + 1) * (f + 1), n * n);
  }
  const CountingProcess nu = floor_deficit_profile(AtomTail::periodic(2.0));
  for (double y : {0.0, 0.5, 1.0, 3.2, 8.0, 27.0, 100.7, 1000.0}) {
    const long fy = static_cast<long>(std::floor(y));
    EXPECT_EQ(nu.nu(y), static_cast<double>(fy - floor_two_thirds(fy))) << y;
  }
  EXPECT_THROW(floor_deficit_profile(AtomTail::periodic(0.5)), InvalidParameter);
}

TEST(CountingProcess, PlusMinusSplit) {
  const CountingProcess nu(2.0, {{-1.0, 1}, {0.0, 2}, {1.0, 1}}, AtomTail::periodic(3.0), AtomTail::periodic(1.0));
  const CountingProcess p = nu.plus(), m = nu.minus();
  EXPECT_TRUE(p.left_minus_infinity());
  EXPECT_TRUE(std::isinf(p.nu(-0.5)));
  EXPECT_EQ(p.nu(5.0), nu.nu(5.0));
  EXPECT_EQ(m.nu(5.0), 0.0);
  EXPECT_EQ(m.nu(-5.0), nu.nu(-5.0));
  EXPECT_EQ(nu.with_atom_at_zero().mass_at_zero(), 3);
}

TEST(Descriptor, BuildsEveryFamily) {
  using nlohmann::json;
  const std::vector<json> cases{
      {{"family", "two_corner"}, {"params", {{"x", 1}, {"y", 2}}}},
      {{"family", "periodic"}, {"params", {{"k_plus", 2}, {"k_minus", 3}}}},
      {{"family", "bernoulli"}, {"params", {{"p1", 0.2}, {"p2", 0.8}}}, {"seed", 3}},
      {{"family", "tasep_custom"},
       {"window", 1},
       {"params",
        {{"core", {1, 0, 0}}, {"left", {{"kind", "constant"}, {"value", 1}}}, {"right", {{"kind", "bernoulli"}, {"p", 0.3}}}}}},
      {{"family", "hammersley_periodic"}, {"params", {{"lambda", 1.0}, {"mu", 2.0}}}},
      {{"family", "hammersley_poisson"}, {"params", {{"lambda", 1.0}, {"mu", 2.0}}}},
      {{"family", "floor_deficit"}, {"params", {{"left", {{"kind", "periodic"}, {"intensity", 2.0}}}}}},
      {{"family", "counting_custom"},
       {"window", 2.0},
       {"params",
        {{"atoms", {{-1.0, 1}, {1.0, 2}}}, {"left", {{"kind", "poisson"}, {"intensity", 2.0}}}, {"right", {{"kind", "empty"}}}}}},
  };
  for (const auto& j : cases) {
    const BuiltProfile b = build_builtin(j.get<ProfileDescriptor>());
    EXPECT_TRUE(b.densities.rarefaction) << j.dump();
  }
  EXPECT_THROW(build_builtin(json{{"family", "nope"}}.get<ProfileDescriptor>()), InvalidParameter);
  EXPECT_THROW(build_builtin(json{{"family", "two_corner"}, {"params", {{"x", 1}}}}.get<ProfileDescriptor>()),
               InvalidParameter);
  EXPECT_THROW(json::object().get<ProfileDescriptor>(), ConfigError);
}

TEST(Descriptor, FloorDeficitNeedsExplicitLeftTail) {
  const auto d = nlohmann::json{{"family", "floor_deficit"}, {"params", nlohmann::json::object()}}.get<ProfileDescriptor>();
  EXPECT_THROW(build_builtin(d), InvalidParameter);
}

TEST(Descriptor, RoundTripsThroughJson) {
  ProfileDescriptor d{"bernoulli", {{"p1", 0.1}, {"p2", 0.9}}, 77, 0.0};
  const nlohmann::json j = d;
  const ProfileDescriptor e = j.get<ProfileDescriptor>();
  EXPECT_EQ(e.family, d.family);
  EXPECT_EQ(e.params, d.params);
  EXPECT_EQ(e.seed, d.seed);
}
