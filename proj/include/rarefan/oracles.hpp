#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rarefan/errors.hpp"
#include "rarefan/hammersley_lpp.hpp"
#include "rarefan/lattice_lpp.hpp"
#include "rarefan/rng.hpp"

// Brute-force reference computations. None of these call into the code they
// are meant to check.
namespace rarefan::oracles {

struct OracleReport {
  std::string quantity;
  double oracle = 0.0;
  double main = 0.0;
  double difference = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  long cost = 0;  // instances × size
};

inline OracleReport make_report(std::string name, double oracle, double main, double tol, long cost) {
  OracleReport r{std::move(name), oracle, main, std::abs(oracle - main), tol, false, cost};
  r.pass = r.difference <= tol;
  return r;
}

namespace detail {

inline void walk_paths(const WeightField& X, long x, long y, long tx, long ty, double acc, double& best) {
  if (x == tx && y == ty) {
    best = std::max(best, acc);
    return;
  }
  if (x < tx) walk_paths(X, x + 1, y, tx, ty, acc + X(x + 1, y), best);
  if (y < ty) walk_paths(X, x, y + 1, tx, ty, acc + X(x, y + 1), best);
}

}  // namespace detail

// Maximum over every up-right path, enumerated one by one.
inline double lpp_enumerate(const WeightField& X, Site from, Site to) {
  if (!dominated(from, to)) throw InvalidParameter("lpp_enumerate needs from <= to");
  if ((to.x - from.x + 1) * (to.y - from.y + 1) > 20) throw SizeError("lpp_enumerate is limited to 20 cells");
  double best = -std::numeric_limits<double>::infinity();
  detail::walk_paths(X, from.x, from.y, to.x, to.y, 0.0, best);
  return best;
}

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
};

// Longest chain p_1 < ... < p_m (strict in both coordinates) among points in
// (x0, x1] × (y0, y1], by the O(n²) recursion.
inline long lis_quadratic(const std::vector<PlanePoint>& pts, Rect r) {
  if (pts.size() > 500) throw SizeError("lis_quadratic is limited to 500 points");
  std::vector<PlanePoint> in;
  for (const auto& p : pts)
    if (p.x > r.x0 && p.x <= r.x1 && p.y > r.y0 && p.y <= r.y1) in.push_back(p);
  std::sort(in.begin(), in.end(), [](const PlanePoint& a, const PlanePoint& b) { return a.x < b.x; });
  std::vector<long> len(in.size(), 1);
  long best = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j)
      if (in[j].x < in[i].x && in[j].y < in[i].y) len[i] = std::max(len[i], len[j] + 1);
    best = std::max(best, len[i]);
  }
  return best;
}

// (1/(Γ(x)Γ(y))) ∫_0^∞ Γ(x, ρz/(1−ρ)) z^{y−1} e^{−z} dz with the finite-sum
// upper incomplete gamma, by adaptive Gauss–Kronrod on [0, ∞).
inline double gamma_compare_integrate(int x, int y, double rho) {
  if (x < 1 || y < 1 || !(rho > 0.0 && rho < 1.0)) throw DomainError("need x, y >= 1 and rho in (0,1)");
  const double c = rho / (1.0 - rho);
  auto integrand = [&](double z) {
    if (z == 0.0) return y == 1 ? 1.0 : 0.0;
    const double w = c * z;
    double term = 1.0, sum = 1.0;  // Σ_{j<x} w^j/j!
    for (int j = 1; j < x; ++j) {
      term *= w / j;
      sum += term;
    }
    return sum * std::exp(-w - z + (y - 1) * std::log(z) - std::lgamma(static_cast<double>(y)));
  };
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-13, &err);
  if (!(err <= 1e-10)) throw std::runtime_error("quadrature did not converge");
  return v;
}

struct LindleyConfig {
  long burn_in = 10000;
  long thin = 10;
};

// Stationary G/M/1 waiting times: W ← max(0, W + B − A), A a sum of k Exp(ρ)
// inter-arrival stages, B ~ Exp(1−ρ) service.
inline std::vector<double> lindley_gm1_sim(int k, double rho, std::size_t samples, std::uint64_t seed,
                                           LindleyConfig cfg = {}) {
  if (k < 1 || !(rho > 0.0 && rho < 1.0)) throw DomainError("need k >= 1 and rho in (0,1)");
  if (!(k * (1.0 - rho) > rho)) throw StabilityError("queue is not stable");
  Engine g(mix_key(seed, static_cast<std::uint64_t>(Stream::oracle), 7));
  std::exponential_distribution<double> arrive(rho), serve(1.0 - rho);
  double w = 0.0;
  auto step = [&] {
    double a = 0.0;
    for (int i = 0; i < k; ++i) a += arrive(g);
    w = std::max(0.0, w + serve(g) - a);
  };
  for (long i = 0; i < cfg.burn_in; ++i) step();
  std::vector<double> out;
  out.reserve(samples);
  while (out.size() < samples) {
    for (long i = 0; i < cfg.thin; ++i) step();
    out.push_back(w);
  }
  return out;
}

// S₊ = Exp(1−ρ) + W_∞ for the periodic profile with k holes between particles.
inline std::vector<double> s_plus_reconstruction(int k, double rho, std::size_t samples, std::uint64_t seed) {
  std::vector<double> w = lindley_gm1_sim(k, rho, samples, seed);
  Engine g(mix_key(seed, static_cast<std::uint64_t>(Stream::oracle), 8));
  std::exponential_distribution<double> first(1.0 - rho);
  for (double& v : w) v += first(g);
  return w;
}

}  // namespace rarefan::oracles
