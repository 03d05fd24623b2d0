#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "rarefan/errors.hpp"
#include "rarefan/parallel.hpp"
#include "rarefan/profiles.hpp"
#include "rarefan/rng.hpp"
#include "rarefan/stats.hpp"

namespace rarefan {

// Signed exponential increments Z_k driven by η̄ and a density ρ.
class WalkEnvironment {
 public:
  WalkEnvironment(TasepProfile eta, double rho) : bar_(std::move(eta)), rho_(rho) {
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("walk density must lie in (0,1)");
  }

  double increment(long k, Engine& g) const {
    const bool particle = bar_(k) == 1;
    if (k > 0) return particle ? exp_draw(g, 1.0 - rho_) : -exp_draw(g, rho_);
    return particle ? -exp_draw(g, 1.0 - rho_) : exp_draw(g, rho_);
  }

  double rho() const { return rho_; }
  const BarProfile& bar() const { return bar_; }

 private:
  BarProfile bar_;
  double rho_;
};

// S_{1,±}, ..., S_{n,±}; the minus side starts with the k = 0 term.
inline std::vector<double> sample_environment_walk(const WalkEnvironment& env, Side side, long n,
                                                   Engine& g) {
  require(n >= 1, "walk length must be at least 1");
  std::vector<double> s(static_cast<std::size_t>(n));
  double acc = 0.0;
  for (long i = 0; i < n; ++i) {
    acc += side == Side::plus ? env.increment(i + 1, g) : env.increment(-i, g);
    s[static_cast<std::size_t>(i)] = acc;
  }
  return s;
}

// Exponential bound P(future walk ever climbs `gap` above now) <= exp(log_k - theta * gap).
struct TailBound {
  double theta = std::numeric_limits<double>::infinity();  // inf: no upward steps remain
  double log_k = 0.0;

  bool flat() const { return std::isinf(theta); }
  double gap_for(double tol) const { return flat() ? 0.0 : (log_k - std::log(tol)) / theta; }
  double certificate(double gap) const {
    if (flat()) return 0.0;
    return std::min(1.0, std::exp(log_k - theta * gap));
  }
};

struct SupEstimate {
  double value = 0.0;
  long truncation_n = 0;
  double certificate = 0.0;
};

namespace detail {

inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  // f(lo) < 0 <= f(hi)
  for (int i = 0; i < iters && hi - lo > 1e-15 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0) lo = mid; else hi = mid;
  }
  return lo;
}

}  // namespace detail

// Lundberg bound for a periodic sequence of slots; slot i is +Exp(up_rate) with
// probability q[i] and −Exp(down_rate) otherwise.
inline TailBound lundberg_bound(const std::vector<double>& q, double up_rate, double down_rate) {
  double drift = 0.0, scale = 0.0;
  bool any_up = false;
  for (double qi : q) {
    drift += qi / up_rate - (1.0 - qi) / down_rate;
    scale += qi / up_rate + (1.0 - qi) / down_rate;
    any_up = any_up || qi > 0.0;
  }
  if (drift >= -1e-12 * scale) throw DriftError("walk drift is not strictly negative");
  if (!any_up) return {};
  auto step = [&](double theta, double qi) {
    double m = 0.0;
    if (qi > 0.0) m += qi * up_rate / (up_rate - theta);
    if (qi < 1.0) m += (1.0 - qi) * down_rate / (down_rate + theta);
    return std::log(m);
  };
  auto period = [&](double theta) {
    double s = 0.0;
    for (double qi : q) s += step(theta, qi);
    return s;
  };
  // the period log-mgf is convex, zero at 0 with negative slope, and blows up at up_rate
  double lo = up_rate * 1e-9;
  while (period(lo) >= 0.0 && lo > 1e-300) lo *= 0.5;
  const double root = detail::bisect(period, lo, up_rate * (1.0 - 1e-12));
  TailBound b;
  b.theta = 0.9 * root;
  const std::size_t n = q.size();
  double worst = 0.0;
  for (std::size_t start = 0; start < n; ++start) {
    double s = 0.0;
    for (std::size_t len = 0; len < n; ++len) {
      s += step(b.theta, q[(start + len) % n]);
      worst = std::max(worst, s);
    }
  }
  b.log_k = worst;
  return b;
}

// Bound for the increments beyond the explicit core on one side.
inline TailBound tasep_tail_bound(const Tail& tail, Side side, double rho) {
  std::vector<double> q = tail.slots();
  if (side == Side::plus) return lundberg_bound(q, 1.0 - rho, rho);
  // walking left: a hole gives +Exp(ρ), a particle −Exp(1−ρ)
  std::reverse(q.begin(), q.end());
  for (double& v : q) v = 1.0 - v;
  return lundberg_bound(q, rho, 1.0 - rho);
}

inline SupEstimate walk_sup(const WalkEnvironment& env, Side side, const TailBound& bound, double tol,
                            Engine& g, long max_steps = 100000000) {
  const long core_end = env.bar().base().window() + 1;
  const double stop_gap = bound.gap_for(tol);
  double s = 0.0, best = -std::numeric_limits<double>::infinity();
  for (long n = side == Side::plus ? 1 : 0;; ++n) {
    s += side == Side::plus ? env.increment(n, g) : env.increment(-n, g);
    best = std::max(best, s);
    if (n >= core_end && best - s >= stop_gap) return {best, n, bound.certificate(best - s)};
    if (n > max_steps) throw WindowError("walk truncation did not certify within the step budget");
  }
}

struct SupCompareResult {
  Proportion estimate;
  double rho = 0.0;
  double worst_certificate = 0.0;
  long max_truncation = 0;
};

// P(sup_{n>=0} S_{n,−} >= sup_{n>=1} S_{n,+}) by Monte Carlo.
inline SupCompareResult estimate_sup_compare(const TasepProfile& eta, double rho, std::size_t replicas,
                                             double tol = 1e-6, std::uint64_t seed = 1,
                                             unsigned threads = 0) {
  require(replicas >= 1, "need at least one replica");
  require(tol > 0.0 && tol < 1.0, "tolerance must lie in (0,1)");
  const TailBound plus = tasep_tail_bound(eta.right_tail(), Side::plus, rho);
  const TailBound minus = tasep_tail_bound(eta.left_tail(), Side::minus, rho);
  struct One {
    bool success = false;
    double cert = 0.0;
    long n = 0;
  };
  const auto runs = run_indexed<One>(
      replicas,
      [&](std::size_t r) {
        const TasepProfile prof =
            eta.random() ? eta.reseeded(derive_seed(seed, Stream::replica_profile, r)) : eta;
        const WalkEnvironment env(prof, rho);
        Engine g = make_engine(seed, Stream::replica, r);
        const SupEstimate m = walk_sup(env, Side::minus, minus, tol, g);
        const SupEstimate p = walk_sup(env, Side::plus, plus, tol, g);
        return One{m.value >= p.value, std::max(m.certificate, p.certificate),
                   std::max(m.truncation_n, p.truncation_n)};
      },
      threads);
  SupCompareResult out;
  out.rho = rho;
  std::size_t hits = 0;
  for (const auto& o : runs) {
    hits += o.success;
    out.worst_certificate = std::max(out.worst_certificate, o.cert);
    out.max_truncation = std::max(out.max_truncation, o.n);
  }
  out.estimate = make_proportion(hits, replicas);
  return out;
}

// ---------------------------------------------------------------------------
// Hammersley walks: z -> ν(z) − N_ρ(z) with N_ρ a Poisson stream of intensity ρ.

// Right walk (z >= 0): atoms step up, Poisson points step down by one.
inline TailBound hammersley_right_bound(const AtomTail& tail, double rho) {
  const double tiny = 1e-12;
  switch (tail.kind) {
    case AtomTail::Kind::empty: return {};
    case AtomTail::Kind::minus_infinity: throw InvalidParameter("minus_infinity is not a right tail");
    case AtomTail::Kind::poisson: {
      if (tail.intensity >= rho * (1.0 - tiny)) throw DriftError("right walk drift is not strictly negative");
      return {0.9 * std::log(rho / tail.intensity), 0.0};
    }
    case AtomTail::Kind::periodic:
    case AtomTail::Kind::floor_deficit: {
      // floor_deficit places at most one unit per integer, so grid intensity one dominates it
      const double c = tail.kind == AtomTail::Kind::periodic ? tail.intensity : 1.0;
      if (c >= rho * (1.0 - tiny)) throw DriftError("right walk drift is not strictly negative");
      // one grid cell: up 1, down Poisson(ρ/c)
      auto cell = [&](double th) { return th + (rho / c) * (std::exp(-th) - 1.0); };
      double hi = rho / c + 1.0;
      const double root = detail::bisect(cell, 1e-12, hi);
      const double th = 0.9 * root;
      return {th, th};
    }
  }
  return {};
}

// Left walk (z < 0, read leftwards): Poisson points step up, atoms step down.
inline TailBound hammersley_left_bound(const AtomTail& tail, double rho) {
  const double tiny = 1e-12;
  switch (tail.kind) {
    case AtomTail::Kind::empty:
      throw DriftError("no atoms on the left: the left supremum is infinite");
    case AtomTail::Kind::floor_deficit: throw InvalidParameter("floor_deficit is not a left tail");
    case AtomTail::Kind::minus_infinity: return {};
    case AtomTail::Kind::poisson: {
      if (rho >= tail.intensity * (1.0 - tiny)) throw DriftError("left walk drift is not strictly negative");
      return {0.9 * std::log(tail.intensity / rho), 0.0};
    }
    case AtomTail::Kind::periodic: {
      const double c = tail.intensity;
      if (rho >= c * (1.0 - tiny)) throw DriftError("left walk drift is not strictly negative");
      auto cell = [&](double th) { return (rho / c) * std::expm1(th) - th; };
      double hi = 1.0;
      while (cell(hi) < 0.0) hi *= 2.0;
      const double th = 0.9 * detail::bisect(cell, 1e-12, hi);
      return {th, (rho / c) * std::expm1(th)};
    }
  }
  return {};
}

inline SupEstimate hammersley_right_sup(const CountingProcess& nu, double rho, const TailBound& bound,
                                        double tol, Engine& g, long max_events = 100000000) {
  const double w = nu.window();
  const double chunk = std::max(16.0, 64.0 / rho);
  const double stop_gap = bound.gap_for(tol);
  long v = 0, best = 0, events = 0;
  double next_pt = exp_draw(g, rho), fetched = 0.0;
  std::vector<Atom> buf;
  std::size_t bi = 0;
  for (;;) {
    while (bi == buf.size() && fetched <= next_pt) {
      buf = nu.atoms(fetched, fetched + chunk);
      bi = 0;
      fetched += chunk;
    }
    double z;
    // at a shared location the Poisson point is applied first
    if (bi < buf.size() && buf[bi].loc < next_pt) {
      z = buf[bi].loc;
      v += buf[bi].mass;
      ++bi;
      best = std::max(best, v);
    } else {
      z = next_pt;
      v -= 1;
      next_pt += exp_draw(g, rho);
    }
    ++events;
    if (z > w && static_cast<double>(best - v) >= stop_gap)
      return {static_cast<double>(best), events, bound.certificate(static_cast<double>(best - v))};
    if (events > max_events) throw WindowError("right walk did not certify within the event budget");
  }
}

inline SupEstimate hammersley_left_sup(const CountingProcess& nu, double rho, const TailBound& bound,
                                       double tol, Engine& g, long max_events = 100000000) {
  if (nu.left_minus_infinity()) return {-std::numeric_limits<double>::infinity(), 0, 0.0};
  const double w = nu.window();
  const double chunk = std::max(16.0, 64.0 / rho);
  const double stop_gap = bound.gap_for(tol);
  long v = -nu.mass_at_zero(), events = 0;
  long best = v;
  double next_pt = -exp_draw(g, rho), fetched = 0.0;
  std::vector<Atom> buf;
  std::size_t bi = 0;
  for (;;) {
    while (bi == buf.size() && fetched >= next_pt) {
      buf = nu.atoms(fetched - chunk, fetched);
      if (!buf.empty() && buf.back().loc == 0.0) buf.pop_back();
      std::reverse(buf.begin(), buf.end());
      bi = 0;
      fetched -= chunk;
    }
    double z;
    // at a shared location the atom is removed before the point is counted
    if (bi < buf.size() && buf[bi].loc >= next_pt) {
      z = buf[bi].loc;
      v -= buf[bi].mass;
      ++bi;
    } else {
      z = next_pt;
      v += 1;
      best = std::max(best, v);
      next_pt -= exp_draw(g, rho);
    }
    ++events;
    if (z < -w && static_cast<double>(best - v) >= stop_gap)
      return {static_cast<double>(best), events, bound.certificate(static_cast<double>(best - v))};
    if (events > max_events) throw WindowError("left walk did not certify within the event budget");
  }
}

// P(sup_{z>=0} {ν(z) − ν̄_ρ(z)} >= sup_{z<0} {ν(z) − ν̄_ρ(z)}) by Monte Carlo.
inline SupCompareResult hammersley_sup_compare(const CountingProcess& nu, double rho, std::size_t replicas,
                                               double tol = 1e-6, std::uint64_t seed = 1,
                                               unsigned threads = 0) {
  require(replicas >= 1, "need at least one replica");
  require(rho > 0.0, "intensity must be positive");
  const TailBound right = hammersley_right_bound(nu.right_tail(), rho);
  const TailBound left = hammersley_left_bound(nu.left_tail(), rho);
  struct One {
    bool success = false;
    double cert = 0.0;
    long n = 0;
  };
  const auto runs = run_indexed<One>(
      replicas,
      [&](std::size_t r) {
        const CountingProcess prof =
            nu.random() ? nu.reseeded(derive_seed(seed, Stream::replica_profile, r)) : nu;
        Engine g = make_engine(seed, Stream::replica, r);
        const SupEstimate l = hammersley_left_sup(prof, rho, left, tol, g);
        const SupEstimate p = hammersley_right_sup(prof, rho, right, tol, g);
        return One{p.value >= l.value, std::max(l.certificate, p.certificate),
                   std::max(l.truncation_n, p.truncation_n)};
      },
      threads);
  SupCompareResult out;
  out.rho = rho;
  std::size_t hits = 0;
  for (const auto& o : runs) {
    hits += o.success;
    out.worst_certificate = std::max(out.worst_certificate, o.cert);
    out.max_truncation = std::max(out.max_truncation, o.n);
  }
  out.estimate = make_proportion(hits, replicas);
  return out;
}

}  // namespace rarefan
