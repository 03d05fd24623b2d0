#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <queue>
#include <string>
#include <variant>
#include <vector>

#include "rarefan/errors.hpp"
#include "rarefan/hammersley_lpp.hpp"
#include "rarefan/parallel.hpp"
#include "rarefan/profiles.hpp"
#include "rarefan/rng.hpp"
#include "rarefan/stats.hpp"

namespace rarefan {

// ---------------------------------------------------------------------------
// TASEP

// Sites [-half_width, half_width]; outside, sites are refreshed from
// reservoirs of the given densities.
struct TasepWindow {
  long half_width = 0;
  long margin = 16;
  double left_density = 1.0;
  double right_density = 0.0;
};

// Light-cone window: the discrepancy moves at most one site per ring, so
// |X(t)| <= t + c·sqrt(t log n) holds for all n replicas with high probability.
inline TasepWindow light_cone_window(const TasepProfile& eta, double t, std::size_t replicas, double c = 3.0,
                                     long margin = 16) {
  require(t >= 0.0, "time must be non-negative");
  const double n = std::max<double>(2.0, static_cast<double>(replicas));
  TasepWindow w;
  w.margin = margin;
  w.half_width = static_cast<long>(std::ceil(t + c * std::sqrt(std::max(t, 1.0) * std::log(n)))) + 2 * margin +
                 eta.window();
  w.left_density = eta.left_tail().density();
  w.right_density = eta.right_tail().density();
  return w;
}

struct TrajectoryPoint {
  double time = 0.0;
  long position = 0;
};

struct TasepOutcome {
  long position = 0;
  double speed = 0.0;
  std::size_t events = 0;
  std::vector<TrajectoryPoint> trajectory;
};

namespace detail {

// Coupled pair η ≤ η′ on a window, differing at the single site X.
class CoupledPair {
 public:
  CoupledPair(const TasepProfile& eta, const TasepWindow& w) : w_(w), n_(2 * w.half_width + 1) {
    require(w.half_width > w.margin, "window must exceed its margin");
    a_.resize(static_cast<std::size_t>(n_));
    for (long i = 0; i < n_; ++i) a_[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(eta(i - w.half_width));
    b_ = a_;
    x_ = w.half_width;
    a_[static_cast<std::size_t>(x_)] = 0;
    b_[static_cast<std::size_t>(x_)] = 1;
    for (long i = 0; i < n_; ++i) particles_ += a_[static_cast<std::size_t>(i)];
  }

  // Bond i -> i+1 fires in both copies.
  void fire(long i) {
    auto jump = [&](std::vector<std::uint8_t>& c) {
      if (c[static_cast<std::size_t>(i)] && !c[static_cast<std::size_t>(i + 1)]) {
        c[static_cast<std::size_t>(i)] = 0;
        c[static_cast<std::size_t>(i + 1)] = 1;
      }
    };
    jump(a_);
    jump(b_);
    if (x_ == i || x_ == i + 1) {
      const bool di = a_[static_cast<std::size_t>(i)] != b_[static_cast<std::size_t>(i)];
      const bool dj = a_[static_cast<std::size_t>(i + 1)] != b_[static_cast<std::size_t>(i + 1)];
      if (di == dj) throw CouplingError("coupled configurations no longer differ at exactly one site");
      x_ = di ? i : i + 1;
      if (x_ < w_.margin || x_ >= n_ - w_.margin) throw WindowError("discrepancy reached the window margin");
    }
  }

  bool occupied(long i) const { return a_[static_cast<std::size_t>(i)] != 0; }
  bool can_fire(long i) const {
    return (a_[static_cast<std::size_t>(i)] && !a_[static_cast<std::size_t>(i + 1)]) ||
           (b_[static_cast<std::size_t>(i)] && !b_[static_cast<std::size_t>(i + 1)]);
  }
  void enter() {
    a_[0] = b_[0] = 1;
    ++particles_;
  }
  void leave() {
    a_[static_cast<std::size_t>(n_ - 1)] = b_[static_cast<std::size_t>(n_ - 1)] = 0;
    --particles_;
  }
  void check_conservation() const {
    long c = 0;
    for (auto v : a_) c += v;
    if (c != particles_) throw CouplingError("particle count drifted from boundary bookkeeping");
  }

  long size() const { return n_; }
  long discrepancy() const { return x_ - w_.half_width; }
  long raw_discrepancy() const { return x_; }

 private:
  TasepWindow w_;
  long n_;
  std::vector<std::uint8_t> a_, b_;
  long x_ = 0;
  long particles_ = 0;
};

}  // namespace detail

// Gillespie kernel over active bonds; the boundary reservoirs inject at the
// left edge at rate left_density and absorb at the right edge at rate
// 1 − right_density, which keeps Bernoulli product measures stationary.
inline TasepOutcome tasep_second_class(const TasepProfile& eta, double t, const TasepWindow& w, Engine& g,
                                       bool record = false) {
  detail::CoupledPair s(eta, w);
  const long n = s.size();
  std::vector<long> active, slot(static_cast<std::size_t>(n), -1);
  auto refresh = [&](long i) {
    if (i < 0 || i >= n - 1) return;
    const bool on = s.can_fire(i);
    long& p = slot[static_cast<std::size_t>(i)];
    if (on && p < 0) {
      p = static_cast<long>(active.size());
      active.push_back(i);
    } else if (!on && p >= 0) {
      const long last = active.back();
      active[static_cast<std::size_t>(p)] = last;
      slot[static_cast<std::size_t>(last)] = p;
      active.pop_back();
      p = -1;
    }
  };
  for (long i = 0; i + 1 < n; ++i) refresh(i);
  const double p_in = w.left_density, p_out = 1.0 - w.right_density;
  TasepOutcome out;
  if (record) out.trajectory.push_back({0.0, s.discrepancy()});
  double time = 0.0;
  for (;;) {
    const bool in_on = !s.occupied(0) && p_in > 0.0;
    const bool out_on = s.occupied(n - 1) && p_out > 0.0;
    const double bulk = static_cast<double>(active.size());
    const double rate = bulk + (in_on ? p_in : 0.0) + (out_on ? p_out : 0.0);
    if (rate <= 0.0) break;
    time += exp_draw(g, rate);
    if (time > t) break;
    double u = uniform01(g) * rate;
    ++out.events;
    if (u < bulk) {
      const long i = active[std::min(static_cast<std::size_t>(u), active.size() - 1)];
      const long before = s.raw_discrepancy();
      s.fire(i);
      refresh(i - 1);
      refresh(i);
      refresh(i + 1);
      if (record && s.raw_discrepancy() != before) out.trajectory.push_back({time, s.discrepancy()});
      continue;
    }
    u -= bulk;
    if (in_on && u < p_in) {
      s.enter();
      refresh(0);
    } else {
      s.leave();
      refresh(n - 2);
    }
  }
  s.check_conservation();
  out.position = s.discrepancy();
  out.speed = t > 0.0 ? static_cast<double>(out.position) / t : 0.0;
  return out;
}

// Per-site rate-one Poisson epochs on [0, t_max], each site on its own stream.
class ClockField {
 public:
  ClockField(std::uint64_t seed, double t_max) : seed_(seed), t_max_(t_max) {
    require(t_max >= 0.0, "clock horizon must be non-negative");
  }

  std::vector<double> epochs(long site) const {
    SplitMix g(mix_key(seed_, static_cast<std::uint64_t>(Stream::clocks), as_key(site)));
    std::vector<double> e;
    for (double s = exp_draw(g, 1.0); s <= t_max_; s += exp_draw(g, 1.0)) e.push_back(s);
    return e;
  }

  // occupancy drawn for a reservoir site at its j-th epoch
  bool reservoir(long site, std::size_t j, double density) const {
    return counter_uniform(seed_, static_cast<std::uint64_t>(Stream::reservoir), as_key(site), j) < density;
  }

  std::uint64_t seed() const { return seed_; }
  double t_max() const { return t_max_; }

 private:
  std::uint64_t seed_;
  double t_max_;
};

// Graphical construction: at each epoch of N_x, a particle at x jumps to x+1
// if that site is empty, in both coupled copies. Epochs are merged in time
// order, ties broken by site. Site −W−1 is a reservoir whose occupancy is
// redrawn at each of its epochs; the jump out of site W lands in a reservoir
// site that is empty with probability 1 − right_density.
inline TasepOutcome tasep_evolve(const TasepProfile& eta, const ClockField& clocks, double t_max,
                                 const TasepWindow& w) {
  require(t_max <= clocks.t_max(), "clock horizon shorter than the run");
  detail::CoupledPair s(eta, w);
  const long half = w.half_width;
  using Ev = std::pair<double, long>;  // (time, site)
  std::priority_queue<Ev, std::vector<Ev>, std::greater<Ev>> q;
  std::vector<std::vector<double>> ep(static_cast<std::size_t>(2 * half + 2));
  std::vector<std::size_t> next(ep.size(), 0);
  for (long x = -half - 1; x <= half; ++x) {
    auto& e = ep[static_cast<std::size_t>(x + half + 1)];
    e = clocks.epochs(x);
    if (!e.empty() && e.front() <= t_max) q.push({e.front(), x});
  }
  TasepOutcome out;
  out.trajectory.push_back({0.0, s.discrepancy()});
  while (!q.empty()) {
    const auto [time, x] = q.top();
    q.pop();
    const std::size_t slot = static_cast<std::size_t>(x + half + 1);
    const std::size_t j = next[slot]++;
    if (next[slot] < ep[slot].size() && ep[slot][next[slot]] <= t_max) q.push({ep[slot][next[slot]], x});
    ++out.events;
    const long i = x + half;  // window index
    if (x == -half - 1) {
      if (!s.occupied(0) && clocks.reservoir(x, j, w.left_density)) s.enter();
    } else if (x == half) {
      if (s.occupied(i) && clocks.reservoir(x + 1, j, 1.0 - w.right_density)) s.leave();
    } else {
      const long before = s.raw_discrepancy();
      s.fire(i);
      if (s.raw_discrepancy() != before) out.trajectory.push_back({time, s.discrepancy()});
    }
  }
  s.check_conservation();
  out.position = s.discrepancy();
  out.speed = t_max > 0.0 ? static_cast<double>(out.position) / t_max : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Hammersley

struct HammersleyWindow {
  double left = 0.0;
  double right = 0.0;
};

// Starts left of t/b² − c·t^{2/3} cannot win L_ν for x >= 0, and the second
// class particle stays left of t/a² + c·t^{2/3}.
inline HammersleyWindow hammersley_window(const CountingProcess& nu, double t, double c = 4.0) {
  const Densities d = asymptotic_densities(nu);
  if (!(d.lower > 0.0)) throw WindowError("right density must be positive to bound the second class particle");
  const double slack = c * std::pow(std::max(t, 1.0), 2.0 / 3.0) + 10.0;
  HammersleyWindow w;
  w.left = std::isinf(d.upper) ? -slack : -(t / (d.upper * d.upper) + slack);
  w.right = t / (d.lower * d.lower) + slack;
  return w;
}

struct HammersleyJump {
  double time = 0.0;
  double position = 0.0;
};

struct HammersleyTrajectory {
  std::vector<HammersleyJump> jumps;  // starts with (0, 0)
  double position = 0.0;
  std::size_t events = 0;
};

namespace detail {

// Particles of ν̄ in (left, right] with a tagged extra particle at 0.
class TaggedHammersley {
 public:
  TaggedHammersley(const CountingProcess& nu, double left, double right) {
    for (const Atom& a : nu.with_atom_at_zero().atoms(left, right))
      for (int m = 0; m < a.mass; ++m) pos_.push_back(a.loc);
    const auto it = std::upper_bound(pos_.begin(), pos_.end(), 0.0);
    tag_ = static_cast<std::size_t>(it - pos_.begin()) - 1;
  }

  // Poisson point at x: the nearest particle to the right jumps to x.
  void point(double x) {
    const std::size_t j = static_cast<std::size_t>(std::upper_bound(pos_.begin(), pos_.end(), x) - pos_.begin());
    if (j == pos_.size()) {
      pos_.push_back(x);
      return;
    }
    if (j == tag_) {
      if (j + 1 == pos_.size()) throw WindowError("second class particle left the simulated window");
      ++tag_;
    }
    pos_[j] = x;
  }

  double tag() const { return pos_[tag_]; }

 private:
  std::vector<double> pos_;
  std::size_t tag_ = 0;
};

}  // namespace detail

// Y(t) on [0, t_max] by evolving the tagged particle system through the cloud
// points in time order.
inline HammersleyTrajectory hammersley_second_class(const CountingProcess& nu, const PoissonCloud& cloud,
                                                    double t_max, double window_left) {
  if (t_max > cloud.t_max()) throw WindowError("cloud shorter than the run");
  require(window_left >= cloud.x_min(), "start window must lie inside the cloud");
  std::vector<PlanePoint> pts;
  for (const auto& p : cloud.points())
    if (p.x > window_left && p.y <= t_max) pts.push_back(p);
  std::sort(pts.begin(), pts.end(), [](const PlanePoint& a, const PlanePoint& b) { return a.y < b.y; });
  detail::TaggedHammersley sys(nu, window_left, cloud.x_max());
  HammersleyTrajectory tr;
  tr.jumps.push_back({0.0, sys.tag()});
  for (const auto& p : pts) {
    const double before = sys.tag();
    sys.point(p.x);
    ++tr.events;
    if (sys.tag() != before) tr.jumps.push_back({p.y, sys.tag()});
  }
  tr.position = sys.tag();
  return tr;
}

// Y(t) with the cloud streamed over the window box. Given their number, the
// points arrive in uniformly random order, so times need not be drawn.
inline double hammersley_speed_sample(const CountingProcess& nu, double t, const HammersleyWindow& w, Engine& g) {
  detail::TaggedHammersley sys(nu, w.left, w.right);
  const double width = w.right - w.left;
  std::poisson_distribution<long> count(width * t);
  for (long i = count(g); i > 0; --i) sys.point(w.left + width * uniform01(g));
  return sys.tag();
}

// ---------------------------------------------------------------------------
// Batches

enum class SpeedModelKind { tasep, hammersley };

struct SpeedModel {
  SpeedModelKind kind = SpeedModelKind::tasep;
  AnyProfile profile;
};

struct SpeedSample {
  std::size_t replica = 0;
  std::uint64_t seed = 0;
  double t = 0.0;
  double speed = 0.0;
};

struct SpeedReport {
  std::vector<SpeedSample> samples;  // successful replicas in replica order
  std::vector<double> sorted;
  std::vector<std::string> failures;
  double ks = 1.0;
  double pvalue = 0.0;
};

// Empirical law of X(t)/t or Y(t)/t over replicas, compared with `cdf` when given.
inline SpeedReport empirical_speed_cdf(const SpeedModel& model, double t, std::size_t replicas, std::uint64_t seed,
                                       const std::function<double(double)>& cdf = {}, unsigned threads = 0) {
  require(t > 0.0, "time must be positive");
  require(replicas >= 1, "need at least one replica");
  const auto results = run_replicas<SpeedSample>(
      replicas,
      [&](std::size_t r) {
        const std::uint64_t rs = derive_seed(seed, Stream::replica, r);
        Engine g(rs);
        SpeedSample s{r, rs, t, 0.0};
        if (model.kind == SpeedModelKind::tasep) {
          TasepProfile eta = std::get<TasepProfile>(model.profile);
          if (eta.random()) eta = eta.reseeded(derive_seed(seed, Stream::replica_profile, r));
          const TasepWindow w = light_cone_window(eta, t, replicas);
          s.speed = tasep_second_class(eta, t, w, g).speed;
        } else {
          CountingProcess nu = std::get<CountingProcess>(model.profile);
          if (nu.random()) nu = nu.reseeded(derive_seed(seed, Stream::replica_profile, r));
          s.speed = hammersley_speed_sample(nu, t, hammersley_window(nu, t), g) / t;
        }
        return s;
      },
      threads);
  SpeedReport rep;
  for (std::size_t r = 0; r < results.size(); ++r) {
    if (results[r].ok) {
      rep.samples.push_back(results[r].value);
      rep.sorted.push_back(results[r].value.speed);
    } else {
      rep.failures.push_back("replica " + std::to_string(r) + ": " + results[r].error);
    }
  }
  std::sort(rep.sorted.begin(), rep.sorted.end());
  if (cdf && !rep.sorted.empty()) {
    rep.ks = ks_statistic(rep.sorted, cdf);
    rep.pvalue = ks_pvalue(rep.ks, static_cast<double>(rep.sorted.size()));
  }
  return rep;
}

inline void write_speed_csv(std::ostream& os, const std::string& model, const SpeedReport& rep) {
  os << "# schema=speeds/1\nmodel,seed,t,speed\n";
  char buf[160];
  for (const auto& s : rep.samples) {
    std::snprintf(buf, sizeof buf, ",%llu,%.17g,%.17g\n", static_cast<unsigned long long>(s.seed), s.t, s.speed);
    os << model << buf;
  }
}

}  // namespace rarefan
