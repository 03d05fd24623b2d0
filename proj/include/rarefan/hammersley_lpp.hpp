#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <vector>

#include "rarefan/errors.hpp"
#include "rarefan/profiles.hpp"
#include "rarefan/rng.hpp"
#include "rarefan/stats.hpp"

namespace rarefan {

struct PlanePoint {
  double x = 0.0;
  double y = 0.0;
};

// Intensity-one Poisson points in [x_min, x_max] × [0, t_max], sorted by x.
class PoissonCloud {
 public:
  PoissonCloud() = default;

  PoissonCloud(double x_min, double x_max, double t_max, std::uint64_t seed)
      : x_min_(x_min), x_max_(x_max), t_max_(t_max) {
    check_box();
    Engine g(derive_seed(seed, Stream::cloud));
    std::poisson_distribution<long> count((x_max - x_min) * t_max);
    pts_.resize(static_cast<std::size_t>(count(g)));
    for (auto& p : pts_) p = {x_min + (x_max - x_min) * uniform01(g), t_max * uniform01(g)};
    settle(g);
  }

  static PoissonCloud from_points(double x_min, double x_max, double t_max, std::vector<PlanePoint> pts) {
    PoissonCloud c;
    c.x_min_ = x_min;
    c.x_max_ = x_max;
    c.t_max_ = t_max;
    c.check_box();
    for (const auto& p : pts)
      require(p.x >= x_min && p.x <= x_max && p.y >= 0.0 && p.y <= t_max, "point outside the cloud box");
    c.pts_ = std::move(pts);
    Engine g(0x5eed);
    c.settle(g);
    return c;
  }

  const std::vector<PlanePoint>& points() const { return pts_; }
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double t_max() const { return t_max_; }

  // first index with x > a
  std::size_t after(double a) const {
    return static_cast<std::size_t>(
        std::upper_bound(pts_.begin(), pts_.end(), a, [](double v, const PlanePoint& p) { return v < p.x; }) -
        pts_.begin());
  }

 private:
  void check_box() const {
    require(x_min_ <= x_max_, "cloud needs x_min <= x_max");
    require(t_max_ >= 0.0, "cloud needs t_max >= 0");
  }

  // sort by x and redraw any point sharing a coordinate with another
  void settle(Engine& g) {
    for (int round = 0;; ++round) {
      std::sort(pts_.begin(), pts_.end(), [](const PlanePoint& a, const PlanePoint& b) { return a.x < b.x; });
      std::vector<double> ys;
      ys.reserve(pts_.size());
      for (const auto& p : pts_) ys.push_back(p.y);
      std::sort(ys.begin(), ys.end());
      std::vector<double> dup_y;
      for (std::size_t i = 1; i < ys.size(); ++i)
        if (ys[i] == ys[i - 1]) dup_y.push_back(ys[i]);
      bool redrawn = false;
      for (std::size_t i = 0; i < pts_.size(); ++i) {
        const bool dx = (i > 0 && pts_[i].x == pts_[i - 1].x);
        const bool dy = std::binary_search(dup_y.begin(), dup_y.end(), pts_[i].y);
        if (dx || dy) {
          if (round > 64) throw InvalidParameter("cloud points repeat a coordinate");
          pts_[i] = {x_min_ + (x_max_ - x_min_) * uniform01(g), t_max_ * uniform01(g)};
          redrawn = true;
        }
      }
      if (!redrawn) return;
    }
  }

  double x_min_ = 0.0, x_max_ = 0.0, t_max_ = 0.0;
  std::vector<PlanePoint> pts_;
};

// Longest strictly increasing chain of cloud points in (z.x, v.x] × (z.y, v.y].
inline long longest_increasing_path(const PoissonCloud& cloud, PlanePoint z, PlanePoint v) {
  if (!(z.x <= v.x && z.y <= v.y)) throw InvalidParameter("longest_increasing_path needs z <= v");
  std::vector<double> tails;
  for (std::size_t i = cloud.after(z.x); i < cloud.points().size(); ++i) {
    const PlanePoint& p = cloud.points()[i];
    if (p.x > v.x) break;
    if (p.y <= z.y || p.y > v.y) continue;
    auto it = std::lower_bound(tails.begin(), tails.end(), p.y);
    if (it == tails.end()) tails.push_back(p.y); else *it = p.y;
  }
  return static_cast<long>(tails.size());
}

// For points sorted by x: g[i] = longest chain starting at point i (inclusive),
// staying inside the given range.
inline std::vector<long> chains_from(const std::vector<PlanePoint>& pts) {
  std::vector<long> g(pts.size());
  std::vector<double> tails;  // negated heights
  for (std::size_t r = pts.size(); r-- > 0;) {
    const double key = -pts[r].y;
    auto it = std::lower_bound(tails.begin(), tails.end(), key);
    g[r] = static_cast<long>(it - tails.begin()) + 1;
    if (it == tails.end()) tails.push_back(key); else *it = key;
  }
  return g;
}

struct LnuResult {
  double value = 0.0;       // −inf when no start is admissible
  double argmax_z = 0.0;
  bool edge_touched = false;
};

// L_ν(x,t) = sup_{z <= x} ν(z) + L((z,0),(x,t)), with the supremum over starts in
// [window_left, x]; for one-sided ν (−∞ on the left) starts are in [0, x].
inline LnuResult l_nu(const CountingProcess& nu, const PoissonCloud& cloud, double x, double t,
                      double window_left) {
  const double edge = nu.left_minus_infinity() ? 0.0 : window_left;
  LnuResult out;
  if (x < edge) {
    if (nu.left_minus_infinity()) return {-std::numeric_limits<double>::infinity(), x, false};
    throw WindowError("query left of the start window");
  }
  if (edge < cloud.x_min() || x > cloud.x_max() || t > cloud.t_max())
    throw WindowError("cloud does not cover the passage rectangle");
  std::vector<PlanePoint> box;
  for (std::size_t i = cloud.after(edge); i < cloud.points().size(); ++i) {
    const PlanePoint& p = cloud.points()[i];
    if (p.x > x) break;
    if (p.y <= t) box.push_back(p);
  }
  const std::vector<long> g = chains_from(box);
  std::vector<long> suffix(box.size() + 1, 0);
  for (std::size_t i = box.size(); i-- > 0;) suffix[i] = std::max(suffix[i + 1], g[i]);
  auto gain = [&](double z) {
    const auto it = std::upper_bound(box.begin(), box.end(), z, [](double v, const PlanePoint& p) { return v < p.x; });
    return suffix[static_cast<std::size_t>(it - box.begin())];
  };
  double level = nu.left_minus_infinity() ? 0.0 : nu.nu(edge);
  out.value = level + static_cast<double>(gain(edge));
  out.argmax_z = edge;
  for (const Atom& a : nu.atoms(edge, x)) {
    level += a.mass;
    const double v = level + static_cast<double>(gain(a.loc));
    if (v > out.value) {
      out.value = v;
      out.argmax_z = a.loc;
    }
  }
  out.edge_touched = out.argmax_z == edge && !nu.left_minus_infinity();
  return out;
}

// Y(t) from the passage description: the smallest candidate x >= 0 with
// L_{ν⁺}(x,t) >= L_{ν⁻}(x,t). Candidates are 0, cloud abscissae and atoms in (0, B].
inline double second_class_by_passage(const CountingProcess& nu, const PoissonCloud& cloud, double t,
                                      double window_left, double window_right) {
  const CountingProcess plus = nu.plus(), minus = nu.minus();
  std::vector<double> cand{0.0};
  for (std::size_t i = cloud.after(0.0); i < cloud.points().size(); ++i) {
    const PlanePoint& p = cloud.points()[i];
    if (p.x > window_right) break;
    if (p.y <= t) cand.push_back(p.x);
  }
  for (const Atom& a : nu.atoms(0.0, window_right)) cand.push_back(a.loc);
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  for (double x : cand)
    if (l_nu(plus, cloud, x, t, window_left).value >= l_nu(minus, cloud, x, t, window_left).value) return x;
  throw WindowError("second class particle not located inside the window");
}

enum class Domination { holds, violated, precondition_unmet };

struct DominationWitness {
  Domination status = Domination::holds;
  double lhs = 0.0;  // L_ν(y,t) − L_ν(x,t)
  double rhs = 0.0;  // L(0,(y,t)) − L(0,(x,t))
};

// L_ν(y,t) − L_ν(x,t) <= L(0,(y,t)) − L(0,(x,t)) for 0 <= x <= y < Y(t).
inline DominationWitness domination_check(const CountingProcess& nu, const PoissonCloud& cloud, double x,
                                          double y, double t, double y_second_class, double window_left) {
  DominationWitness w;
  if (!(0.0 <= x && x <= y && y < y_second_class)) {
    w.status = Domination::precondition_unmet;
    return w;
  }
  w.lhs = l_nu(nu, cloud, y, t, window_left).value - l_nu(nu, cloud, x, t, window_left).value;
  w.rhs = static_cast<double>(longest_increasing_path(cloud, {0.0, 0.0}, {y, t}) -
                              longest_increasing_path(cloud, {0.0, 0.0}, {x, t}));
  w.status = w.lhs <= w.rhs ? Domination::holds : Domination::violated;
  return w;
}

struct IntensityReport {
  double intensity = 0.0;  // √tan α
  double mean = 0.0;
  double ks = 0.0;
  double pvalue = 0.0;
  std::vector<long> counts;
};

// Busemann increments along the horizontal axis: counts L((k,0),z) − L((k+1,0),z)
// over unit intervals, with z at distance R in direction α. Blocks of `block`
// consecutive intervals share one cloud and one target.
inline IntensityReport equilibrium_intensity_check(double alpha, double R, std::size_t intervals,
                                                   std::uint64_t seed, std::size_t block = 100) {
  if (!(alpha > 0.0 && alpha < std::numbers::pi / 2)) throw DomainError("ray angle must lie in (0, pi/2)");
  require(R > 0.0 && block >= 1 && intervals >= 1, "need R > 0 and at least one interval");
  IntensityReport rep;
  rep.intensity = std::sqrt(std::tan(alpha));
  const std::size_t blocks = (intervals + block - 1) / block;
  for (std::size_t b = 0; b < blocks; ++b) {
    const double zx = static_cast<double>(block) / 2.0 + R * std::cos(alpha);
    const double zy = R * std::sin(alpha);
    const PoissonCloud cloud(0.0, zx, zy, derive_seed(seed, Stream::cloud, b));
    const std::vector<long> g = chains_from(cloud.points());
    std::vector<long> suffix(g.size() + 1, 0);
    for (std::size_t i = g.size(); i-- > 0;) suffix[i] = std::max(suffix[i + 1], g[i]);
    auto h = [&](double z) { return suffix[cloud.after(z)]; };
    for (std::size_t k = 0; k < block && rep.counts.size() < intervals; ++k)
      rep.counts.push_back(h(static_cast<double>(k)) - h(static_cast<double>(k + 1)));
  }
  double s = 0;
  for (long c : rep.counts) s += static_cast<double>(c);
  rep.mean = s / static_cast<double>(rep.counts.size());
  rep.ks = ks_discrete(rep.counts, [&](long k) { return poisson_cdf(k, rep.intensity); });
  rep.pvalue = ks_pvalue(rep.ks, static_cast<double>(rep.counts.size()));
  return rep;
}

inline void write_cloud_csv(std::ostream& os, const PoissonCloud& c) {
  os << "# schema=cloud/1\nx,y\n";
  char buf[96];
  for (const auto& p : c.points()) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.x, p.y);
    os << buf;
  }
}

}  // namespace rarefan
