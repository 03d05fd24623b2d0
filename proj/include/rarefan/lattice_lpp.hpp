#pragma once

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <vector>

#include "rarefan/errors.hpp"
#include "rarefan/profiles.hpp"
#include "rarefan/rng.hpp"

namespace rarefan {

// Lazy i.i.d. Exp(1) weights keyed by (seed, x, y). Values are rounded to the
// grid 2^-32 so sums of a few million weights are exact in double precision;
// passage-time differences then obey additivity bit for bit.
class WeightField {
 public:
  explicit WeightField(std::uint64_t seed) : seed_(seed) {}
  WeightField(std::uint64_t seed, long x_min, long y_min, long x_max, long y_max)
      : seed_(seed), x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max) {}

  double operator()(long x, long y) const {
    const double u = counter_uniform(seed_, static_cast<std::uint64_t>(Stream::weights), as_key(x), as_key(y));
    const double w = std::ldexp(std::nearbyint(-std::log(u) * 0x1.0p32), -32);
    return w > 0.0 ? w : 0x1.0p-32;
  }

  bool contains(long x, long y) const { return x >= x_min_ && x <= x_max_ && y >= y_min_ && y <= y_max_; }
  void check(long x0, long y0, long x1, long y1) const {
    if (!contains(x0, y0) || !contains(x1, y1)) throw WindowError("rectangle leaves the weight window");
  }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  long x_min_ = LONG_MIN / 4, y_min_ = LONG_MIN / 4, x_max_ = LONG_MAX / 4, y_max_ = LONG_MAX / 4;
};

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// Max over up-right paths of the weights, start excluded, end included.
inline double lpp_value(const WeightField& X, Site from, Site to) {
  if (!dominated(from, to)) throw InvalidParameter("lpp_value needs from <= to coordinatewise");
  X.check(from.x, from.y, to.x, to.y);
  const long w = to.x - from.x + 1;
  std::vector<double> row(static_cast<std::size_t>(w));
  for (long y = from.y; y <= to.y; ++y) {
    for (long i = 0; i < w; ++i) {
      const long x = from.x + i;
      if (y == from.y && i == 0) { row[0] = 0.0; continue; }
      double best = neg_inf;
      if (i > 0) best = row[static_cast<std::size_t>(i - 1)];
      if (y > from.y) best = std::max(best, row[static_cast<std::size_t>(i)]);
      row[static_cast<std::size_t>(i)] = best + X(x, y);
    }
  }
  return row.back();
}

struct Anchor {
  Site site;
  long index = 0;  // σ index, or any caller tag
};

// Multi-source passage times over a rectangle. Anchors are boundary cells: they
// hold 0 and a path reaching one restarts there without collecting its weight.
// The optional blocked cell is never entered. Cells unreachable from every
// anchor hold −inf.
struct PassageTable {
  long x0 = 0, y0 = 0, x1 = -1, y1 = -1;
  std::vector<double> value;
  std::vector<long> argmax;

  long width() const { return x1 - x0 + 1; }
  bool inside(long x, long y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  std::size_t idx(long x, long y) const {
    return static_cast<std::size_t>((y - y0) * width() + (x - x0));
  }
  double at(long x, long y) const {
    if (!inside(x, y)) throw WindowError("query outside the passage table");
    return value[idx(x, y)];
  }
  long anchor_at(long x, long y) const { return argmax[idx(x, y)]; }
};

inline PassageTable passage_table(const WeightField& X, std::vector<Anchor> anchors, long x0, long y0,
                                  long x1, long y1, std::optional<Site> blocked = std::nullopt) {
  require(x0 <= x1 && y0 <= y1, "empty passage table rectangle");
  X.check(x0, y0, x1, y1);
  std::sort(anchors.begin(), anchors.end(), [](const Anchor& a, const Anchor& b) {
    return a.site.y != b.site.y ? a.site.y < b.site.y : a.site.x < b.site.x;
  });
  PassageTable t{x0, y0, x1, y1, {}, {}};
  const std::size_t n = static_cast<std::size_t>((x1 - x0 + 1) * (y1 - y0 + 1));
  t.value.assign(n, neg_inf);
  t.argmax.assign(n, LONG_MIN);
  std::size_t ai = 0;
  for (long y = y0; y <= y1; ++y) {
    for (long x = x0; x <= x1; ++x) {
      double best = neg_inf;
      long arg = LONG_MIN;
      if (x > x0 && t.value[t.idx(x - 1, y)] > best) {
        best = t.value[t.idx(x - 1, y)];
        arg = t.argmax[t.idx(x - 1, y)];
      }
      if (y > y0 && t.value[t.idx(x, y - 1)] > best) {
        best = t.value[t.idx(x, y - 1)];
        arg = t.argmax[t.idx(x, y - 1)];
      }
      if (best > neg_inf) best += X(x, y);
      while (ai < anchors.size() &&
             (anchors[ai].site.y < y || (anchors[ai].site.y == y && anchors[ai].site.x < x)))
        ++ai;
      if (ai < anchors.size() && anchors[ai].site.y == y && anchors[ai].site.x == x) {
        best = 0.0;
        arg = anchors[ai].index;
        ++ai;
      }
      if (blocked && blocked->x == x && blocked->y == y) {
        best = neg_inf;
        arg = LONG_MIN;
      }
      t.value[t.idx(x, y)] = best;
      t.argmax[t.idx(x, y)] = arg;
    }
  }
  return t;
}

struct SigmaPassage {
  double value = 0.0;
  long argmax_k = 0;
  bool empty = true;         // no anchor on this side lies below-left of the target
  bool edge_touched = false; // maximizer is the outermost index considered
};

// L(σ±, target): σ cells are zero-valued boundary cells, as in the growth
// picture, and no path crosses σ(0). Read literally as a sup of point-to-point
// passage times, paths through σ(0) would tie the two sides.
inline SigmaPassage sigma_passage(const WeightField& X, const SigmaPath& sigma, Side side, Site target,
                                  long k_window) {
  require(k_window >= 1, "k_window must be positive");
  const long lo = side == Side::minus ? std::max(-k_window, sigma.k_lo) : 1;
  const long hi = side == Side::minus ? -1 : std::min(k_window, sigma.k_hi);
  if (side == Side::minus && -k_window < sigma.k_lo) throw WindowError("sigma segment shorter than k_window");
  if (side == Side::plus && k_window > sigma.k_hi) throw WindowError("sigma segment shorter than k_window");
  std::vector<Anchor> anchors;
  long x0 = target.x, y0 = target.y;
  for (long k = lo; k <= hi; ++k) {
    const Site s = sigma.at(k);
    if (!dominated(s, target)) continue;
    anchors.push_back({s, k});
    x0 = std::min(x0, s.x);
    y0 = std::min(y0, s.y);
  }
  SigmaPassage out;
  if (anchors.empty()) return out;
  const PassageTable t = passage_table(X, anchors, x0, y0, target.x, target.y, sigma.at(0));
  out.empty = false;
  out.value = t.at(target.x, target.y);
  out.argmax_k = t.anchor_at(target.x, target.y);
  out.edge_touched = out.argmax_k == (side == Side::minus ? lo : hi);
  return out;
}

// ---------------------------------------------------------------------------
// Competition interface

struct InterfacePath {
  std::vector<Site> points;        // φ_0 = (0,0), ..., φ_n
  std::vector<double> difference;  // L(σ⁺, φ_j) − L(σ⁻, φ_j)
  long checked_cells = 0;          // cells whose color was checked against the path
  bool anchors_truncated = false;  // sigma segment ended while still relevant

  double angle() const {
    const Site& e = points.back();
    return std::atan2(static_cast<double>(e.y), static_cast<double>(e.x));
  }
};

// Traces the boundary between the red cells (L(σ⁺,·) >= L(σ⁻,·)) and the blue
// cells over n steps, with the same boundary convention as sigma_passage.
// The difference L(σ⁺,·) − L(σ⁻,·) is nondecreasing along rows and
// nonincreasing up columns, so the path goes up exactly when the cell above
// is red. Colors are rebuilt row by row and the separation is checked on
// every cell of the triangle x + y <= n.
inline InterfacePath competition_interface_trace(const WeightField& X, const SigmaPath& sigma, long n_steps) {
  require(n_steps >= 1, "interface needs at least one step");
  const long top = n_steps + 1;
  InterfacePath out;
  std::vector<Anchor> minus, plus;
  for (long k = -1; k >= sigma.k_lo; --k) {
    const Site s = sigma.at(k);
    if (s.y > top) break;
    minus.push_back({s, k});
  }
  for (long k = 1; k <= sigma.k_hi; ++k) {
    const Site s = sigma.at(k);
    if (s.x > top) break;
    plus.push_back({s, k});
  }
  if (minus.empty() || plus.empty()) throw InvalidParameter("interface needs anchors on both sides of the origin");
  out.anchors_truncated = (sigma.at(sigma.k_lo).y <= top && minus.back().index == sigma.k_lo) ||
                          (sigma.at(sigma.k_hi).x <= top && plus.back().index == sigma.k_hi);
  long x0 = 0, y0 = 0;
  for (const auto& a : minus) x0 = std::min(x0, a.site.x), y0 = std::min(y0, a.site.y);
  for (const auto& a : plus) x0 = std::min(x0, a.site.x), y0 = std::min(y0, a.site.y);
  const long width = top - x0 + 1;
  auto by_row = [](std::vector<Anchor>& v) {
    std::sort(v.begin(), v.end(), [](const Anchor& a, const Anchor& b) {
      return a.site.y != b.site.y ? a.site.y < b.site.y : a.site.x < b.site.x;
    });
  };
  by_row(minus);
  by_row(plus);

  // rolling DP rows for both anchor sets
  std::vector<double> m_row(static_cast<std::size_t>(width), neg_inf), p_row = m_row;
  std::size_t mi = 0, pi = 0;
  long row_y = y0 - 1;
  auto advance = [&]() {
    ++row_y;
    const long xmax = top - std::max(row_y, 0L);
    for (long x = x0; x <= xmax; ++x) {
      const std::size_t i = static_cast<std::size_t>(x - x0);
      double wgt = 0.0;
      bool have_w = false;
      auto step = [&](std::vector<double>& row, std::vector<Anchor>& as, std::size_t& ai) {
        double best = row[i];  // value from the row below
        if (x > x0) best = std::max(best, row[i - 1]);
        if (best > neg_inf) {
          if (!have_w) wgt = X(x, row_y), have_w = true;
          best += wgt;
        }
        if (ai < as.size() && as[ai].site.y == row_y && as[ai].site.x == x) {
          best = 0.0;
          ++ai;
        }
        if (x == 0 && row_y == 0) best = neg_inf;
        row[i] = best;
      };
      step(m_row, minus, mi);
      step(p_row, plus, pi);
    }
    // cells right of xmax are never read again
  };
  auto red = [&](long x) {
    const std::size_t i = static_cast<std::size_t>(x - x0);
    return p_row[i] >= m_row[i];
  };
  auto diff = [&](long x) {
    const std::size_t i = static_cast<std::size_t>(x - x0);
    return p_row[i] - m_row[i];
  };

  while (row_y < 0) advance();
  // row 0 colors are kept while the next row is built
  std::vector<double> cur_diff(static_cast<std::size_t>(top + 1));
  auto snapshot = [&]() {
    const long xmax = top - std::max(row_y, 0L);
    for (long x = 0; x <= xmax; ++x) cur_diff[static_cast<std::size_t>(x)] = diff(x);
  };
  snapshot();
  long cur_y = 0, px = 0, row_entry = 0;
  out.points.push_back({0, 0});
  out.difference.push_back(0.0);  // σ(0) itself is shared by neither side

  auto verify_row = [&](long y, long a, long b, bool closed) {
    const long lim = n_steps - y;
    for (long x = 0; x < a && x <= lim; ++x, ++out.checked_cells)
      if (cur_diff[static_cast<std::size_t>(x)] >= 0.0)
        throw CouplingError("red cell above-left of the competition interface");
    if (!closed) return;
    for (long x = b + 1; x <= lim; ++x, ++out.checked_cells)
      if (cur_diff[static_cast<std::size_t>(x)] < 0.0)
        throw CouplingError("blue cell below-right of the competition interface");
  };

  advance();  // row 1
  for (long s = 0; s < n_steps; ++s) {
    if (red(px)) {
      verify_row(cur_y, row_entry, px, true);
      snapshot();
      ++cur_y;
      row_entry = px;
      if (s + 1 < n_steps) advance();
    } else {
      ++px;
    }
    out.points.push_back({px, cur_y});
    out.difference.push_back(cur_diff[static_cast<std::size_t>(px)]);
  }
  verify_row(cur_y, row_entry, px, false);
  return out;
}

// σ segment long enough for an n-step interface from a profile.
inline SigmaPath interface_sigma(const TasepProfile& eta, long n_steps) {
  const long k = 8 * n_steps + 16 + 2 * eta.window();
  return sigma_from_eta(eta, -k, k);
}

// ---------------------------------------------------------------------------
// Busemann differences

// G(p) = L(p, z) over the rectangle [x0, z.x] × [y0, z.y].
struct PointToTarget {
  Site z;
  long x0 = 0, y0 = 0;
  std::vector<double> g;

  double at(Site p) const {
    if (p.x < x0 || p.y < y0 || p.x > z.x || p.y > z.y) throw DomainError("point is not below-left of the target");
    return g[static_cast<std::size_t>((p.y - y0) * (z.x - x0 + 1) + (p.x - x0))];
  }
};

inline PointToTarget passage_to_target(const WeightField& X, Site z, long x0, long y0) {
  require(x0 <= z.x && y0 <= z.y, "empty rectangle");
  X.check(x0, y0, z.x, z.y);
  PointToTarget t{z, x0, y0, {}};
  const long w = z.x - x0 + 1, h = z.y - y0 + 1;
  t.g.assign(static_cast<std::size_t>(w * h), 0.0);
  for (long y = z.y; y >= y0; --y) {
    for (long x = z.x; x >= x0; --x) {
      const std::size_t i = static_cast<std::size_t>((y - y0) * w + (x - x0));
      if (x == z.x && y == z.y) continue;
      double best = neg_inf;
      if (x < z.x) best = t.g[i + 1] + X(x + 1, y);
      if (y < z.y) best = std::max(best, t.g[i + static_cast<std::size_t>(w)] + X(x, y + 1));
      t.g[i] = best;
    }
  }
  return t;
}

inline Site ray_target(double alpha, double R, Site origin = {0, 0}) {
  if (!(alpha > 0.0 && alpha < std::numbers::pi / 2)) throw DomainError("ray angle must lie in (0, pi/2)");
  return {origin.x + static_cast<long>(std::floor(R * std::cos(alpha))),
          origin.y + static_cast<long>(std::floor(R * std::sin(alpha)))};
}

// L(y, z_α) − L(x, z_α) with z_α = ⌊R(cos α, sin α)⌋.
inline double busemann_difference(const WeightField& X, Site x, Site y, double alpha, double R) {
  const Site z = ray_target(alpha, R);
  if (!dominated(x, z) || !dominated(y, z)) throw DomainError("ray target does not dominate both points");
  const PointToTarget t = passage_to_target(X, z, std::min(x.x, y.x), std::min(x.y, y.y));
  return t.at(y) - t.at(x);
}

struct BusemannDoubling {
  double at_r = 0.0;
  double at_2r = 0.0;
  double change = 0.0;
  bool stable = false;
};

// Finite-R estimate with a doubling check.
inline BusemannDoubling busemann_doubling(const WeightField& X, Site x, Site y, double alpha, double R,
                                          double tol) {
  BusemannDoubling d;
  d.at_r = busemann_difference(X, x, y, alpha, R);
  d.at_2r = busemann_difference(X, x, y, alpha, 2.0 * R);
  d.change = std::abs(d.at_2r - d.at_r);
  d.stable = d.change <= tol;
  return d;
}

struct SigmaIncrement {
  long k = 0;
  bool right_step = false;  // σ(k) − σ(k−1) = (1,0)
  double value = 0.0;       // (X + L)(σ(k), z) − (X + L)(σ(k−1), z)
};

// Increments of the finite-R Busemann function along σ over k in (k_lo, k_hi],
// for passage times that count the start weight. With σ as a boundary these
// are the increments seen by the growth region, whose first layer is σ + (1,1).
inline std::vector<SigmaIncrement> busemann_sigma_increments(const WeightField& X, const SigmaPath& sigma,
                                                             long k_lo, long k_hi, double alpha, double R) {
  require(k_lo < k_hi, "need k_lo < k_hi");
  const Site z = ray_target(alpha, R);
  const Site a = sigma.at(k_lo), b = sigma.at(k_hi);
  if (!dominated(a, z) || !dominated(b, z)) throw DomainError("ray target does not dominate the sigma segment");
  const PointToTarget t = passage_to_target(X, z, a.x, b.y);
  std::vector<SigmaIncrement> out;
  for (long k = k_lo + 1; k <= k_hi; ++k) {
    const Site p = sigma.at(k - 1), q = sigma.at(k);
    out.push_back({k, q.x > p.x, (X(q.x, q.y) + t.at(q)) - (X(p.x, p.y) + t.at(p))});
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV export: k, x, y, value

inline void write_interface_csv(std::ostream& os, const InterfacePath& path) {
  os << "# schema=interface/1\nk,x,y,value\n";
  char buf[128];
  for (std::size_t k = 0; k < path.points.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%ld,%ld,%.17g\n", k, path.points[k].x, path.points[k].y,
                  path.difference[k]);
    os << buf;
  }
}

inline void write_passage_csv(std::ostream& os, const PassageTable& t) {
  os << "# schema=passage/1\nk,x,y,value\n";
  char buf[160];
  for (long y = t.y0; y <= t.y1; ++y)
    for (long x = t.x0; x <= t.x1; ++x) {
      std::snprintf(buf, sizeof buf, "%ld,%ld,%ld,%.17g\n", t.anchor_at(x, y), x, y, t.at(x, y));
      os << buf;
    }
}

}  // namespace rarefan
