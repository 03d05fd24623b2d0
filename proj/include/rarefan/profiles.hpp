#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rarefan/errors.hpp"
#include "rarefan/rng.hpp"

namespace rarefan {

inline long floor_mod(long a, long m) {
  const long r = a % m;
  return r < 0 ? r + m : r;
}

enum class Side { plus, minus };

struct Site {
  long x = 0;
  long y = 0;
  friend bool operator==(const Site&, const Site&) = default;
};

// coordinatewise order
inline bool dominated(const Site& a, const Site& b) { return a.x <= b.x && a.y <= b.y; }

// ---------------------------------------------------------------------------
// TASEP configurations

struct Tail {
  enum class Kind { constant, periodic, bernoulli };
  Kind kind = Kind::constant;
  int value = 0;
  std::vector<std::uint8_t> pattern;  // indexed by site mod pattern.size()
  double p = 0.0;

  static Tail constant(int b) {
    require(b == 0 || b == 1, "constant tail value must be 0 or 1");
    Tail t;
    t.value = b;
    return t;
  }
  static Tail periodic(std::vector<std::uint8_t> pattern) {
    require(!pattern.empty(), "periodic tail pattern must be non-empty");
    for (auto v : pattern) require(v <= 1, "periodic tail pattern entries must be 0 or 1");
    Tail t;
    t.kind = Kind::periodic;
    t.pattern = std::move(pattern);
    return t;
  }
  static Tail bernoulli(double p) {
    require(p >= 0.0 && p <= 1.0, "bernoulli tail needs 0 <= p <= 1");
    Tail t;
    t.kind = Kind::bernoulli;
    t.p = p;
    return t;
  }

  double density() const {
    switch (kind) {
      case Kind::constant: return value;
      case Kind::periodic: {
        double s = 0;
        for (auto v : pattern) s += v;
        return s / static_cast<double>(pattern.size());
      }
      case Kind::bernoulli: return p;
    }
    return 0.0;
  }

  // Per-site particle probabilities over one period, in increasing site order.
  std::vector<double> slots() const {
    switch (kind) {
      case Kind::constant: return {static_cast<double>(value)};
      case Kind::periodic: return {pattern.begin(), pattern.end()};
      case Kind::bernoulli: return {p};
    }
    return {};
  }

  bool random() const { return kind == Kind::bernoulli && p > 0.0 && p < 1.0; }
};

// η on Z: explicit core on [-W, W], tails outside. Bernoulli tails are a pure
// function of (seed, site), so reads never depend on access order.
class TasepProfile {
 public:
  TasepProfile() : TasepProfile(0, {0}, Tail::constant(1), Tail::constant(0)) {}

  TasepProfile(long window, std::vector<std::uint8_t> core, Tail left, Tail right,
               std::uint64_t seed = 0)
      : window_(window), core_(std::move(core)), left_(std::move(left)),
        right_(std::move(right)), seed_(seed) {
    require(window_ >= 0, "core window must be non-negative");
    require(core_.size() == static_cast<std::size_t>(2 * window_ + 1),
            "core must list 2W+1 sites");
    for (auto v : core_) require(v <= 1, "occupancy values must be 0 or 1");
  }

  int operator()(long k) const {
    if (k >= -window_ && k <= window_) return core_[static_cast<std::size_t>(k + window_)];
    return k < 0 ? tail_value(left_, k, Stream::profile_left)
                 : tail_value(right_, k, Stream::profile_right);
  }

  long window() const { return window_; }
  const std::vector<std::uint8_t>& core() const { return core_; }
  const Tail& left_tail() const { return left_; }
  const Tail& right_tail() const { return right_; }
  std::uint64_t seed() const { return seed_; }
  bool random() const { return left_.random() || right_.random(); }

  TasepProfile reseeded(std::uint64_t seed) const {
    TasepProfile p = *this;
    p.seed_ = seed;
    return p;
  }

 private:
  int tail_value(const Tail& t, long k, Stream s) const {
    switch (t.kind) {
      case Tail::Kind::constant: return t.value;
      case Tail::Kind::periodic:
        return t.pattern[static_cast<std::size_t>(floor_mod(k, static_cast<long>(t.pattern.size())))];
      case Tail::Kind::bernoulli:
        return counter_uniform(seed_, static_cast<std::uint64_t>(s), as_key(k)) < t.p ? 1 : 0;
    }
    return 0;
  }

  long window_;
  std::vector<std::uint8_t> core_;
  Tail left_, right_;
  std::uint64_t seed_;
};

// η̄: hole at 0, particle at 1, sites right of 0 shifted by one.
class BarProfile {
 public:
  explicit BarProfile(TasepProfile eta) : eta_(std::move(eta)) {}

  int operator()(long k) const {
    if (k == 0) return 0;
    if (k == 1) return 1;
    return k < 0 ? eta_(k) : eta_(k - 1);
  }

  const TasepProfile& base() const { return eta_; }

 private:
  TasepProfile eta_;
};

inline BarProfile bar_transform(const TasepProfile& eta) { return BarProfile(eta); }

struct SigmaPath {
  long k_lo = 0;
  long k_hi = 0;
  std::vector<Site> points;  // points[k - k_lo]

  const Site& at(long k) const {
    if (k < k_lo || k > k_hi) throw WindowError("sigma index outside the computed segment");
    return points[static_cast<std::size_t>(k - k_lo)];
  }
};

inline SigmaPath sigma_from_eta(const TasepProfile& eta, long k_lo, long k_hi) {
  require(k_lo <= 0 && k_hi >= 0, "sigma segment must contain k = 0");
  const BarProfile bar(eta);
  SigmaPath s;
  s.k_lo = k_lo;
  s.k_hi = k_hi;
  s.points.resize(static_cast<std::size_t>(k_hi - k_lo + 1));
  s.points[static_cast<std::size_t>(-k_lo)] = {0, 0};
  Site cur{0, 0};
  for (long k = 1; k <= k_hi; ++k) {
    if (bar(k) == 0) ++cur.x; else --cur.y;
    s.points[static_cast<std::size_t>(k - k_lo)] = cur;
  }
  cur = {0, 0};
  for (long k = 0; k > k_lo; --k) {
    // σ(k-1) = σ(k) - step(k)
    if (bar(k) == 0) --cur.x; else ++cur.y;
    s.points[static_cast<std::size_t>(k - 1 - k_lo)] = cur;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Counting measures ν on R

struct Atom {
  double loc = 0.0;
  int mass = 1;
};

struct AtomTail {
  // floor_deficit: ν(y) = ⌊y⌋ − ⌊⌊y⌋^{2/3}⌋ on the right;
  // minus_infinity: ν = −∞ on the left (one-sided measures)
  enum class Kind { empty, periodic, poisson, floor_deficit, minus_infinity };
  Kind kind = Kind::empty;
  double intensity = 0.0;

  static AtomTail empty() { return {}; }
  static AtomTail periodic(double c) {
    require(c > 0.0 && std::isfinite(c), "periodic atom tail needs a positive intensity");
    return {Kind::periodic, c};
  }
  static AtomTail poisson(double c) {
    require(c > 0.0 && std::isfinite(c), "poisson atom tail needs a positive intensity");
    return {Kind::poisson, c};
  }
  static AtomTail floor_deficit() { return {Kind::floor_deficit, 1.0}; }
  static AtomTail minus_infinity() {
    return {Kind::minus_infinity, std::numeric_limits<double>::infinity()};
  }

  double density() const {
    switch (kind) {
      case Kind::empty: return 0.0;
      case Kind::floor_deficit: return 1.0;
      default: return intensity;
    }
  }
};

// ⌊n^{2/3}⌋ in exact integer arithmetic
inline long floor_two_thirds(long n) {
  if (n <= 0) return 0;
  const long long sq = static_cast<long long>(n) * n;
  long long m = static_cast<long long>(std::cbrt(static_cast<double>(sq)));
  while ((m + 1) * (m + 1) * (m + 1) <= sq) ++m;
  while (m > 0 && m * m * m > sq) --m;
  return static_cast<long>(m);
}

class CountingProcess {
 public:
  CountingProcess() = default;

  CountingProcess(double window, std::vector<Atom> core, AtomTail left, AtomTail right,
                  std::uint64_t seed = 0)
      : window_(window), left_(left), right_(right), seed_(seed) {
    require(window_ >= 0.0 && std::isfinite(window_), "core window must be finite and >= 0");
    require(right_.kind != AtomTail::Kind::minus_infinity, "minus_infinity is a left tail only");
    require(left_.kind != AtomTail::Kind::floor_deficit, "floor_deficit is a right tail only");
    std::sort(core.begin(), core.end(), [](const Atom& a, const Atom& b) { return a.loc < b.loc; });
    for (const auto& a : core) {
      require(a.mass > 0, "atom masses must be positive integers");
      require(std::abs(a.loc) <= window_, "core atoms must lie inside [-W, W]");
      if (!core_.empty() && core_.back().loc == a.loc) core_.back().mass += a.mass;
      else core_.push_back(a);
    }
  }

  // Atoms in (a, b], sorted, masses merged.
  std::vector<Atom> atoms(double a, double b) const {
    std::vector<Atom> out;
    if (!(a < b)) return out;
    if (a < -window_) tail_atoms(left_, a, std::min(b, -window_), true, out);
    for (const auto& at : core_)
      if (at.loc > a && at.loc <= b) out.push_back(at);
    if (b > window_) tail_atoms(right_, std::max(a, window_), b, false, out);
    return out;
  }

  // Signed counting function: ν(y) = ν((0,y]) for y >= 0, −ν((y,0]) for y < 0.
  double nu(double y) const {
    if (y >= 0.0) return static_cast<double>(mass(atoms(0.0, y)));
    if (left_.kind == AtomTail::Kind::minus_infinity) return -std::numeric_limits<double>::infinity();
    return -static_cast<double>(mass(atoms(y, 0.0)));
  }

  int mass_at_zero() const {
    for (const auto& a : core_)
      if (a.loc == 0.0) return a.mass;
    return 0;
  }

  double window() const { return window_; }
  const std::vector<Atom>& core() const { return core_; }
  const AtomTail& left_tail() const { return left_; }
  const AtomTail& right_tail() const { return right_; }
  std::uint64_t seed() const { return seed_; }
  bool random() const {
    return left_.kind == AtomTail::Kind::poisson || right_.kind == AtomTail::Kind::poisson;
  }
  bool left_minus_infinity() const { return left_.kind == AtomTail::Kind::minus_infinity; }

  // ν⁺: ν on [0, ∞), −∞ to the left
  CountingProcess plus() const {
    std::vector<Atom> c;
    for (const auto& a : core_)
      if (a.loc > 0.0) c.push_back(a);
    return CountingProcess(window_, c, AtomTail::minus_infinity(), right_, seed_);
  }

  // ν⁻: ν on (−∞, 0), zero to the right
  CountingProcess minus() const {
    std::vector<Atom> c;
    for (const auto& a : core_)
      if (a.loc <= 0.0) c.push_back(a);
    return CountingProcess(window_, c, left_, AtomTail::empty(), seed_);
  }

  // ν̄: one extra atom at the origin
  CountingProcess with_atom_at_zero() const {
    std::vector<Atom> c = core_;
    c.push_back({0.0, 1});
    return CountingProcess(window_, c, left_, right_, seed_);
  }

  CountingProcess reseeded(std::uint64_t seed) const {
    CountingProcess p = *this;
    p.seed_ = seed;
    return p;
  }

  static long mass(const std::vector<Atom>& as) {
    long m = 0;
    for (const auto& a : as) m += a.mass;
    return m;
  }

 private:
  // Atoms of a tail in (lo, hi] (right side) or (lo, hi) with hi = −W (left side).
  void tail_atoms(const AtomTail& t, double lo, double hi, bool left, std::vector<Atom>& out) const {
    auto keep = [&](double x) { return x > lo && (left ? (x <= hi && x < -window_) : x <= hi); };
    switch (t.kind) {
      case AtomTail::Kind::empty:
      case AtomTail::Kind::minus_infinity: return;
      case AtomTail::Kind::periodic: {
        const long k0 = static_cast<long>(std::floor(lo * t.intensity)) - 1;
        const long k1 = static_cast<long>(std::ceil(hi * t.intensity)) + 1;
        for (long k = k0; k <= k1; ++k) {
          const double x = static_cast<double>(k) / t.intensity;
          if (k != 0 && keep(x)) out.push_back({x, 1});
        }
        return;
      }
      case AtomTail::Kind::poisson: {
        const auto stream = static_cast<std::uint64_t>(left ? Stream::atoms_left : Stream::atoms_right);
        std::vector<Atom> cell;
        for (long j = static_cast<long>(std::floor(lo)); j <= static_cast<long>(std::floor(hi)); ++j) {
          SplitMix g(mix_key(seed_, stream, as_key(j)));
          std::poisson_distribution<int> count(t.intensity);
          const int n = count(g);
          cell.clear();
          for (int i = 0; i < n; ++i) {
            const double x = static_cast<double>(j) + uniform01(g);
            if (keep(x)) cell.push_back({x, 1});
          }
          std::sort(cell.begin(), cell.end(), [](const Atom& a, const Atom& b) { return a.loc < b.loc; });
          out.insert(out.end(), cell.begin(), cell.end());
        }
        return;
      }
      case AtomTail::Kind::floor_deficit: {
        for (long n = std::max(1L, static_cast<long>(std::floor(lo)));
             n <= static_cast<long>(std::floor(hi)); ++n) {
          const long m = 1 - (floor_two_thirds(n) - floor_two_thirds(n - 1));
          if (m > 0 && keep(static_cast<double>(n))) out.push_back({static_cast<double>(n), static_cast<int>(m)});
        }
        return;
      }
    }
  }

  double window_ = 0.0;
  std::vector<Atom> core_;
  AtomTail left_, right_;
  std::uint64_t seed_ = 0;
};

// ---------------------------------------------------------------------------
// Densities and builtins

struct Densities {
  double lower = 0.0;  // p_η or a_ν
  double upper = 0.0;  // p′_η or b_ν
  bool rarefaction = false;
};

inline Densities asymptotic_densities(const TasepProfile& eta) {
  Densities d{eta.right_tail().density(), eta.left_tail().density(), false};
  d.rarefaction = d.lower < d.upper;
  return d;
}

inline Densities asymptotic_densities(const CountingProcess& nu) {
  Densities d{nu.right_tail().density(), nu.left_tail().density(), false};
  d.rarefaction = d.lower < d.upper;
  return d;
}

inline TasepProfile two_corner(int x, int y) {
  require(x >= 1, "two_corner needs x >= 1");
  require(y >= 1, "two_corner needs y >= 1");
  const long w = std::max(x, y);
  std::vector<std::uint8_t> core(static_cast<std::size_t>(2 * w + 1));
  for (long k = -w; k <= w; ++k) {
    int v = 0;
    if (k <= -x) v = 1;
    else if (k > 0 && k <= y - 1) v = 1;
    core[static_cast<std::size_t>(k + w)] = static_cast<std::uint8_t>(v);
  }
  return TasepProfile(w, core, Tail::constant(1), Tail::constant(0));
}

// η̄(i) = 1 iff i mod (k₊+1) = 1 for i >= 1; η̄(i) = 0 iff i mod (k₋+1) = 0 for i <= 0.
inline TasepProfile periodic_profile(int k_plus, int k_minus) {
  require(k_plus >= 1, "periodic needs k_plus >= 1");
  require(k_minus >= 1, "periodic needs k_minus >= 1");
  std::vector<std::uint8_t> right(static_cast<std::size_t>(k_plus + 1), 0);
  right[0] = 1;
  std::vector<std::uint8_t> left(static_cast<std::size_t>(k_minus + 1), 1);
  left[0] = 0;
  return TasepProfile(0, {0}, Tail::periodic(left), Tail::periodic(right));
}

inline TasepProfile bernoulli_profile(double p1, double p2, std::uint64_t seed = 0) {
  require(p1 >= 0.0, "bernoulli needs p1 >= 0");
  require(p2 <= 1.0, "bernoulli needs p2 <= 1");
  require(p1 < p2, "bernoulli needs p1 < p2");
  return TasepProfile(0, {0}, Tail::bernoulli(p2), Tail::bernoulli(p1), seed);
}

inline CountingProcess hammersley_periodic(double lambda, double mu) {
  require(lambda > 0.0, "hammersley_periodic needs lambda > 0");
  require(lambda < mu, "hammersley_periodic needs lambda < mu");
  return CountingProcess(0.0, {}, AtomTail::periodic(mu), AtomTail::periodic(lambda));
}

inline CountingProcess hammersley_poisson(double lambda, double mu, std::uint64_t seed = 0) {
  require(lambda > 0.0, "hammersley_poisson needs lambda > 0");
  require(lambda < mu, "hammersley_poisson needs lambda < mu");
  return CountingProcess(0.0, {}, AtomTail::poisson(mu), AtomTail::poisson(lambda), seed);
}

// ν(y) = ⌊y⌋ − ⌊⌊y⌋^{2/3}⌋ for y >= 0 (density one, sublinear deficit); the
// left side is supplied by the caller.
inline CountingProcess floor_deficit_profile(AtomTail left, std::uint64_t seed = 0) {
  require(left.kind == AtomTail::Kind::periodic || left.kind == AtomTail::Kind::poisson,
          "floor_deficit needs a periodic or poisson left tail");
  require(left.intensity > 1.0, "floor_deficit needs a left intensity above 1");
  return CountingProcess(0.0, {}, left, AtomTail::floor_deficit(), seed);
}

// ---------------------------------------------------------------------------
// Descriptors

using AnyProfile = std::variant<TasepProfile, CountingProcess>;

struct ProfileDescriptor {
  std::string family;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
  double window = 0.0;
};

inline void to_json(nlohmann::json& j, const ProfileDescriptor& d) {
  j = nlohmann::json{{"family", d.family}, {"params", d.params}, {"seed", d.seed}, {"window", d.window}};
}

inline void from_json(const nlohmann::json& j, ProfileDescriptor& d) {
  if (!j.is_object() || !j.contains("family")) throw ConfigError("profile descriptor needs a family");
  d.family = j.at("family").get<std::string>();
  d.params = j.value("params", nlohmann::json::object());
  d.seed = j.value("seed", std::uint64_t{0});
  d.window = j.value("window", 0.0);
}

struct BuiltProfile {
  AnyProfile profile;
  Densities densities;
  bool rarefaction_violated = false;
};

namespace detail {

inline double number(const nlohmann::json& p, const char* key) {
  if (!p.contains(key) || !p.at(key).is_number())
    throw InvalidParameter(std::string("missing numeric parameter '") + key + "'");
  return p.at(key).get<double>();
}

inline int integer(const nlohmann::json& p, const char* key) {
  if (!p.contains(key) || !p.at(key).is_number_integer())
    throw InvalidParameter(std::string("missing integer parameter '") + key + "'");
  return p.at(key).get<int>();
}

inline Tail tail_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return Tail::constant(j.at("value").get<int>());
  if (kind == "periodic") return Tail::periodic(j.at("pattern").get<std::vector<std::uint8_t>>());
  if (kind == "bernoulli") return Tail::bernoulli(j.at("p").get<double>());
  throw InvalidParameter("unknown tail kind '" + kind + "'");
}

inline AtomTail atom_tail_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "empty") return AtomTail::empty();
  if (kind == "periodic") return AtomTail::periodic(j.at("intensity").get<double>());
  if (kind == "poisson") return AtomTail::poisson(j.at("intensity").get<double>());
  if (kind == "floor_deficit") return AtomTail::floor_deficit();
  if (kind == "minus_infinity") return AtomTail::minus_infinity();
  throw InvalidParameter("unknown atom tail kind '" + kind + "'");
}

}  // namespace detail

inline BuiltProfile build_builtin(const ProfileDescriptor& d) {
  const auto& p = d.params;
  BuiltProfile out;
  auto finish = [&](auto prof) {
    out.densities = asymptotic_densities(prof);
    out.rarefaction_violated = !out.densities.rarefaction;
    out.profile = std::move(prof);
    return out;
  };
  if (d.family == "two_corner") return finish(two_corner(detail::integer(p, "x"), detail::integer(p, "y")));
  if (d.family == "periodic")
    return finish(periodic_profile(detail::integer(p, "k_plus"), detail::integer(p, "k_minus")));
  if (d.family == "bernoulli")
    return finish(bernoulli_profile(detail::number(p, "p1"), detail::number(p, "p2"), d.seed));
  if (d.family == "tasep_custom") {
    const long w = static_cast<long>(d.window);
    auto core = p.at("core").get<std::vector<std::uint8_t>>();
    return finish(TasepProfile(w, core, detail::tail_from_json(p.at("left")),
                               detail::tail_from_json(p.at("right")), d.seed));
  }
  if (d.family == "hammersley_periodic")
    return finish(hammersley_periodic(detail::number(p, "lambda"), detail::number(p, "mu")));
  if (d.family == "hammersley_poisson")
    return finish(hammersley_poisson(detail::number(p, "lambda"), detail::number(p, "mu"), d.seed));
  if (d.family == "floor_deficit") {
    if (!p.contains("left")) throw InvalidParameter("floor_deficit needs an explicit left tail");
    return finish(floor_deficit_profile(detail::atom_tail_from_json(p.at("left")), d.seed));
  }
  if (d.family == "counting_custom") {
    std::vector<Atom> atoms;
    for (const auto& a : p.value("atoms", nlohmann::json::array()))
      atoms.push_back({a.at(0).get<double>(), a.at(1).get<int>()});
    return finish(CountingProcess(d.window, atoms, detail::atom_tail_from_json(p.at("left")),
                                  detail::atom_tail_from_json(p.at("right")), d.seed));
  }
  throw InvalidParameter("unknown profile family '" + d.family + "'");
}

}  // namespace rarefan
