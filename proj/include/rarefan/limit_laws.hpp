#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <variant>

#include "rarefan/errors.hpp"
#include "rarefan/profiles.hpp"
#include "rarefan/stats.hpp"
#include "rarefan/walks.hpp"

namespace rarefan {

// ---------------------------------------------------------------------------
// Parameter maps

inline double rho_u(double u) {
  if (!(u > -1.0 && u < 1.0)) throw DomainError("speed must lie in (-1,1)");
  return 0.5 * (1.0 + u);
}

inline double rho_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < std::numbers::pi / 2)) throw DomainError("angle must lie in (0, pi/2)");
  return 1.0 / (1.0 + std::sqrt(std::tan(alpha)));
}

inline double alpha_u(double u) {
  if (!(u > -1.0 && u < 1.0)) throw DomainError("speed must lie in (-1,1)");
  const double r = (1.0 - u) / (1.0 + u);
  return std::atan(r * r);
}

// speed associated with an interface angle; inverse of alpha_u
inline double f_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < std::numbers::pi / 2)) throw DomainError("angle must lie in (0, pi/2)");
  const double s = std::sqrt(std::tan(alpha));
  return (1.0 - s) / (1.0 + s);
}

inline double rho_v(double v) {
  if (!(v > 0.0)) throw DomainError("speed must be positive");
  return 1.0 / std::sqrt(v);
}

// asymptotic slope angle of σ for particle density p
inline double alpha_eta(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("density must lie in [0,1]");
  if (p == 1.0) return std::numbers::pi / 2;
  const double r = p / (1.0 - p);
  return std::atan(r * r);
}

// ---------------------------------------------------------------------------
// LimitLaw

enum class LawKind { speed_tail, angle_cdf, hammersley_cdf };
enum class LawMethod { closed_form, fixed_point, series, monte_carlo };

inline const char* to_string(LawKind k) {
  switch (k) {
    case LawKind::speed_tail: return "speed_tail";
    case LawKind::angle_cdf: return "angle_cdf";
    case LawKind::hammersley_cdf: return "hammersley_cdf";
  }
  return "?";
}

inline const char* to_string(LawMethod m) {
  switch (m) {
    case LawMethod::closed_form: return "closed_form";
    case LawMethod::fixed_point: return "fixed_point";
    case LawMethod::series: return "series";
    case LawMethod::monte_carlo: return "monte_carlo";
  }
  return "?";
}

struct LawValue {
  double value = 0.0;
  double error = 0.0;
  LawMethod method = LawMethod::closed_form;
};

// speed_tail: u -> P(U >= u); angle_cdf: α -> P(Θ <= α); hammersley_cdf: v -> P(V <= v).
// Outside the open support the law takes its limiting values; at the endpoints
// an atom is possible and the value returned is only the one-sided limit.
struct LimitLaw {
  std::string name;
  LawKind kind = LawKind::speed_tail;
  Interval support;
  LawMethod method = LawMethod::closed_form;
  double error = 0.0;
  bool boundary_atom_possible = true;
  std::function<LawValue(double)> interior;

  LawValue evaluate(double x) const {
    const bool tail = kind == LawKind::speed_tail;
    if (x <= support.lo) return {tail ? 1.0 : 0.0, 0.0, method};
    if (x >= support.hi) return {tail ? 0.0 : 1.0, 0.0, method};
    return interior(x);
  }
  double operator()(double x) const { return evaluate(x).value; }

  // distribution function of the underlying variable
  double cdf(double x) const { return kind == LawKind::speed_tail ? 1.0 - (*this)(x) : (*this)(x); }
  bool interior_point(double x) const { return x > support.lo && x < support.hi; }
};

// P(Θ <= α) = P(U >= f(α))
inline LimitLaw angle_law(const LimitLaw& speed) {
  require(speed.kind == LawKind::speed_tail, "angle law needs a speed law");
  LimitLaw a = speed;
  a.name = speed.name + "/angle";
  a.kind = LawKind::angle_cdf;
  a.support = {speed.support.hi >= 1.0 ? 0.0 : alpha_u(speed.support.hi),
               speed.support.lo <= -1.0 ? std::numbers::pi / 2 : alpha_u(speed.support.lo)};
  a.interior = [speed](double alpha) { return speed.evaluate(f_alpha(alpha)); };
  return a;
}

// ---------------------------------------------------------------------------
// Two-corner profile

// P(Γ_{x,ρ} >= Γ_{y,1−ρ}) = (1−ρ)^y/(y−1)! Σ_{j<x} (j+y−1)!/j! ρ^j, in log space.
inline double gamma_compare(int x, int y, double rho) {
  if (x < 1 || y < 1) throw DomainError("gamma_compare needs x, y >= 1");
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("gamma_compare needs rho in (0,1)");
  const double base = y * std::log1p(-rho) - std::lgamma(static_cast<double>(y));
  const double lr = std::log(rho);
  double sum = 0.0;
  for (int j = 0; j < x; ++j)
    sum += std::exp(base + std::lgamma(static_cast<double>(j + y)) - std::lgamma(static_cast<double>(j + 1)) + j * lr);
  return std::min(1.0, sum);
}

inline LimitLaw two_corner_cdf(int x, int y) {
  if (x < 1 || y < 1) throw DomainError("two_corner needs x, y >= 1");
  LimitLaw l;
  l.name = "two_corner(" + std::to_string(x) + "," + std::to_string(y) + ")";
  l.support = {-1.0, 1.0};
  l.error = 1e-13;
  l.interior = [x, y](double u) { return LawValue{gamma_compare(x, y, rho_u(u)), 1e-13, LawMethod::closed_form}; };
  return l;
}

// ---------------------------------------------------------------------------
// Periodic TASEP

// Smallest root of z(1 − c z)^k = d^k with (c,d) = (1−ρ, ρ) on the + side and
// (ρ, 1−ρ) on the − side. The map z − d^k/(1−cz)^k is concave on [0, 1/c)
// with roots at the answer and at 1; the bracket runs up to its maximizer.
inline double gm1_fixed_point(int k, double rho, Side side) {
  if (k < 1) throw DomainError("gm1_fixed_point needs k >= 1");
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("gm1_fixed_point needs rho in (0,1)");
  const double c = side == Side::plus ? 1.0 - rho : rho;
  const double d = 1.0 - c;
  if (!(k * c > d)) throw StabilityError("queue is not positive recurrent at this density");
  const double zmax = (1.0 - std::pow(k * c * std::pow(d, k), 1.0 / (k + 1))) / c;
  auto g = [&](double z) { return z - std::pow(d / (1.0 - c * z), k); };
  double lo = 0.0, hi = zmax;
  if (g(hi) < 0.0) hi = std::min(1.0, hi);  // round-off right at the stability edge
  for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) < 0.0) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline double gm1_residual(int k, double rho, Side side, double lambda) {
  const double c = side == Side::plus ? 1.0 - rho : rho;
  const double d = 1.0 - c;
  return lambda * std::pow(1.0 - c * lambda, k) - std::pow(d, k);
}

inline double periodic_probability(int k_plus, int k_minus, double rho) {
  const double lp = gm1_fixed_point(k_plus, rho, Side::plus);
  const double lm = gm1_fixed_point(k_minus, rho, Side::minus);
  const double a = (1.0 - rho) * (1.0 - lp), b = rho * (1.0 - lm);
  return a / (a + b);
}

inline LimitLaw periodic_tasep_cdf(int k_plus, int k_minus) {
  if (k_plus < 1 || k_minus < 1) throw DomainError("periodic needs k_plus, k_minus >= 1");
  if (std::max(k_plus, k_minus) < 2) throw DomainError("periodic profile needs max(k_plus, k_minus) >= 2");
  LimitLaw l;
  l.name = "periodic(" + std::to_string(k_plus) + "," + std::to_string(k_minus) + ")";
  l.method = LawMethod::fixed_point;
  l.support = {(1.0 - k_minus) / (1.0 + k_minus), (k_plus - 1.0) / (k_plus + 1.0)};
  l.error = 1e-12;
  l.interior = [k_plus, k_minus](double u) {
    return LawValue{periodic_probability(k_plus, k_minus, rho_u(u)), 1e-12, LawMethod::fixed_point};
  };
  return l;
}

// ---------------------------------------------------------------------------
// Bernoulli TASEP

struct BernoulliIntermediates {
  double lambda_plus = 0.0;   // (p₁/(1−p₁)) (ρ/(1−ρ))
  double lambda_minus = 0.0;  // mirror image on the left
  double s_plus_rate = 0.0;   // S⁺ ~ Exp(1 − ρ − p₁)
  double s_minus_rate = 0.0;  // S⁻ ~ Exp(p₂ − (1 − ρ))
};

inline BernoulliIntermediates bernoulli_intermediates(double p1, double p2, double rho) {
  if (!(p1 >= 0.0 && p1 < p2 && p2 <= 1.0)) throw DomainError("bernoulli needs 0 <= p1 < p2 <= 1");
  if (!(1.0 - rho > p1 && 1.0 - rho < p2)) throw DomainError("density outside the stable range");
  BernoulliIntermediates b;
  b.lambda_plus = (p1 / (1.0 - p1)) * (rho / (1.0 - rho));
  b.lambda_minus = ((1.0 - p2) / p2) * ((1.0 - rho) / rho);
  b.s_plus_rate = 1.0 - rho - p1;
  b.s_minus_rate = p2 - (1.0 - rho);
  return b;
}

inline LimitLaw bernoulli_cdf(double p1, double p2) {
  if (!(p1 >= 0.0 && p1 < p2 && p2 <= 1.0)) throw DomainError("bernoulli needs 0 <= p1 < p2 <= 1");
  LimitLaw l;
  l.name = "bernoulli";
  l.support = {1.0 - 2.0 * p2, 1.0 - 2.0 * p1};
  l.error = 1e-15;
  l.interior = [p1, p2](double u) {
    return LawValue{((1.0 - 2.0 * p1) - u) / (2.0 * (p2 - p1)), 1e-15, LawMethod::closed_form};
  };
  return l;
}

// ---------------------------------------------------------------------------
// Hammersley periodic

// Nonzero root of p = 1 − exp(−p ρ/λ); exists iff ρ > λ.
inline double pyke_p_plus(double lambda, double rho) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  const double r = rho / lambda;
  if (!(r > 1.0)) throw DomainError("no positive root: need rho > lambda");
  auto h = [r](double p) { return p - 1.0 + std::exp(-r * p); };
  double lo = std::min(0.5, (r - 1.0) / (r * r));
  while (h(lo) >= 0.0 && lo > 1e-300) lo *= 0.5;
  double hi = 1.0;
  while (hi - lo > 1e-14) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) < 0.0) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct PykeLaws {
  double inf_tail = 1.0;  // P(S⁺ >= k)
  double sup_cdf = 0.0;   // P(S⁻ <= k)
  double error = 0.0;
  bool fallback = false;  // sup_cdf came from simulation
};

namespace detail {

// (1−r) Σ_{i<=k} (−r)^i (k−i)^i/i! e^{r(k−i)} with Neumaier summation; also
// returns eps · Σ|terms| as a cancellation bound.
inline std::pair<double, double> pyke_sup_series(double r, long k) {
  double sum = 0.0, comp = 0.0, mag = 0.0;
  for (long i = 0; i <= k; ++i) {
    const double base = static_cast<double>(k - i);
    if (i > 0 && base == 0.0) continue;  // 0^i
    const double lt = (i == 0 ? 0.0 : i * (std::log(r) + std::log(base))) -
                      std::lgamma(static_cast<double>(i + 1)) + r * base;
    const double term = (i % 2 ? -1.0 : 1.0) * std::exp(lt);
    mag += std::abs(term);
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return {(1.0 - r) * (sum + comp), (1.0 - r) * mag * 4.0 * std::numeric_limits<double>::epsilon()};
}

}  // namespace detail

inline PykeLaws pyke_boundary_laws(double lambda, double mu, double rho, long k, double tol = 1e-9,
                                   std::size_t fallback_replicas = 100000, std::uint64_t seed = 1) {
  if (k < 0) throw DomainError("k must be non-negative");
  if (!(rho < mu)) throw DomainError("sup law needs rho < mu");
  PykeLaws out;
  out.inf_tail = std::pow(1.0 - pyke_p_plus(lambda, rho), static_cast<double>(k));
  const auto [v, err] = detail::pyke_sup_series(rho / mu, k);
  if (err <= tol) {
    out.sup_cdf = std::clamp(v, 0.0, 1.0);
    out.error = err;
    return out;
  }
  // alternating sum lost too many digits: simulate sup_{z>=0} N_ρ(z) − ⌊μ z⌋
  const CountingProcess left(0.0, {}, AtomTail::periodic(mu), AtomTail::empty());
  const TailBound bound = hammersley_left_bound(left.left_tail(), rho);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < fallback_replicas; ++r) {
    Engine g = make_engine(seed, Stream::oracle, r);
    hits += hammersley_left_sup(left, rho, bound, 1e-9, g).value <= static_cast<double>(k);
  }
  const Proportion p = make_proportion(hits, fallback_replicas);
  out.sup_cdf = p.value;
  out.error = p.half_width();
  out.fallback = true;
  return out;
}

// P(S⁺ >= S⁻) for the periodic Hammersley profile at intensity ρ.
// Series Σ_k P(S⁻ <= k) p₊(1−p₊)^k when it keeps its digits; otherwise the
// generating-function form E[(1−p₊)^{S⁻}] = (1−r) p₊ e^{−r p₊}/(p₊ + e^{−r p₊} − 1), r = ρ/μ.
inline LawValue hammersley_periodic_probability(double lambda, double mu, double rho, double tol = 1e-9) {
  if (!(lambda > 0.0 && lambda < mu)) throw DomainError("need 0 < lambda < mu");
  if (rho <= lambda) return {1.0, 0.0, LawMethod::closed_form};
  if (rho >= mu) return {0.0, 0.0, LawMethod::closed_form};
  const double p = pyke_p_plus(lambda, rho), r = rho / mu;
  const double s = 1.0 - p;
  const long kmax = s > 0.0 ? static_cast<long>(std::ceil(std::log(1e-12) / std::log(s))) : 0;
  if (kmax <= 2000) {
    double sum = 0.0, err = 0.0, w = p;
    bool ok = true;
    for (long k = 0; k <= kmax; ++k, w *= s) {
      const auto [v, e] = detail::pyke_sup_series(r, k);
      sum += w * std::clamp(v, 0.0, 1.0);
      err += w * e;
      if (err > tol) {
        ok = false;
        break;
      }
    }
    if (ok) return {sum, err + std::pow(s, static_cast<double>(kmax + 1)), LawMethod::series};
  }
  const double v = (1.0 - r) * p * std::exp(-r * p) / (p + std::expm1(-r * p));
  return {v, 1e-12, LawMethod::closed_form};
}

inline LimitLaw hammersley_periodic_cdf(double lambda, double mu) {
  if (!(lambda > 0.0 && lambda < mu)) throw DomainError("need 0 < lambda < mu");
  LimitLaw l;
  l.name = "hammersley_periodic";
  l.kind = LawKind::hammersley_cdf;
  l.method = LawMethod::series;
  l.support = {1.0 / (mu * mu), 1.0 / (lambda * lambda)};
  l.error = 1e-9;
  l.interior = [lambda, mu](double v) { return hammersley_periodic_probability(lambda, mu, rho_v(v)); };
  return l;
}

// ---------------------------------------------------------------------------
// Hammersley Poisson

struct PoissonIntermediates {
  double p_plus = 0.0, p_minus = 0.0;
  double r_plus = 0.0, r_minus = 0.0;  // S^± ~ Geo(r^±): P(S >= k) = r^k
};

inline PoissonIntermediates poisson_intermediates(double lambda, double mu, double rho) {
  if (!(lambda > 0.0 && lambda < rho && rho < mu)) throw DomainError("need 0 < lambda < rho < mu");
  PoissonIntermediates p;
  p.p_plus = lambda / (lambda + rho);
  p.p_minus = rho / (mu + rho);
  p.r_plus = p.p_plus / (1.0 - p.p_plus);
  p.r_minus = p.p_minus / (1.0 - p.p_minus);
  return p;
}

inline LimitLaw hammersley_poisson_cdf(double lambda, double mu) {
  if (!(lambda > 0.0 && lambda < mu)) throw DomainError("need 0 < lambda < mu");
  LimitLaw l;
  l.name = "hammersley_poisson";
  l.kind = LawKind::hammersley_cdf;
  l.support = {1.0 / (mu * mu), 1.0 / (lambda * lambda)};
  l.error = 1e-15;
  l.interior = [lambda, mu](double v) {
    return LawValue{(mu - 1.0 / std::sqrt(v)) / (mu - lambda), 1e-15, LawMethod::closed_form};
  };
  return l;
}

// ---------------------------------------------------------------------------
// Laws from the supremum comparison

enum class ModelKind { tasep_speed, interface_angle, hammersley_speed };

inline const char* to_string(ModelKind m) {
  switch (m) {
    case ModelKind::tasep_speed: return "tasep_speed";
    case ModelKind::interface_angle: return "interface_angle";
    case ModelKind::hammersley_speed: return "hammersley_speed";
  }
  return "?";
}

// Open support of the law for a given profile.
inline Interval law_support(ModelKind model, const AnyProfile& profile) {
  if (model == ModelKind::hammersley_speed) {
    const Densities d = asymptotic_densities(std::get<CountingProcess>(profile));
    return {std::isinf(d.upper) ? 0.0 : 1.0 / (d.upper * d.upper),
            d.lower > 0.0 ? 1.0 / (d.lower * d.lower) : std::numeric_limits<double>::infinity()};
  }
  const Densities d = asymptotic_densities(std::get<TasepProfile>(profile));
  if (model == ModelKind::tasep_speed) return {1.0 - 2.0 * d.upper, 1.0 - 2.0 * d.lower};
  return {alpha_eta(d.lower), alpha_eta(d.upper)};
}

struct GeneralEstimate {
  Proportion estimate;
  double rho = 0.0;
  LawKind kind = LawKind::speed_tail;
  double worst_certificate = 0.0;
};

// P(U >= u), P(Θ <= α) or P(V <= v) via the supremum comparison. Points on the
// support boundary are refused: the law may carry an atom there.
inline GeneralEstimate general_law_estimate(ModelKind model, const AnyProfile& profile, double point,
                                            std::size_t replicas, std::uint64_t seed = 1, double tol = 1e-6,
                                            unsigned threads = 0) {
  const Interval s = law_support(model, profile);
  const double eps = 1e-12 * std::max(1.0, std::abs(point));
  if (std::abs(point - s.lo) <= eps || std::abs(point - s.hi) <= eps)
    throw BoundaryRefusal("point lies on the support boundary, where the law may have an atom; no estimate given");
  if (point < s.lo || point > s.hi) throw DomainError("point lies outside the support of the law");
  GeneralEstimate g;
  SupCompareResult r;
  switch (model) {
    case ModelKind::tasep_speed:
      g.rho = rho_u(point);
      r = estimate_sup_compare(std::get<TasepProfile>(profile), g.rho, replicas, tol, seed, threads);
      break;
    case ModelKind::interface_angle:
      g.kind = LawKind::angle_cdf;
      g.rho = rho_alpha(point);
      r = estimate_sup_compare(std::get<TasepProfile>(profile), g.rho, replicas, tol, seed, threads);
      break;
    case ModelKind::hammersley_speed:
      g.kind = LawKind::hammersley_cdf;
      g.rho = rho_v(point);
      r = hammersley_sup_compare(std::get<CountingProcess>(profile), g.rho, replicas, tol, seed, threads);
      break;
  }
  g.estimate = r.estimate;
  g.worst_certificate = r.worst_certificate;
  return g;
}

// Closed-form law for a builtin descriptor, when one exists.
inline std::optional<LimitLaw> closed_form_law(const ProfileDescriptor& d) {
  const auto& p = d.params;
  if (d.family == "two_corner") return two_corner_cdf(p.at("x").get<int>(), p.at("y").get<int>());
  if (d.family == "periodic") return periodic_tasep_cdf(p.at("k_plus").get<int>(), p.at("k_minus").get<int>());
  if (d.family == "bernoulli") return bernoulli_cdf(p.at("p1").get<double>(), p.at("p2").get<double>());
  if (d.family == "hammersley_periodic")
    return hammersley_periodic_cdf(p.at("lambda").get<double>(), p.at("mu").get<double>());
  if (d.family == "hammersley_poisson")
    return hammersley_poisson_cdf(p.at("lambda").get<double>(), p.at("mu").get<double>());
  return std::nullopt;
}

}  // namespace rarefan
