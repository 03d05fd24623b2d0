#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rarefan/errors.hpp"
#include "rarefan/lattice_lpp.hpp"
#include "rarefan/limit_laws.hpp"
#include "rarefan/oracles.hpp"
#include "rarefan/parallel.hpp"
#include "rarefan/particle_sim.hpp"
#include "rarefan/profiles.hpp"
#include "rarefan/stats.hpp"

namespace rarefan {

inline constexpr int schema_version = 1;

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Config

struct ExperimentConfig {
  ModelKind model = ModelKind::tasep_speed;
  ProfileDescriptor profile;
  double t = 2000.0;
  std::size_t replicas = 2000;
  std::uint64_t seed = 1;
  double ks_tolerance = 0.05;
  double ci_widths = 3.0;
  std::size_t estimate_replicas = 0;  // 0: skip the supremum-comparison check
  std::vector<double> grid;           // empty: evenly spaced interior points
  std::size_t grid_points = 9;
  unsigned threads = 0;
};

inline ModelKind parse_model(const std::string& s) {
  if (s == "tasep_speed") return ModelKind::tasep_speed;
  if (s == "interface_angle") return ModelKind::interface_angle;
  if (s == "hammersley_speed") return ModelKind::hammersley_speed;
  throw ConfigError("unknown model '" + s + "'");
}

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  static const std::vector<std::string> known{"model", "profile", "t", "replicas", "seed", "ks_tolerance",
                                              "ci_widths", "estimate_replicas", "grid", "grid_points", "threads"};
  if (!j.is_object()) throw ConfigError("config must be an object");
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown config key '" + key + "'");
  if (!j.contains("model") || !j.contains("profile")) throw ConfigError("config needs 'model' and 'profile'");
  ExperimentConfig c;
  try {
    c.model = parse_model(j.at("model").get<std::string>());
    c.profile = j.at("profile").get<ProfileDescriptor>();
    c.t = j.value("t", c.t);
    c.replicas = j.value("replicas", c.replicas);
    c.seed = j.value("seed", c.seed);
    c.ks_tolerance = j.value("ks_tolerance", c.ks_tolerance);
    c.ci_widths = j.value("ci_widths", c.ci_widths);
    c.estimate_replicas = j.value("estimate_replicas", c.estimate_replicas);
    c.grid = j.value("grid", c.grid);
    c.grid_points = j.value("grid_points", c.grid_points);
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  }
  if (!(c.t > 0.0)) throw ConfigError("t must be positive");
  if (c.replicas == 0) throw ConfigError("replicas must be positive");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Laws and grids

inline LimitLaw law_for(ModelKind model, const ProfileDescriptor& d) {
  auto law = closed_form_law(d);
  if (!law) throw ConfigError("no closed-form law for family '" + d.family + "'");
  const bool hammersley = law->kind == LawKind::hammersley_cdf;
  if (hammersley != (model == ModelKind::hammersley_speed))
    throw ConfigError("model and profile family belong to different systems");
  return model == ModelKind::interface_angle ? angle_law(*law) : *law;
}

// n evenly spaced points strictly inside (lo, hi)
inline std::vector<double> interior_grid(Interval s, std::size_t n) {
  if (!std::isfinite(s.lo) || !std::isfinite(s.hi)) throw ConfigError("unbounded support: give an explicit grid");
  std::vector<double> g;
  for (std::size_t i = 1; i <= n; ++i)
    g.push_back(s.lo + (s.hi - s.lo) * static_cast<double>(i) / static_cast<double>(n + 1));
  return g;
}

inline void write_law_csv(std::ostream& os, const LimitLaw& law, const std::vector<double>& grid) {
  os << "# schema=law/" << schema_version << " law=" << law.name << " kind=" << to_string(law.kind) << "\n";
  os << "point,value,method,error_bound\n";
  for (double x : grid) {
    const LawValue v = law.evaluate(x);
    os << fmt17(x) << ',' << fmt17(v.value) << ',' << to_string(v.method) << ',' << fmt17(v.error) << '\n';
  }
}

struct CompareSummary {
  double max_diff = 0.0;
  double at = 0.0;
  bool pass = false;
};

inline CompareSummary compare_laws(const LimitLaw& a, const LimitLaw& b, const std::vector<double>& grid, double tol) {
  if (a.kind != b.kind) throw InvalidParameter("laws describe different variables");
  CompareSummary s;
  for (double x : grid) {
    const double d = std::abs(a(x) - b(x));
    if (d > s.max_diff) s.max_diff = d, s.at = x;
  }
  s.pass = s.max_diff <= tol;
  return s;
}

// ---------------------------------------------------------------------------
// Figure 1

struct FigureRow {
  double rho = 0.0;
  double p = 0.0;
  double uniform = 0.0;  // (μ − ρ)/(μ − λ)
};

inline std::vector<FigureRow> figure1_rows(double lambda = 1.0, double mu = 2.0, std::size_t steps = 200) {
  std::vector<FigureRow> rows;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double rho = lambda + (mu - lambda) * static_cast<double>(i) / static_cast<double>(steps);
    rows.push_back({rho, hammersley_periodic_probability(lambda, mu, rho).value, (mu - rho) / (mu - lambda)});
  }
  return rows;
}

inline void write_figure1_csv(std::ostream& os, const std::vector<FigureRow>& rows) {
  os << "# schema=figure1/" << schema_version << "\nrho,p,uniform\n";
  for (const auto& r : rows) os << fmt17(r.rho) << ',' << fmt17(r.p) << ',' << fmt17(r.uniform) << '\n';
}

// ---------------------------------------------------------------------------
// Interface angles

// Θ over replicas: one weight field per replica, n-step interface.
inline std::vector<ReplicaResult<double>> interface_angles(const TasepProfile& eta, long n_steps, std::size_t replicas,
                                                           std::uint64_t seed, unsigned threads = 0) {
  return run_replicas<double>(
      replicas,
      [&](std::size_t r) {
        const TasepProfile prof = eta.random() ? eta.reseeded(derive_seed(seed, Stream::replica_profile, r)) : eta;
        const WeightField X(derive_seed(seed, Stream::weights, r));
        const InterfacePath path = competition_interface_trace(X, interface_sigma(prof, n_steps), n_steps);
        if (path.anchors_truncated) throw WindowError("sigma segment too short for the interface");
        return path.angle();
      },
      threads);
}

// ---------------------------------------------------------------------------
// Oracle suite

inline std::vector<oracles::OracleReport> oracle_suite(std::uint64_t seed) {
  using oracles::make_report;
  std::vector<oracles::OracleReport> out;
  {
    double worst = 0.0;
    long cost = 0;
    for (int f = 0; f < 100; ++f) {
      const WeightField X(derive_seed(seed, Stream::oracle, static_cast<std::uint64_t>(f)));
      for (long w = 1; w <= 4; ++w)
        for (long h = 1; h <= 4; ++h) {
          const Site a{-1, 2}, b{a.x + w - 1, a.y + h - 1};
          worst = std::max(worst, std::abs(lpp_value(X, a, b) - oracles::lpp_enumerate(X, a, b)));
          cost += w * h;
        }
    }
    out.push_back(make_report("lpp_value vs enumeration (<=4x4, 100 fields)", 0.0, worst, 0.0, cost));
  }
  {
    long mismatches = 0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
      Engine g = make_engine(seed, Stream::oracle, 1000 + i);
      std::vector<PlanePoint> pts(12);
      for (auto& p : pts) p = {uniform01(g), uniform01(g)};
      const PoissonCloud c = PoissonCloud::from_points(0.0, 1.0, 1.0, pts);
      mismatches += longest_increasing_path(c, {0.0, 0.0}, {1.0, 1.0}) !=
                    oracles::lis_quadratic(c.points(), {0.0, 0.0, 1.0, 1.0});
    }
    out.push_back(make_report("patience sorting vs quadratic LIS (1000 x 12 points)", 0.0,
                              static_cast<double>(mismatches), 0.0, 12000));
  }
  {
    double worst = 0.0;
    for (int x = 1; x <= 5; ++x)
      for (int y = 1; y <= 5; ++y)
        for (int r = 1; r <= 9; ++r)
          worst = std::max(worst, std::abs(gamma_compare(x, y, r / 10.0) - oracles::gamma_compare_integrate(x, y, r / 10.0)));
    out.push_back(make_report("gamma_compare vs quadrature", 0.0, worst, 1e-8, 225));
  }
  {
    double worst = 0.0;
    for (int k = 1; k <= 6; ++k)
      for (int r = 1; r <= 19; ++r) {
        const double rho = r / 20.0;
        for (Side s : {Side::plus, Side::minus}) {
          try {
            worst = std::max(worst, std::abs(gm1_residual(k, rho, s, gm1_fixed_point(k, rho, s))));
          } catch (const StabilityError&) {
          }
        }
      }
    out.push_back(make_report("gm1 fixed point residual", 0.0, worst, 1e-10, 6 * 19 * 2));
  }
  {
    const int k = 2;
    const double rho = 0.4;
    const double lam = gm1_fixed_point(k, rho, Side::plus);
    const double rate = (1.0 - rho) * (1.0 - lam);
    const auto s = oracles::s_plus_reconstruction(k, rho, 100000, seed);
    const double ks = ks_statistic(s, [rate](double x) { return x <= 0 ? 0.0 : -std::expm1(-rate * x); });
    out.push_back(make_report("S+ ~ Exp((1-rho)(1-lambda+)) via Lindley, KS", 0.0, ks, 0.05, 100000));
  }
  return out;
}

inline void write_oracle_csv(std::ostream& os, const std::vector<oracles::OracleReport>& reps) {
  os << "# schema=oracle/" << schema_version << "\nquantity,oracle,main,difference,tolerance,pass,cost\n";
  for (const auto& r : reps)
    os << '"' << r.quantity << "\"," << fmt17(r.oracle) << ',' << fmt17(r.main) << ',' << fmt17(r.difference) << ','
       << fmt17(r.tolerance) << ',' << (r.pass ? "true" : "false") << ',' << r.cost << '\n';
}

// ---------------------------------------------------------------------------
// Experiment run

struct ExperimentResult {
  nlohmann::json summary;
  bool pass = false;
};

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  out << s;
}

// Simulates speeds (or angles), compares them with the closed-form law and,
// optionally, compares the supremum-comparison estimates with the same law on
// the grid. Writes speeds.csv, law.csv and summary.json under out_dir.
inline ExperimentResult run_experiment(const ExperimentConfig& c, const std::filesystem::path& out_dir) {
  const BuiltProfile built = build_builtin(c.profile);
  const LimitLaw law = law_for(c.model, c.profile);
  const Interval support = law_support(c.model, built.profile);
  const std::vector<double> grid = c.grid.empty() ? interior_grid(support, c.grid_points) : c.grid;
  for (double x : grid) {
    const double eps = 1e-12 * std::max(1.0, std::abs(x));
    if (std::abs(x - support.lo) <= eps || std::abs(x - support.hi) <= eps)
      throw BoundaryRefusal("grid point " + fmt17(x) +
                            " lies on the support boundary, where the law may have an atom; refusing to evaluate");
  }
  std::filesystem::create_directories(out_dir);

  ExperimentResult res;
  nlohmann::json& s = res.summary;
  s["schema_version"] = schema_version;
  s["model"] = to_string(c.model);
  s["profile"] = c.profile;
  s["law"] = law.name;
  s["t"] = c.t;
  s["replicas"] = c.replicas;
  s["seed"] = c.seed;
  s["rarefaction"] = built.densities.rarefaction;
  bool pass = built.densities.rarefaction;

  // samples
  std::vector<double> samples;
  std::vector<std::string> failures;
  std::ostringstream speeds;
  speeds << "# schema=speeds/" << schema_version << "\nmodel,seed,t,speed\n";
  if (c.model == ModelKind::interface_angle) {
    const auto runs = interface_angles(std::get<TasepProfile>(built.profile), static_cast<long>(c.t), c.replicas,
                                       c.seed, c.threads);
    for (std::size_t r = 0; r < runs.size(); ++r) {
      if (!runs[r].ok) {
        failures.push_back("replica " + std::to_string(r) + ": " + runs[r].error);
        continue;
      }
      samples.push_back(runs[r].value);
      speeds << "interface_angle," << derive_seed(c.seed, Stream::weights, r) << ',' << fmt17(c.t) << ','
             << fmt17(runs[r].value) << '\n';
    }
  } else {
    SpeedModel m{c.model == ModelKind::tasep_speed ? SpeedModelKind::tasep : SpeedModelKind::hammersley,
                 built.profile};
    const SpeedReport rep = empirical_speed_cdf(m, c.t, c.replicas, c.seed, {}, c.threads);
    for (const auto& x : rep.samples) {
      samples.push_back(x.speed);
      speeds << to_string(c.model) << ',' << x.seed << ',' << fmt17(x.t) << ',' << fmt17(x.speed) << '\n';
    }
    failures = rep.failures;
  }
  write_text(out_dir / "speeds.csv", speeds.str());
  const double ks = ks_statistic(samples, [&](double x) { return law.cdf(x); });
  s["samples"] = samples.size();
  s["failures"] = failures;
  s["ks"] = ks;
  s["ks_pvalue"] = ks_pvalue(ks, static_cast<double>(samples.size()));
  s["ks_tolerance"] = c.ks_tolerance;
  s["ks_pass"] = ks <= c.ks_tolerance && failures.empty();
  pass = pass && s["ks_pass"].get<bool>();

  // law tabulation
  std::ostringstream lawcsv;
  write_law_csv(lawcsv, law, grid);
  write_text(out_dir / "law.csv", lawcsv.str());

  // supremum-comparison estimates on the grid
  if (c.estimate_replicas > 0) {
    nlohmann::json pts = nlohmann::json::array();
    bool ok = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const GeneralEstimate g = general_law_estimate(c.model, built.profile, grid[i], c.estimate_replicas,
                                                     derive_seed(c.seed, Stream::replica, 1000000 + i), 1e-6, c.threads);
      const double exact = law(grid[i]);
      const bool within = g.estimate.within(exact, c.ci_widths);
      ok = ok && within;
      pts.push_back({{"point", grid[i]}, {"estimate", g.estimate.value}, {"ci_half_width", g.estimate.half_width()},
                     {"law", exact}, {"within", within}});
    }
    s["estimates"] = pts;
    s["estimates_pass"] = ok;
    pass = pass && ok;
  }
  s["pass"] = pass;
  res.pass = pass;
  write_text(out_dir / "summary.json", s.dump(2) + "\n");
  return res;
}

}  // namespace rarefan
