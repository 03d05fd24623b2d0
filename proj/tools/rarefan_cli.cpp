// rarefan: law tables, simulations, comparisons, figure data and oracle reports.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rarefan/experiment.hpp"

namespace fs = std::filesystem;
using namespace rarefan;

namespace {

struct Common {
  std::uint64_t seed = 1;
  std::size_t replicas = 0;
  double t = 0.0;
  std::string config;
  std::string out = "out";
  unsigned threads = 0;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "base seed");
  app->add_option("--replicas", c.replicas, "number of replicas (overrides config)");
  app->add_option("--t", c.t, "time horizon (overrides config)");
  app->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "output directory");
  app->add_option("--threads", c.threads, "worker threads (0: all cores)");
}

ExperimentConfig config_from(const Common& c, const CLI::App* app) {
  if (c.config.empty()) throw ConfigError("--config is required");
  ExperimentConfig cfg = load_config(c.config);
  if (app->count("--seed")) cfg.seed = c.seed;
  if (c.replicas) cfg.replicas = c.replicas;
  if (c.t > 0.0) cfg.t = c.t;
  if (c.threads) cfg.threads = c.threads;
  return cfg;
}

void write_file(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path());
  write_text(p, s);
}

int cmd_tabulate(const Common& c, const CLI::App* app) {
  const ExperimentConfig cfg = config_from(c, app);
  const LimitLaw law = law_for(cfg.model, cfg.profile);
  const auto grid = cfg.grid.empty() ? interior_grid(law.support, cfg.grid_points) : cfg.grid;
  std::ostringstream os;
  write_law_csv(os, law, grid);
  write_file(fs::path(c.out) / "law.csv", os.str());
  std::cout << os.str();
  return 0;
}

int cmd_simulate(const Common& c, const CLI::App* app) {
  const ExperimentConfig cfg = config_from(c, app);
  const ExperimentResult r = run_experiment(cfg, c.out);
  std::cout << r.summary.dump(2) << "\n";
  return r.pass ? 0 : 1;
}

int cmd_compare(const Common& c, const CLI::App* app, const std::string& other, double tol) {
  const ExperimentConfig cfg = config_from(c, app);
  const LimitLaw a = law_for(cfg.model, cfg.profile);
  nlohmann::json s;
  s["schema_version"] = schema_version;
  s["law"] = a.name;
  bool pass = false;
  if (!other.empty()) {
    const ExperimentConfig ocfg = load_config(other);
    const LimitLaw b = law_for(ocfg.model, ocfg.profile);
    const auto grid = cfg.grid.empty() ? interior_grid(a.support, cfg.grid_points) : cfg.grid;
    const CompareSummary cs = compare_laws(a, b, grid, tol);
    s["against"] = b.name;
    s["max_abs_diff"] = cs.max_diff;
    s["at"] = cs.at;
    s["tolerance"] = tol;
    pass = cs.pass;
  } else {
    // law vs supremum-comparison estimates on the grid
    const BuiltProfile built = build_builtin(cfg.profile);
    const auto grid = cfg.grid.empty() ? interior_grid(a.support, cfg.grid_points) : cfg.grid;
    const std::size_t reps = cfg.estimate_replicas ? cfg.estimate_replicas : cfg.replicas;
    nlohmann::json pts = nlohmann::json::array();
    double worst = 0.0;
    pass = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const GeneralEstimate g = general_law_estimate(cfg.model, built.profile, grid[i], reps,
                                                     derive_seed(cfg.seed, Stream::replica, 1000000 + i), 1e-6,
                                                     cfg.threads);
      const double exact = a(grid[i]);
      const bool ok = g.estimate.within(exact, cfg.ci_widths);
      pass = pass && ok;
      worst = std::max(worst, std::abs(g.estimate.value - exact));
      pts.push_back({{"point", grid[i]}, {"estimate", g.estimate.value}, {"ci_half_width", g.estimate.half_width()},
                     {"law", exact}, {"within", ok}});
    }
    s["against"] = "supremum comparison";
    s["points"] = pts;
    s["max_abs_diff"] = worst;
    s["ci_widths"] = cfg.ci_widths;
  }
  s["pass"] = pass;
  write_file(fs::path(c.out) / "compare.json", s.dump(2) + "\n");
  std::cout << s.dump(2) << "\n";
  return pass ? 0 : 1;
}

int cmd_figure1(const Common& c) {
  std::ostringstream os;
  write_figure1_csv(os, figure1_rows());
  write_file(fs::path(c.out) / "figure1.csv", os.str());
  std::cout << os.str();
  return 0;
}

int cmd_oracle(const Common& c) {
  const auto reps = oracle_suite(c.seed);
  std::ostringstream os;
  write_oracle_csv(os, reps);
  write_file(fs::path(c.out) / "oracle.csv", os.str());
  bool pass = true;
  for (const auto& r : reps) {
    std::printf("%s  %-60s diff=%.3g tol=%.3g\n", r.pass ? "PASS" : "FAIL", r.quantity.c_str(), r.difference,
                r.tolerance);
    pass = pass && r.pass;
  }
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Second class particles and competition interfaces in rarefaction fans"};
  app.require_subcommand(1);

  Common common;
  auto* law = app.add_subcommand("law", "limit law utilities");
  law->require_subcommand(1);
  auto* tab = law->add_subcommand("tabulate", "tabulate the closed-form law on a grid");
  add_common(tab, common);

  auto* sim = app.add_subcommand("simulate", "simulate speeds or angles and compare with the law");
  add_common(sim, common);

  std::string other;
  double tol = 1e-12;
  auto* cmp = app.add_subcommand("compare", "compare a law with another law or with supremum-comparison estimates");
  add_common(cmp, common);
  cmp->add_option("--against", other, "second config whose law is compared on the grid")->check(CLI::ExistingFile);
  cmp->add_option("--tolerance", tol, "max abs difference for law-vs-law comparison");

  auto* fig = app.add_subcommand("figure1", "P(S+ >= S-) for periodic Hammersley data, lambda=1, mu=2");
  add_common(fig, common);

  auto* orc = app.add_subcommand("oracle", "run the brute-force oracle suite");
  add_common(orc, common);

  CLI11_PARSE(app, argc, argv);
  try {
    if (tab->parsed()) return cmd_tabulate(common, tab);
    if (sim->parsed()) return cmd_simulate(common, sim);
    if (cmp->parsed()) return cmd_compare(common, cmp, other, tol);
    if (fig->parsed()) return cmd_figure1(common);
    if (orc->parsed()) return cmd_oracle(common);
  } catch (const BoundaryRefusal& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
