#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "rarefan/experiment.hpp"

namespace fs = std::filesystem;
using namespace rarefan;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rarefan_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RAREFAN_CLI) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const nlohmann::json small_config = {
    {"model", "tasep_speed"},
    {"profile", {{"family", "two_corner"}, {"params", {{"x", 1}, {"y", 1}}}}},
    {"t", 40},
    {"replicas", 40},
    {"seed", 3},
    {"ks_tolerance", 1.0},
    {"estimate_replicas", 2000},
    {"grid_points", 3}};

}  // namespace

TEST(Config, ParsesAndValidates) {
  const ExperimentConfig c = parse_config(small_config);
  EXPECT_EQ(c.model, ModelKind::tasep_speed);
  EXPECT_EQ(c.profile.family, "two_corner");
  EXPECT_EQ(c.replicas, 40u);
  nlohmann::json bad = small_config;
  bad["replica"] = 3;
  EXPECT_THROW(parse_config(bad), ConfigError);
  EXPECT_THROW(parse_config({{"model", "tasep_speed"}}), ConfigError);
  bad = small_config;
  bad["model"] = "glauber";
  EXPECT_THROW(parse_config(bad), ConfigError);
  bad = small_config;
  bad["t"] = "long";
  EXPECT_THROW(parse_config(bad), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, LawMatchesSystem) {
  EXPECT_THROW(law_for(ModelKind::hammersley_speed, {"two_corner", {{"x", 1}, {"y", 1}}}), ConfigError);
  EXPECT_EQ(law_for(ModelKind::interface_angle, {"two_corner", {{"x", 1}, {"y", 1}}}).kind, LawKind::angle_cdf);
  EXPECT_THROW(interior_grid({0.0, std::numeric_limits<double>::infinity()}, 3), ConfigError);
  const auto g = interior_grid({-1.0, 1.0}, 3);
  EXPECT_EQ(g, (std::vector<double>{-0.5, 0.0, 0.5}));
}

TEST(Figure1, RowsAndEndpoints) {
  const auto rows = figure1_rows();
  ASSERT_EQ(rows.size(), 201u);
  EXPECT_EQ(rows.front().rho, 1.0);
  EXPECT_EQ(rows.front().p, 1.0);
  EXPECT_EQ(rows.back().rho, 2.0);
  EXPECT_EQ(rows.back().p, 0.0);
  EXPECT_NEAR(rows[100].p, 0.4115, 5e-4);
  EXPECT_NEAR(rows[20].p, 0.8585, 5e-4);
  EXPECT_NEAR(rows[180].p, 0.0741, 5e-4);
  for (const auto& r : rows) EXPECT_NEAR(r.uniform, 2.0 - r.rho, 1e-15);
}

TEST(Compare, PeriodicLimitEqualsTwoCorner) {
  const LimitLaw a = periodic_tasep_cdf(60, 60), b = two_corner_cdf(1, 1);
  // λ± are of order max(ρ,1−ρ)^60, negligible in the middle of the fan
  const CompareSummary s = compare_laws(a, b, interior_grid({-0.5, 0.5}, 9), 1e-6);
  EXPECT_TRUE(s.pass) << s.max_diff;
  EXPECT_THROW(compare_laws(a, angle_law(b), {0.1}, 1.0), InvalidParameter);
}

TEST(RunExperiment, WritesReportsDeterministically) {
  const ExperimentConfig c = parse_config(small_config);
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  const ExperimentResult ra = run_experiment(c, a);
  run_experiment(c, b);
  for (const char* f : {"speeds.csv", "law.csv", "summary.json"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  EXPECT_EQ(ra.summary["samples"].get<std::size_t>(), 40u);
  EXPECT_EQ(ra.summary["estimates"].size(), 3u);
  EXPECT_EQ(slurp(a / "law.csv").rfind("# schema=law/1 law=two_corner(1,1) kind=speed_tail\npoint,value,method,error_bound\n", 0), 0u);
}

TEST(RunExperiment, InterfaceAngles) {
  nlohmann::json j = small_config;
  j["model"] = "interface_angle";
  j["t"] = 60;
  j["replicas"] = 20;
  j["estimate_replicas"] = 0;
  const ExperimentResult r = run_experiment(parse_config(j), scratch("angles"));
  EXPECT_EQ(r.summary["samples"].get<std::size_t>(), 20u);
  EXPECT_TRUE(r.summary["failures"].empty());
}

TEST(RunExperiment, RefusesBoundaryGridPoints) {
  ExperimentConfig c = load_config(RAREFAN_SAMPLES "/boundary.json");
  EXPECT_THROW(run_experiment(c, scratch("boundary")), BoundaryRefusal);
}

TEST(Cli, ExitCodes) {
  const fs::path out = scratch("cli");
  EXPECT_EQ(run_cli("figure1 --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "figure1.csv"));
  EXPECT_EQ(run_cli("simulate --config " RAREFAN_SAMPLES "/boundary.json --out " + out.string()), 3);
  {
    std::ofstream bad(out / "bad.json");
    bad << R"({"model": "tasep_speed"})";
  }
  EXPECT_EQ(run_cli("simulate --config " + (out / "bad.json").string() + " --out " + out.string()), 2);
  EXPECT_EQ(run_cli("law tabulate --config " RAREFAN_SAMPLES "/bernoulli.json --out " + out.string()), 0);
  EXPECT_NE(slurp(out / "law.csv").find("kind=speed_tail"), std::string::npos);
  EXPECT_EQ(run_cli("compare --config " RAREFAN_SAMPLES "/periodic_limit.json --against " RAREFAN_SAMPLES
                    "/two_corner.json --tolerance 1e-6 --out " + out.string()),
            0);
  EXPECT_NE(run_cli("nonsense"), 0);
}

TEST(Cli, SimulateIsByteIdentical) {
  const fs::path cfg = scratch("cli_cfg") / "small.json";
  {
    std::ofstream o(cfg);
    o << small_config.dump();
  }
  const fs::path a = scratch("cli_a"), b = scratch("cli_b");
  EXPECT_EQ(run_cli("simulate --config " + cfg.string() + " --threads 1 --out " + a.string()), 0);
  EXPECT_EQ(run_cli("simulate --config " + cfg.string() + " --threads 2 --out " + b.string()), 0);
  for (const char* f : {"speeds.csv", "law.csv", "summary.json"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  // --seed overrides the config and changes the samples
  const fs::path c = scratch("cli_c");
  run_cli("simulate --config " + cfg.string() + " --seed 99 --out " + c.string());
  EXPECT_NE(slurp(a / "speeds.csv"), slurp(c / "speeds.csv"));
}
