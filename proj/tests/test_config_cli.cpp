#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bdcalc/config.hpp"

using namespace bdcalc;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BDCALC_CLI_PATH) + " " + args +
                          " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path tmp_dir() {
  fs::path p(BDCALC_TEST_TMP);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("toml subset parser") {
  const auto doc = parse_toml(
      "# comment\n"
      "[model]\n"
      "n = 2      # inline comment\n"
      "theta = 3.14\n"
      "name = \"hello\"\n"
      "flag = true\n"
      "mu_list = [1, 2.5, 4]\n"
      "pi = [[1, 0], [0, \"xi1\"]]\n");
  const auto& m = doc.at("model");
  CHECK(m.at("n").num() == 2.0);
  CHECK(m.at("theta").num() == doctest::Approx(3.14));
  CHECK(m.at("name").str() == "hello");
  CHECK(m.at("flag").boolean());
  CHECK(m.at("mu_list").array().size() == 3);
  CHECK(m.at("pi").array()[1].array()[1].str() == "xi1");

  CHECK_THROWS_AS(parse_toml("[t]\nkey 5\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[t]\nkey = \"unterminated\n"), ConfigError);
}

TEST_CASE("expression grammar") {
  RVec xi(1);
  xi << 2.0;
  SUBCASE("polynomials with complex literals") {
    auto e = Expression::parse("xi1^2 + 3*mu - 2i", 1);
    CHECK(std::abs(e.eval(xi, 0.0, 1.5) - Complex(8.5, -2.0)) < 1e-14);
  }
  SUBCASE("rational expressions and the constant i") {
    auto e = Expression::parse("(xi1 + i)/(1 + mu)", 1);
    CHECK(std::abs(e.eval(xi, 0.0, 1.0) - Complex(1.0, 0.5)) < 1e-14);
  }
  SUBCASE("xin and negative powers") {
    auto e = Expression::parse("xin^-2 * 4", 1);
    CHECK(std::abs(e.eval(xi, 2.0, 0.0) - Complex(1.0, 0.0)) < 1e-14);
  }
  SUBCASE("unknown names are rejected") {
    CHECK_THROWS_AS(Expression::parse("zeta + 1", 1), ConfigError);
    CHECK_THROWS_AS(Expression::parse("xi7", 1), ConfigError);
  }
}

TEST_CASE("scenario schema validation") {
  SUBCASE("missing model table") {
    CHECK_THROWS_AS(ScenarioConfig::from_toml(parse_toml("[bc]\n")),
                    ConfigError);
  }
  SUBCASE("theta outside (0, 2pi) requires the flag") {
    const auto doc = parse_toml("[model]\nn = 2\ntheta = 0.0\n");
    CHECK_THROWS_AS(ScenarioConfig::from_toml(doc), ConfigError);
    CHECK_NOTHROW(ScenarioConfig::from_toml(doc, true));
  }
  SUBCASE("a full scenario materializes model and bc") {
    const auto doc = parse_toml(
        "[model]\nn = 2\nL = 1\ntheta = 1.57\n"
        "[bc]\nkind = \"robin\"\nb = \"xi1\"\n"
        "[grid]\nN_laguerre = 64\nmu_list = [2, 4]\n");
    auto cfg = ScenarioConfig::from_toml(doc);
    auto model = cfg.model();
    CHECK(model.theta == doctest::Approx(1.57));
    auto bc = cfg.boundary_condition();
    RVec xi(1);
    xi << 3.0;
    CHECK(std::abs(bc.b_at(xi, 1)(0, 0) - Complex(3.0, 0.0)) < 1e-14);
  }
}

TEST_CASE("cli exit code contract") {
  const std::string cfgs(BDCALC_CONFIG_DIR);
  const auto out = tmp_dir();

  SUBCASE("passing scenario exits 0") {
    CHECK(run_cli("check-ellipticity --config " + cfgs +
                  "/dirichlet.toml --out " + (out / "a").string()) == 0);
  }
  SUBCASE("failing scenario exits 2") {
    CHECK(run_cli("check-ellipticity --config " + cfgs +
                  "/theta0_control.toml --allow-theta-zero --out " +
                  (out / "b").string()) == 2);
    CHECK(run_cli("check-ellipticity --config " + cfgs +
                  "/pi2_fail_control.toml --out " + (out / "c").string()) == 2);
  }
  SUBCASE("malformed config exits 1") {
    const auto bad = out / "bad.toml";
    std::ofstream(bad) << "[model\nn = 2\n";
    CHECK(run_cli("check-ellipticity --config " + bad.string()) == 1);
    // schema violation without the negative-control flag
    CHECK(run_cli("check-ellipticity --config " + cfgs +
                  "/theta0_control.toml") == 1);
  }
  SUBCASE("selftest exits 0") { CHECK(run_cli("selftest") == 0); }
}

TEST_CASE("cli outputs are deterministic") {
  const std::string cfgs(BDCALC_CONFIG_DIR);
  const auto out1 = tmp_dir() / "d1";
  const auto out2 = tmp_dir() / "d2";
  REQUIRE(run_cli("trace-fit --config " + cfgs + "/dirichlet.toml --out " +
                  out1.string() + " --seed 7") == 0);
  REQUIRE(run_cli("trace-fit --config " + cfgs + "/dirichlet.toml --out " +
                  out2.string() + " --seed 7 --threads 3") == 0);
  CHECK(slurp(out1 / "trace_density.csv") == slurp(out2 / "trace_density.csv"));
  CHECK(slurp(out1 / "trace_fit.json") == slurp(out2 / "trace_fit.json"));

  // 17 significant digits in the CSV
  const std::string csv = slurp(out1 / "trace_density.csv");
  CHECK(csv.find("0.0625") != std::string::npos);
}
