#include <doctest.h>

#include <cmath>
#include <iomanip>
#include <sstream>

#include "hmmdiv/errors.hpp"
#include "hmmdiv/study.hpp"

using namespace hmmdiv;

namespace {

CaseSpec quick_case() {
  CaseSpec c = paper_cases().cases[0];
  c.alphas = {0.5, kKlAlpha};
  c.reference = {c.reference[0], c.reference[4]};
  c.mc.n = 200;
  c.mc.reps = 5;
  return c;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

TEST_CASE("bundled config matches the built-in case table") {
  const StudyConfig bundled = load_config(HMMDIV_BUNDLED_CONFIG);
  CHECK(bundled == paper_cases());
  CHECK(bundled.cases.size() == 8);
  for (const auto& c : bundled.cases) {
    CHECK(c.alphas.size() == 9);
    CHECK(c.reference.size() == 9);
    CHECK(c.mc == McConfig{});
    CHECK(c.grid == GridSpec{});
    CHECK(c.family() == Family::B);
  }
}

TEST_CASE("config round trip") {
  const StudyConfig cfg = paper_cases();
  CHECK(parse_config(serialize_config(cfg)) == cfg);

  CaseSpec a;
  a.name = "two-state";
  ModelAParams m;
  m.p00 = 0.7;
  m.mu = {1.0, -0.5};
  m.sigma = {1.0, 1.3};
  a.theta1 = m;
  m.mu = {0.5, 0.0};
  a.theta = m;
  a.alphas = {0.25, kKlAlpha, 3.0};
  a.mc.seed = 12345678901234ULL;
  a.grid.N = 12;
  CHECK(parse_case(serialize_case(a)) == a);
}

TEST_CASE("defaults and per-case overrides") {
  const std::string text = R"({
    "alphas": [0.5, "kl"],
    "mc": {"n": 100},
    "grid": {"N": 20},
    "cases": [
      {"name": "x", "family": "B",
       "theta1": {"p01": 0.4, "p10": 0.59, "mu": [2, 2], "phi": 0, "psi1": 1, "psi2": 0, "sigma": 0.9},
       "theta":  {"p01": 0.4, "p10": 0.59, "mu": [1, 1], "phi": 0, "psi1": 1, "psi2": 0, "sigma": 1},
       "alphas": ["KL"], "mc": {"reps": 3}}
    ]})";
  const auto cfg = parse_config(text);
  const auto& c = cfg.cases.at(0);
  CHECK(c.alphas == std::vector<double>{kKlAlpha});
  CHECK(c.mc.n == 100);
  CHECK(c.mc.reps == 3);
  CHECK(c.grid.N == 20);
  CHECK(c.grid.a == 15.0);
}

TEST_CASE("config errors name the offending key") {
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  const std::string theta =
      R"({"p01": 0.4, "p10": 0.59, "mu": [1, 1], "phi": 0, "psi1": 1, "psi2": 0, "sigma": 1})";
  const std::string missing_sigma =
      R"({"p01": 0.4, "p10": 0.59, "mu": [1, 1], "phi": 0, "psi1": 1, "psi2": 0})";
  auto doc = [&](const std::string& t1, const std::string& alphas) {
    return R"({"alphas": )" + alphas + R"(, "cases": [{"name": "c", "family": "B", "theta1": )" +
           t1 + R"(, "theta": )" + theta + "}]}";
  };
  CHECK(message(doc(missing_sigma, "[0.5]")).find("cases[0].theta1.sigma") != std::string::npos);
  CHECK(message(doc(theta, R"([0.5, "abc"])")).find("alphas[1]") != std::string::npos);
  CHECK(message(doc(theta, "[-1]")).find("alphas[0]") != std::string::npos);
  CHECK(message(doc(theta, "[]")).find("alphas must be non-empty") != std::string::npos);
  CHECK(message(R"({"cases": [], "bogus": 1})").find("bogus") != std::string::npos);
  CHECK(message("{not json").find("malformed") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("methods parsing") {
  CHECK(parse_methods("mc").mc);
  CHECK_FALSE(parse_methods("mc").fredholm);
  CHECK(parse_methods("fredholm,mc").fredholm);
  CHECK_THROWS_AS(parse_methods("exact"), ConfigError);
}

TEST_CASE("run_case fills the requested methods") {
  const CaseSpec c = quick_case();
  const auto rows = run_case(c, {true, true});
  REQUIRE(rows.size() == 2);
  CHECK(std::abs(*rows[0].fredholm - 0.1091) <= 0.01);
  CHECK(rows[0].mc_mean.has_value());
  CHECK(std::isfinite(*rows[0].relative_error_pct()));
  CHECK(rows[0].diagnostics->eigen_residual <= 1e-10);

  const auto fred_only = run_case(c, {false, true});
  CHECK_FALSE(fred_only[0].mc_mean.has_value());
  CHECK(fred_only[0].fredholm == rows[0].fredholm);
  const std::string csv = format_csv(fred_only);
  CHECK(split(split(csv, '\n')[1], ',')[3].empty());

  CaseSpec empty = c;
  empty.alphas.clear();
  empty.reference.clear();
  CHECK_THROWS_AS(run_case(empty, {true, true}), ConfigError);
}

TEST_CASE("identical models give zero in every cell") {
  CaseSpec c = quick_case();
  c.theta1 = c.theta;
  c.reference.clear();
  for (const auto& r : run_case(c, {true, true})) {
    CHECK(*r.fredholm == 0.0);
    CHECK(*r.mc_mean == 0.0);
  }
}

TEST_CASE("text and CSV carry the same values") {
  const auto rows = run_case(quick_case(), {true, true});
  const std::string csv = format_csv(rows);
  const std::string table = format_table(rows);
  const auto lines = split(csv, '\n');
  REQUIRE(lines.size() >= 3);
  for (std::size_t i = 1; i < 3; ++i) {
    const auto f = split(lines[i], ',');
    const double fred = std::stod(f[2]), mc = std::stod(f[3]);
    std::ostringstream a, b;
    a << std::fixed << std::setprecision(4) << fred;
    b << std::fixed << std::setprecision(4) << mc;
    CHECK(table.find(a.str()) != std::string::npos);
    CHECK(table.find(b.str()) != std::string::npos);
  }
  CHECK(table.find("[KL]") != std::string::npos);
  CHECK(format_diagnostics(rows).find("eigen_residual") != std::string::npos);
}

TEST_CASE("band check names every failing cell") {
  StudyConfig cfg;
  cfg.cases.push_back(quick_case());
  auto rows = run_case(cfg.cases[0], {false, true});
  CHECK(check_bands(cfg, rows).empty());
  rows[0].fredholm = 0.5;
  rows[1].fredholm = 0.9;
  const auto failures = check_bands(cfg, rows);
  REQUIRE(failures.size() == 2);
  CHECK(failures[0].case_name == "1");
  CHECK(failures[0].alpha == 0.5);
  CHECK(routes_to_kl(failures[1].alpha));
  CHECK(alpha_label(failures[1].alpha) == "KL");
}
