// hmmdiv: divergence rates between Markov switching models.
//
//   hmmdiv run <config.json> [--methods mc,fredholm] [--check] [--out DIR]
//   hmmdiv selftest
//   hmmdiv print-defaults

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hmmdiv/errors.hpp"
#include "hmmdiv/forward.hpp"
#include "hmmdiv/fredholm.hpp"
#include "hmmdiv/monte_carlo.hpp"
#include "hmmdiv/study.hpp"

namespace fs = std::filesystem;
using namespace hmmdiv;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int cmd_run(const std::string& config_path, const std::string& methods, bool check,
            const std::string& out_dir) {
  const StudyConfig cfg = load_config(config_path);
  const auto rows = run_study(cfg, parse_methods(methods));
  const std::string table = format_table(rows);
  std::cout << table;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "table.txt", table);
    write_file(fs::path(out_dir) / "table.csv", format_csv(rows));
    write_file(fs::path(out_dir) / "diagnostics.json", format_diagnostics(rows));
  }
  if (!check) return 0;
  const auto failures = check_bands(cfg, rows);
  for (const auto& f : failures)
    std::cerr << "FAIL case " << f.case_name << " alpha " << alpha_label(f.alpha) << ": "
              << f.what << "\n";
  std::cerr << (failures.empty() ? "all bands satisfied\n"
                                 : std::to_string(failures.size()) + " band violation(s)\n");
  return failures.empty() ? 0 : 3;
}

// Fast checks that need no reference data.
int cmd_selftest() {
  int failed = 0;
  auto report = [&](const std::string& name, bool ok, const std::string& detail = {}) {
    std::cout << (ok ? "ok   " : "FAIL ") << name;
    if (!detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << "\n";
    failed += ok ? 0 : 1;
  };

  {
    const double v = noncentral_chisq1_cdf(1.0, 0.0);
    report("chi2_1 central", std::abs(v - (2.0 * normal_cdf(1.0) - 1.0)) < 1e-12);
  }

  {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.1, 0.9), y(-2.0, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      ModelBParams m{u(rng), u(rng), {y(rng), y(rng)}, 0.2 * y(rng), 1.0, 0.2, 0.5 + u(rng)};
      const auto chain = to_chain(m);
      std::vector<double> obs(6);
      for (auto& o : obs) o = y(rng);
      const double f = log_likelihood(chain, obs, 0.3);
      worst = std::max(worst, std::abs(f - brute_force_log_likelihood(chain, obs, 0.3)));
      worst = std::max(worst, std::abs(f - matrix_log_likelihood(chain, obs, 0.3)));
    }
    report("forward vs brute force vs matrix", worst < 1e-9, "max diff " + std::to_string(worst));
  }

  const StudyConfig paper = paper_cases();
  const CaseSpec& c8 = paper.cases[7];
  {
    const GridSpec g;
    const std::vector<double> alphas{0.5, 2.0, kKlAlpha};
    const auto same = divergence_fredholm_grid(c8.theta, c8.theta, alphas, g);
    bool zero = true;
    for (const auto& r : same) zero = zero && r.value == 0.0;
    report("fredholm identity", zero);

    McConfig mc;
    mc.n = 200;
    mc.reps = 4;
    const auto est = estimate_mc_grid(to_chain(c8.theta), to_chain(c8.theta), alphas, mc);
    bool mc_zero = true;
    for (const auto& e : est) mc_zero = mc_zero && e.mean == 0.0;
    report("monte carlo identity", mc_zero);

    // Case 8 has equal regime means: i.i.d. Gaussians, closed form KL.
    const double kl = std::log(1.0 / 0.9) + (0.81 + 1.0) / 2.0 - 0.5;
    const double got = divergence_fredholm(c8.theta1, c8.theta, kKlAlpha, g).value;
    report("fredholm gaussian KL", std::abs(got - kl) < 0.02 * kl,
           std::to_string(got) + " vs " + std::to_string(kl));
  }

  std::cout << (failed ? std::to_string(failed) + " check(s) failed\n" : "all checks passed\n");
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Divergence rates between Markov switching models"};
  app.require_subcommand(1);

  std::string config, methods = "mc,fredholm", out_dir;
  bool check = false;
  auto* run = app.add_subcommand("run", "Run the engines over a case configuration");
  run->add_option("config", config, "JSON case configuration")->required();
  run->add_option("--methods", methods, "Comma-separated subset of mc,fredholm");
  run->add_flag("--check", check, "Exit non-zero if any reference band is violated");
  run->add_option("--out", out_dir, "Write table.txt, table.csv and diagnostics.json here");

  auto* selftest = app.add_subcommand("selftest", "Run built-in oracle and identity checks");
  auto* defaults = app.add_subcommand("print-defaults", "Print the bundled case configuration");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, methods, check, out_dir);
    if (*selftest) return cmd_selftest();
    if (*defaults) {
      std::cout << serialize_config(paper_cases());
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
