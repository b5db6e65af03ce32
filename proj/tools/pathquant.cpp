// pathquant: run verification suites from scenario files.
//
//   pathquant run --scenario s.json [--out report.json] [--csv report.csv]
//   pathquant sweep --scenario s.json --param N|h --levels 4 [--out table.json]
//   pathquant --list-suites
//
// Exit codes: 0 all checks pass, 1 some check failed, 2 configuration error.

#include <iostream>

#include <CLI11.hpp>

#include "pathquant/verify.hpp"

namespace {

int summarize(const pathquant::ResidualReport& rep) {
  for (const auto& c : rep.checks) {
    std::cout << (c.pass ? "pass " : "FAIL ") << c.id << "  residual=" << c.residual << "  tol=" << c.tolerance;
    if (!c.error.empty()) std::cout << "  error: " << c.error;
    std::cout << '\n';
  }
  std::cout << rep.passed() << "/" << rep.checks.size() << " checks passed\n";
  return rep.failed() == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification suites for path-space prequantization"};
  app.require_subcommand(0, 1);
  bool list = false;
  app.add_flag("--list-suites", list, "Print the available suite names");

  std::string scenario_file, out_file, csv_file, param = "N";
  int levels = 4;
  auto* run = app.add_subcommand("run", "Run the suite named in a scenario");
  run->add_option("--scenario", scenario_file, "Scenario JSON file")->required();
  run->add_option("--out", out_file, "Report path (overrides the scenario's output)");
  run->add_option("--csv", csv_file, "Optional flat CSV table");

  auto* sweep = app.add_subcommand("sweep", "Refine N or h and report observed orders");
  sweep->add_option("--scenario", scenario_file, "Scenario JSON file")->required();
  sweep->add_option("--param", param, "Refined parameter")->check(CLI::IsMember({"N", "h"}));
  sweep->add_option("--levels", levels, "Number of refinement levels (>= 3)");
  sweep->add_option("--out", out_file, "Table path");

  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& s : pathquant::suite_names()) std::cout << s << '\n';
    return 0;
  }
  try {
    if (*run) {
      const auto sc = pathquant::load_scenario(scenario_file);
      const auto rep = pathquant::run_suite(sc);
      const std::string out = out_file.empty() ? sc.output : out_file;
      const std::string csv = csv_file.empty() ? sc.csv : csv_file;
      if (!out.empty()) pathquant::write_report(rep, out, csv);
      return summarize(rep);
    }
    if (*sweep) {
      const auto sc = pathquant::load_scenario(scenario_file);
      const auto table = pathquant::convergence_sweep(sc, pathquant::parse_sweep_param(param), levels);
      const auto j = table.to_json();
      if (!out_file.empty()) {
        std::ofstream f(out_file);
        if (!f) throw pathquant::ConfigError("cannot write " + out_file);
        f << j.dump(2) << '\n';
      }
      for (const auto& r : table.rows) {
        std::cout << r.id << "  order=";
        if (r.order)
          std::cout << *r.order;
        else
          std::cout << "floor";
        std::cout << '\n';
      }
      return 0;
    }
  } catch (const pathquant::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const pathquant::SuiteUnknownError& e) {
    std::cerr << "unknown suite: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::cout << app.help();
  return 2;
}
