// Command-line entry point: derive equations, solve extremals, run checks.

#include <hgf/problem_file.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace hgf;

int main(int argc, char** argv) {
  CLI::App app{"Herglotz variational problems with moving frames"};
  app.require_subcommand(1);

  std::string file;
  bool coordinates = false, invariant = false;
  auto* derive = app.add_subcommand("derive", "print the Euler-Lagrange system");
  derive->add_option("file", file, "problem file")->required();
  derive->add_flag("--coordinates", coordinates, "coordinate-variable form");
  derive->add_flag("--invariant", invariant, "invariantized form");

  std::string csv_out;
  auto* solve = app.add_subcommand("solve", "integrate the extremal system");
  solve->add_option("file", file, "problem file")->required();
  solve->add_option("--csv", csv_out, "write the trajectory CSV here");

  std::string suite = "all";
  unsigned seed = 0;
  auto* check = app.add_subcommand("check", "run verification oracles");
  check->add_option("file", file, "problem file")->required();
  check->add_option("--suite", suite, "frames|variation|syzygy|conservation|all")
      ->check(CLI::IsMember({"frames", "variation", "syzygy", "conservation", "all"}));
  check->add_option("--seed", seed, "seed for randomized checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ProblemFile pf = load_problem_file(file);

    if (derive->parsed()) {
      if (!coordinates && !invariant) coordinates = true;
      if (coordinates) std::cout << render_coordinate_el(pf) << "\n";
      if (invariant) {
        std::cout << render_invariant_el(pf) << "\n";
        std::cout << "conserved: " << render_conserved(pf) << "\n";
      }
      return 0;
    }

    if (solve->parsed()) {
      HerglotzProblem p = to_herglotz(pf);
      Trajectory tr = solve_extremal(p, numeric_params(pf), pf.init, pf.final_data,
                                     pf.span0, pf.span1, {pf.rtol, pf.atol});
      if (csv_out.empty()) {
        write_csv(tr, std::cout);
      } else {
        std::ofstream os(csv_out);
        if (!os) throw problem_file_error("cannot write " + csv_out);
        write_csv(tr, os);
      }
      return 0;
    }

    // check
    std::vector<CheckResult> results = run_checks(pf, suite, seed);
    std::cout << to_json(results).dump(2) << "\n";
    for (auto& r : results)
      if (!r.pass) return 1;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
