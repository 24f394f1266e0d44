#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "pfaffopt/commands.hpp"
#include "pfaffopt/errors.hpp"
#include "pfaffopt/verify.hpp"

namespace {

enum Exit { ok = 0, verification_failed = 1, input_error = 2, solver_error = 3, singular_path = 4 };

struct Common {
  std::string file;
  std::uint64_t seed = 42;
  std::optional<double> tol;
  std::optional<int> starts;
  std::string out = "json";
  std::vector<std::string> grid;
  std::string anchor;
  std::vector<std::string> mu;
  std::string range;
};

pfaffopt::io::RunOptions run_options(const Common& c) {
  pfaffopt::io::RunOptions ro;
  ro.seed = c.seed;
  ro.tol = c.tol;
  ro.starts = c.starts;
  for (const auto& g : c.grid) ro.grid.push_back(pfaffopt::io::parse_axis(g));
  if (!c.anchor.empty()) ro.anchor = pfaffopt::io::parse_vector(c.anchor);
  for (const auto& m : c.mu) ro.mu.push_back(pfaffopt::io::parse_vector(m));
  if (!c.range.empty()) ro.range = pfaffopt::io::parse_axis(c.range);
  return ro;
}

void add_common(CLI::App* cmd, Common& c, bool needs_file = true,
                std::vector<std::string> formats = {"json", "csv"}) {
  if (needs_file) cmd->add_option("file", c.file, "problem file (JSON)")->required();
  cmd->add_option("--seed", c.seed, "multistart seed")->capture_default_str();
  cmd->add_option("--tol", c.tol, "solver tolerance (overrides the file)");
  cmd->add_option("--starts", c.starts, "number of multistart points (overrides the file)");
  cmd->add_option("--out", c.out, "output format")->check(CLI::IsMember(formats));
}

void emit(const nlohmann::json& report, const std::string& format) {
  std::cout << (format == "csv" ? pfaffopt::io::to_csv(report) : pfaffopt::io::dump(report));
}

int run_verify(const std::string& corpus, bool properties, std::uint64_t seed, const std::string& format) {
  using namespace pfaffopt::verify;
  const std::filesystem::path dir = corpus.empty() ? default_corpus_dir() : std::filesystem::path(corpus);
  auto outcomes = check_corpus(dir, seed);
  if (properties) {
    const auto more = property_suite(load_corpus(dir), seed);
    outcomes.insert(outcomes.end(), more.begin(), more.end());
  }
  const auto report = report_json(outcomes);
  if (format == "json") {
    std::cout << pfaffopt::io::dump(report);
  } else {
    for (const auto& o : outcomes) {
      std::cout << status_name(o.status) << " [" << o.criterion << "] " << o.source << ": " << o.label;
      if (!o.expected.empty() || !o.actual.empty())
        std::cout << " | expected " << o.expected << " | actual " << o.actual << " | tol " << o.tolerance;
      if (!o.detail.empty()) std::cout << " | " << o.detail;
      std::cout << '\n';
    }
    std::map<int, std::string> per;
    for (const auto& [c, s] : report["criteria"].items()) per[std::stoi(c)] = s.get<std::string>();
    for (const auto& [c, s] : per) std::cout << "criterion " << c << ": " << s << '\n';
  }
  return report["passed"].get<bool>() ? ok : verification_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimization with holonomic and Pfaff (nonholonomic) constraints"};
  app.require_subcommand(1);
  Common c;

  auto* solve = app.add_subcommand("solve", "critical points and their classification");
  add_common(solve, c);
  solve->add_option("--mu", c.mu, "multiplier vector for Pfaff programs (comma-separated, repeatable)");

  auto* dual = app.add_subcommand("dual", "dual function samples and optimum");
  add_common(dual, c);
  std::string kind = "psi";
  dual->add_option("--kind", kind, "dual kind")->check(CLI::IsMember({"psi", "ec", "theta", "wolfe"}))->capture_default_str();
  dual->add_option("--grid", c.grid, "grid axis from:to:count[:log] (repeatable, one per multiplier)");
  dual->add_option("--anchor", c.anchor, "anchor multipliers (comma-separated)");

  auto* sweep = app.add_subcommand("sweep", "critical points along a multiplier range");
  add_common(sweep, c);
  std::string param = "mu";
  sweep->add_option("--param", param, "swept multiplier")->check(CLI::IsMember({"mu", "lambda"}))->capture_default_str();
  sweep->add_option("--range", c.range, "from:to:count");

  auto* verify = app.add_subcommand("verify", "regression checks over the problem corpus");
  std::string corpus;
  bool no_properties = false;
  verify->add_option("--corpus", corpus, "corpus directory (default: PFAFFOPT_CORPUS_DIR or the bundled corpus)");
  verify->add_flag("--no-properties", no_properties, "skip the property suites");
  add_common(verify, c, false, {"text", "json"});

  auto* frob = app.add_subcommand("frobenius", "integrability test of each Pfaff constraint");
  add_common(frob, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return input_error;
  }
  if (verify->parsed() && verify->count("--out") == 0) c.out = "text";

  const auto t0 = std::chrono::steady_clock::now();
  int code = ok;
  try {
    if (verify->parsed()) {
      code = run_verify(corpus, !no_properties, c.seed, c.out);
    } else {
      const auto pf = pfaffopt::io::load_problem(c.file);
      const auto ro = run_options(c);
      if (solve->parsed()) emit(pfaffopt::io::run_solve(pf, ro), c.out);
      if (dual->parsed()) emit(pfaffopt::io::run_dual(pf, pfaffopt::io::dual_command_from_name(kind), ro), c.out);
      if (sweep->parsed()) emit(pfaffopt::io::run_sweep(pf, param, ro), c.out);
      if (frob->parsed()) emit(pfaffopt::io::run_frobenius(pf, ro), c.out);
    }
  } catch (const pfaffopt::SingularPathError& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = singular_path;
  } catch (const pfaffopt::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = input_error;
  } catch (const pfaffopt::ExprError& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = input_error;
  } catch (const pfaffopt::SolverError& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = solver_error;
  } catch (const pfaffopt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = solver_error;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout.flush();
  std::fprintf(stderr, "wall time: %.3f s\n", secs);
  return code;
}
