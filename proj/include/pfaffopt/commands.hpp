#pragma once

// Structured reports for the command-line subcommands. Every number is
// rounded to 12 significant digits; non-finite values become "inf", "-inf"
// or "nan". Reports contain no timing, so equal inputs give equal bytes.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pfaffopt/problem_io.hpp"

namespace pfaffopt::io {

struct RunOptions {
  std::uint64_t seed = 42;
  std::optional<double> tol;
  std::optional<int> starts;
  std::vector<holonomic::GridAxis> grid;   // replaces lambda_grid / mu_box / ODE grid
  std::optional<Vector> anchor;
  std::vector<Vector> mu;                  // replaces options.mu
  std::optional<holonomic::GridAxis> range;
};

enum class DualCommand { psi, ec, theta, wolfe };
DualCommand dual_command_from_name(std::string_view s);  // throws InputError

/// Applies command-line overrides to the file options.
ProblemFile with_overrides(ProblemFile pf, const RunOptions& ro);

nlohmann::json number(double v);
nlohmann::json numbers(const Vector& v);

nlohmann::json run_solve(const ProblemFile& pf, const RunOptions& ro = {});
nlohmann::json run_dual(const ProblemFile& pf, DualCommand kind, const RunOptions& ro = {});
nlohmann::json run_sweep(const ProblemFile& pf, const std::string& param, const RunOptions& ro = {});
nlohmann::json run_frobenius(const ProblemFile& pf, const RunOptions& ro = {});

/// CSV rendering of dual samples or sweep rows; throws InputError for other reports.
std::string to_csv(const nlohmann::json& report);

/// Report serialization used by the command-line tool (2-space indent, trailing newline).
std::string dump(const nlohmann::json& report);

}  // namespace pfaffopt::io
