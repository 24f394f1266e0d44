#pragma once

// JSON problem files: loading, validation and the solver options they carry.
// The published schema is docs/problem.schema.json; the validator here enforces
// the same rules and reports the JSON pointer of the first violation.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pfaffopt/holonomic.hpp"
#include "pfaffopt/program.hpp"

namespace pfaffopt::io {

using numerics::Vector;

struct FamilySpec {
  std::string parameter = "t";
  std::vector<std::string> x;
  std::vector<std::string> lambda;
  std::vector<std::size_t> free;
  double from = 0.0, to = 1.0;
  int count = 41;
};

struct IntegralSpec {
  std::vector<std::string> g;
  Vector point;
};

struct ConsumerSpec {
  Vector alpha;
  std::vector<std::vector<std::string>> price_sets;
  double mu = 1.0;
};

struct SweepSpec {
  double from = 0.0, to = 1.0;
  int count = 11;
};

struct Options {
  double tol = 1e-10;
  int starts = 32;
  double box_lower = -10.0, box_upper = 10.0;
  std::vector<Vector> mu;                      // multiplier vectors for Pfaff solves
  std::vector<holonomic::GridAxis> lambda_grid;
  std::vector<holonomic::GridAxis> mu_box;     // Wolfe box for Pfaff programs
  std::optional<Vector> anchor;
  std::optional<Vector> anchor_x;
  std::vector<double> grid;                    // ODE-built dual grid (multipliers or ray parameters)
  std::optional<SweepSpec> sweep;
  std::optional<FamilySpec> family;
  std::optional<IntegralSpec> integral;
  std::optional<ConsumerSpec> consumer;
  int frobenius_samples = 100;
};

struct ProblemFile {
  std::string name;
  std::string description;
  Program program;
  Options options;
  nlohmann::json expect = nlohmann::json::array();
  std::filesystem::path path;
};

/// Throws InputError (ParseError for expressions) naming the offending JSON pointer.
ProblemFile parse_problem(const nlohmann::json& doc);
ProblemFile load_problem(const std::filesystem::path& path);

StartSpec start_spec(const Options& o, std::uint64_t seed);

/// "a:b:n" or "a:b:n:log"
holonomic::GridAxis parse_axis(const std::string& text);
/// "1,2,3"
Vector parse_vector(const std::string& text);

}  // namespace pfaffopt::io
