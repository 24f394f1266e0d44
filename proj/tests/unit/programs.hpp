#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "pfaffopt/program.hpp"

namespace testing_programs {

using Row = std::tuple<std::string, std::string, double>;

inline pfaffopt::Program make(std::vector<std::string> vars, const std::string& f, pfaffopt::Sense sense,
                              const std::vector<Row>& rows,
                              std::vector<std::optional<pfaffopt::Bounds>> bounds = {}) {
  pfaffopt::Program p;
  p.space = pfaffopt::VarSpace(std::move(vars), std::move(bounds));
  p.objective = pfaffopt::parse(f, p.space);
  p.sense = sense;
  for (const auto& [g, rel, c] : rows)
    p.holonomic.push_back({pfaffopt::parse(g, p.space), pfaffopt::relation_from_name(rel), c});
  return p;
}

inline pfaffopt::Program with_pfaff(pfaffopt::Program p, const std::vector<std::string>& coeffs,
                                    const std::string& rel = "=") {
  pfaffopt::PfaffForm w;
  for (const auto& c : coeffs) w.coefficients.push_back(pfaffopt::parse(c, p.space));
  w.relation = pfaffopt::relation_from_name(rel);
  p.pfaff.push_back(std::move(w));
  return p;
}

}  // namespace testing_programs
