#include "pfaffopt/commands.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "pfaffopt/errors.hpp"
#include "pfaffopt/nonholonomic.hpp"

namespace pfaffopt::io {

using nlohmann::json;

namespace {

json signature_json(const numerics::Signature& s) {
  return {{"plus", s.n_plus}, {"minus", s.n_minus}, {"zero", s.n_zero}};
}

json solution_json(const holonomic::LagrangeSolution& s) {
  json active = json::array();
  for (bool a : s.active) active.push_back(a);
  return {{"x", numbers(s.x)},
          {"lambda", numbers(s.lambda)},
          {"objective", number(s.objective)},
          {"lagrangian", number(s.lagrangian)},
          {"classification", std::string(classification_name(s.classification))},
          {"signature", signature_json(s.signature)},
          {"residual", number(s.residual)},
          {"complementarity", number(s.complementarity)},
          {"infeasibility", number(s.infeasibility)},
          {"sign_feasible", s.sign_feasible},
          {"active", active}};
}

json ncp_json(const Program& p, const nonholonomic::NcpPoint& pt) {
  json j = {{"x", numbers(pt.x)},
            {"mu", numbers(pt.mu)},
            {"objective", number(pt.objective)},
            {"classification", std::string(classification_name(pt.classification))},
            {"signature", signature_json(pt.signature)},
            {"residual", number(pt.residual)},
            {"sign_feasible", pt.sign_feasible},
            {"riemann", nullptr}};
  if (!pt.note.empty()) j["note"] = pt.note;
  if (p.pfaff.size() == 1) {
    try {
      const auto r = nonholonomic::riemann_attach(p, pt);
      j["riemann"] = {{"identity_residual", number(r.identity_residual)},
                      {"eta_dot_xprime", number(r.eta_dot_xprime)},
                      {"identity_ok", r.identity_ok},
                      {"obtuse", r.obtuse},
                      {"xprime", numbers(r.xprime)}};
    } catch (const SolverError&) {
    }
  }
  return j;
}

json sample_json(const holonomic::DualSample& s) {
  return {{"multipliers", numbers(s.multipliers)},
          {"value", number(s.value)},
          {"flag", std::string(holonomic::dual_flag_name(s.flag))},
          {"certified_bound", number(s.certified_bound)},
          {"x", numbers(s.x)},
          {"extra", numbers(s.extra)}};
}

json dual_json(const holonomic::DualFunction& d) {
  json samples = json::array();
  for (const auto& s : d.samples) samples.push_back(sample_json(s));
  json opt = {{"found", d.optimum.found}};
  if (d.optimum.found) {
    opt["argument"] = numbers(d.optimum.argument);
    opt["value"] = number(d.optimum.value);
    opt["attained"] = d.optimum.attained;
    opt["kind"] = d.optimum.kind;
    opt["x"] = numbers(d.optimum.x);
  }
  return {{"columns", d.columns}, {"samples", samples}, {"optimum", opt}};
}

const Program& holonomic_program(const ProblemFile& pf, const char* what) {
  if (!pf.program.pfaff.empty() || pf.program.holonomic.empty())
    throw InputError(std::string(what) + " needs a problem with holonomic constraints");
  return pf.program;
}

const Program& pfaff_program(const ProblemFile& pf, const char* what) {
  if (pf.program.pfaff.empty()) throw InputError(std::string(what) + " needs a problem with Pfaff constraints");
  return pf.program;
}

json header(const ProblemFile& pf, const char* command, std::uint64_t seed) {
  return {{"command", command},
          {"problem", pf.name},
          {"sense", std::string(sense_name(pf.program.sense))},
          {"variables", pf.program.space.names()},
          {"seed", seed}};
}

Vector anchor_point(const ProblemFile& pf, const StartSpec& st) {
  if (pf.options.anchor_x) return *pf.options.anchor_x;
  const auto& p = pf.program;
  if (!p.pfaff.empty()) {
    const auto r = nonholonomic::ncp_solve(p, *pf.options.anchor, st);
    if (r.points.empty()) throw SolverError("no critical point at the anchor: " + r.diagnostic);
    return r.points.front().x;
  }
  const auto roots = holonomic::solve_inner(p, *pf.options.anchor, st);
  if (roots.roots.empty()) throw SolverError("no inner critical point at the anchor: " + roots.diagnostic);
  return roots.roots.front().x;
}

}  // namespace

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  const double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;
}

json numbers(const Vector& v) {
  json out = json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

DualCommand dual_command_from_name(std::string_view s) {
  if (s == "psi") return DualCommand::psi;
  if (s == "ec") return DualCommand::ec;
  if (s == "theta") return DualCommand::theta;
  if (s == "wolfe") return DualCommand::wolfe;
  throw InputError("unknown dual kind '" + std::string(s) + "' (psi, ec, theta, wolfe)");
}

ProblemFile with_overrides(ProblemFile pf, const RunOptions& ro) {
  Options& o = pf.options;
  if (ro.tol) {
    if (!(*ro.tol > 0)) throw InputError("--tol must be positive");
    o.tol = *ro.tol;
  }
  if (ro.starts) {
    if (*ro.starts < 1) throw InputError("--starts must be positive");
    o.starts = *ro.starts;
  }
  if (!ro.grid.empty()) {
    o.lambda_grid = ro.grid;
    o.mu_box = ro.grid;
    o.grid = holonomic::axis_values(ro.grid.front());
  }
  if (ro.anchor) o.anchor = ro.anchor;
  if (!ro.mu.empty()) {
    o.mu = ro.mu;
    const std::size_t q = pf.program.pfaff.size();
    for (const auto& m : o.mu)
      if (q && m.size() != q) throw InputError("--mu needs " + std::to_string(q) + " comma-separated values");
  }
  if (ro.range) o.sweep = SweepSpec{ro.range->from, ro.range->to, ro.range->count};
  return pf;
}

json run_solve(const ProblemFile& file, const RunOptions& ro) {
  const ProblemFile pf = with_overrides(file, ro);
  const Program& p = pf.program;
  const StartSpec st = start_spec(pf.options, ro.seed);
  json out = header(pf, "solve", ro.seed);
  if (p.pfaff.empty()) {
    out["type"] = "holonomic";
    const auto primal = holonomic::solve_primal(p, st);
    json kkt = json::array();
    for (const auto& s : primal.kkt) kkt.push_back(solution_json(s));
    out["kkt"] = kkt;
    out["optimum"] = primal.optimum ? solution_json(*primal.optimum) : json(nullptr);
    out["primal_value"] = primal.value_found ? number(primal.value) : json(nullptr);
    out["attained"] = primal.attained;
    out["feasible_samples"] = primal.feasible_samples.size();
    if (primal.optimum && !p.holonomic.empty()) {
      json sens = json::array();
      try {
        for (const auto& e : holonomic::multiplier_sensitivity(p, *primal.optimum))
          sens.push_back({{"slope", number(e.slope)}, {"expected", number(e.expected)}, {"error", number(e.error)},
                          {"ok", e.ok}});
      } catch (const Error& e) {
        sens = {{"error", e.what()}};
      }
      out["sensitivity"] = sens;
      try {
        const auto jac = holonomic::multiplier_jacobian(p, *primal.optimum);
        out["multiplier_jacobian"] = {{"determinant", number(jac.determinant)}, {"degenerate", jac.degenerate}};
      } catch (const Error& e) {
        out["multiplier_jacobian"] = {{"error", e.what()}};
      }
    }
    if (pf.options.family) {
      const FamilySpec& f = *pf.options.family;
      holonomic::FamilyDual fam;
      fam.parameter = VarSpace({f.parameter});
      for (const auto& e : f.x) fam.x.push_back(parse(e, fam.parameter));
      for (const auto& e : f.lambda) fam.lambda.push_back(parse(e, fam.parameter));
      fam.free = f.free;
      const auto rep = holonomic::family_dual(p, fam, f.from, f.to, f.count);
      out["family"] = {{"max_stationarity", number(rep.max_stationarity)},
                       {"max_free_dependence", number(rep.max_free_dependence)},
                       {"critical_parameters", numbers(rep.critical_parameters)},
                       {"critical_values", numbers(rep.critical_values)}};
    }
    return out;
  }

  out["type"] = "pfaff";
  if (pf.options.mu.empty() && !pf.options.consumer && !pf.options.integral)
    throw InputError("solving a Pfaff program needs multipliers (options.mu or --mu)");
  json sols = json::array();
  for (const auto& mu : pf.options.mu) {
    nonholonomic::NcpSolveResult r;
    {
      numerics::NewtonOptions nopt;
      nopt.tol = pf.options.tol;
      r = nonholonomic::ncp_solve(p, mu, st, nopt);
    }
    json pts = json::array();
    for (const auto& pt : r.points) pts.push_back(ncp_json(p, pt));
    json s = {{"mu", numbers(mu)}, {"points", pts}};
    if (!r.diagnostic.empty()) s["diagnostic"] = r.diagnostic;
    sols.push_back(s);
  }
  out["solutions"] = sols;
  if (pf.options.integral) {
    std::vector<Expr> g;
    for (const auto& e : pf.options.integral->g) g.push_back(parse(e, p.space));
    const auto ic = nonholonomic::integral_constraint_check(p, g, pf.options.integral->point, 1e-8);
    out["integral"] = {{"point", numbers(pf.options.integral->point)},
                       {"distribution_residual", number(ic.distribution_residual)},
                       {"lagrange_residual", number(ic.lagrange_residual)},
                       {"constraint_residual", number(ic.constraint_residual)},
                       {"lambda", numbers(ic.lambda)},
                       {"probes", ic.probes},
                       {"ok", ic.ok}};
  }
  if (pf.options.consumer) {
    json rows = json::array();
    for (const auto& prices : pf.options.consumer->price_sets) {
      std::vector<Expr> pe;
      for (const auto& e : prices) pe.push_back(parse(e, p.space));
      const auto c = nonholonomic::consumer_demo(pf.options.consumer->alpha, pe, p.space, pf.options.consumer->mu);
      rows.push_back({{"prices", prices},
                      {"x", numbers(c.x)},
                      {"proportions", numbers(c.proportions)},
                      {"expected", numbers(c.expected)},
                      {"max_error", number(c.max_error)},
                      {"ok", c.ok}});
    }
    out["consumer"] = rows;
  }
  return out;
}

json run_dual(const ProblemFile& file, DualCommand kind, const RunOptions& ro) {
  const ProblemFile pf = with_overrides(file, ro);
  const Program& p = pf.program;
  const StartSpec st = start_spec(pf.options, ro.seed);
  json out = header(pf, "dual", ro.seed);
  switch (kind) {
    case DualCommand::psi: {
      out["kind"] = "psi";
      holonomic_program(pf, "the Lagrange dual");
      if (pf.options.lambda_grid.size() != p.holonomic.size())
        throw InputError("the Lagrange dual needs one grid axis per constraint (options.lambda_grid or --grid)");
      const auto psi = holonomic::lagrange_dual(p, pf.options.lambda_grid, st);
      out.update(dual_json(psi));
      const auto primal = holonomic::solve_primal(p, st);
      const auto wd = holonomic::weak_duality_check(p, primal, psi);
      out["weak_duality"] = {{"conclusive", wd.conclusive},
                             {"holds", wd.holds},
                             {"pairs_checked", wd.pairs_checked},
                             {"max_violation", number(wd.max_violation)},
                             {"dual_sup", wd.dual_sup_found ? number(wd.dual_sup) : json(nullptr)},
                             {"primal_value", wd.primal_found ? number(wd.primal_value) : json(nullptr)},
                             {"gap", wd.dual_sup_found && wd.primal_found ? number(wd.gap) : json(nullptr)},
                             {"slater_witnessed", wd.slater_witnessed},
                             {"note", wd.note}};
      return out;
    }
    case DualCommand::ec: {
      out["kind"] = "ec";
      holonomic_program(pf, "the ODE-built dual");
      if (!pf.options.anchor) throw InputError("the ODE-built dual needs an anchor (options.anchor or --anchor)");
      if (pf.options.grid.empty()) throw InputError("the ODE-built dual needs a grid (options.grid or --grid)");
      const auto phi = holonomic::ec_build_dual(p, *pf.options.anchor, anchor_point(pf, st), pf.options.grid);
      out.update(dual_json(phi));
      const auto chk = holonomic::ec_check_derivative(p, phi);
      out["derivative_check"] = {{"max_error", number(chk.max_error)}, {"ok", chk.ok}};
      return out;
    }
    case DualCommand::theta: {
      out["kind"] = "theta";
      pfaff_program(pf, "the dual theta");
      if (!pf.options.anchor) throw InputError("the dual theta needs an anchor (options.anchor or --anchor)");
      if (pf.options.grid.empty()) throw InputError("the dual theta needs a grid (options.grid or --grid)");
      const auto theta = nonholonomic::theta_dual(p, *pf.options.anchor, anchor_point(pf, st), pf.options.grid);
      out.update(dual_json(theta));
      out["anchor_slope"] = number(nonholonomic::theta_anchor_slope(theta));
      return out;
    }
    case DualCommand::wolfe: {
      out["kind"] = "wolfe";
      if (p.pfaff.empty()) {
        const auto w = holonomic::wolfe_dual(holonomic_program(pf, "the Wolfe dual"), st);
        out["found"] = w.found;
        out["x"] = numbers(w.x);
        out["lambda"] = numbers(w.lambda);
        out["value"] = number(w.value);
        out["stationarity"] = number(w.stationarity);
        out["complementarity"] = number(w.complementarity);
        out["unique"] = w.unique;
        out["candidates"] = w.candidates;
        return out;
      }
      if (pf.options.mu_box.size() != p.pfaff.size())
        throw InputError("the Wolfe dual of a Pfaff program needs one box axis per form (options.mu_box or --grid)");
      const auto w = nonholonomic::wolfe_nonholonomic(p, pf.options.mu_box, st, pf.options.tol);
      json samples = json::array();
      for (const auto& s : w.samples)
        samples.push_back({{"mu", numbers(s.mu)}, {"value", s.ok ? number(s.value) : json(nullptr)}, {"x", numbers(s.x)}});
      json argmin = json::array();
      for (std::size_t k = 0; k < w.argmin.size(); ++k)
        argmin.push_back({{"mu", numbers(w.argmin[k])}, {"interior", bool(w.argmin_interior[k])}});
      json argmax = json::array();
      for (const auto& m : w.argmax) argmax.push_back(numbers(m));
      out["found"] = w.found;
      out["samples"] = samples;
      out["min_value"] = number(w.min_value);
      out["max_value"] = number(w.max_value);
      out["argmin"] = argmin;
      out["argmax"] = argmax;
      return out;
    }
  }
  return out;
}

json run_sweep(const ProblemFile& file, const std::string& param, const RunOptions& ro) {
  const ProblemFile pf = with_overrides(file, ro);
  const Program& p = pf.program;
  const StartSpec st = start_spec(pf.options, ro.seed);
  if (!pf.options.sweep) throw InputError("sweep needs a range (options.sweep or --range)");
  const SweepSpec& s = *pf.options.sweep;
  if (s.count < 1) throw InputError("empty sweep range");
  json out = header(pf, "sweep", ro.seed);
  out["param"] = param;
  json rows = json::array();
  if (param == "mu") {
    pfaff_program(pf, "a multiplier sweep");
    if (p.pfaff.size() != 1) throw InputError("a multiplier sweep needs exactly one Pfaff form");
    const auto curve = nonholonomic::critical_curve(p, s.from, s.to, s.count, st);
    for (const auto& cp : curve.points)
      rows.push_back({{"param", number(cp.mu[0])},
                      {"x", numbers(cp.point.x)},
                      {"objective", number(cp.point.objective)},
                      {"classification", std::string(classification_name(cp.point.classification))},
                      {"det_a", number(cp.det_a)}});
    out["fold"] = curve.fold;
    out["fold_at"] = curve.fold_mu ? number((*curve.fold_mu)[0]) : json(nullptr);
    if (!curve.note.empty()) out["note"] = curve.note;
  } else if (param == "lambda") {
    holonomic_program(pf, "a lambda sweep");
    if (p.holonomic.size() != 1) throw InputError("a lambda sweep needs exactly one constraint");
    for (double l : holonomic::axis_values({s.from, s.to, s.count, false})) {
      const auto smp = holonomic::evaluate_psi(p, {l}, st);
      rows.push_back({{"param", number(l)},
                      {"x", numbers(smp.x)},
                      {"objective", number(smp.value)},
                      {"classification", std::string(holonomic::dual_flag_name(smp.flag))},
                      {"det_a", nullptr}});
    }
    out["fold"] = false;
    out["fold_at"] = nullptr;
  } else {
    throw InputError("--param must be 'mu' or 'lambda'");
  }
  out["rows"] = rows;
  return out;
}

json run_frobenius(const ProblemFile& file, const RunOptions& ro) {
  const ProblemFile pf = with_overrides(file, ro);
  const Program& p = pfaff_program(pf, "the Frobenius test");
  StartSpec st = start_spec(pf.options, ro.seed);
  st.count = pf.options.frobenius_samples;
  json out = header(pf, "frobenius", ro.seed);
  json forms = json::array();
  for (std::size_t i = 0; i < p.pfaff.size(); ++i) {
    const auto r = nonholonomic::frobenius_test(p.pfaff[i], p.space, st);
    forms.push_back({{"index", i},
                     {"integrable", r.integrable},
                     {"max_component", number(r.max_component)},
                     {"samples", r.samples},
                     {"non_integrable_samples", r.non_integrable_samples},
                     {"witness", r.witness ? numbers(*r.witness) : json(nullptr)}});
  }
  out["forms"] = forms;
  return out;
}

namespace {

std::string cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

std::string to_csv(const json& r) {
  std::ostringstream os;
  const std::string cmd = r.value("command", "");
  if (cmd == "sweep") {
    const auto& vars = r["variables"];
    os << r["param"].get<std::string>();
    for (const auto& v : vars) os << ',' << v.get<std::string>();
    os << ",objective,classification,det_a\n";
    for (const auto& row : r["rows"]) {
      os << cell(row["param"]);
      for (std::size_t i = 0; i < vars.size(); ++i) os << ',' << (i < row["x"].size() ? cell(row["x"][i]) : "");
      os << ',' << cell(row["objective"]) << ',' << cell(row["classification"]) << ',' << cell(row["det_a"]) << '\n';
    }
    return os.str();
  }
  if (cmd == "dual" && r.contains("samples") && r["kind"] != "wolfe") {
    const auto& samples = r["samples"];
    const std::size_t m = samples.empty() ? 0 : samples[0]["multipliers"].size();
    for (std::size_t a = 0; a < m; ++a) os << (a ? "," : "") << "multiplier" << a + 1;
    os << (m ? "," : "") << "value,flag,certified_bound";
    for (const auto& c : r["columns"]) os << ',' << c.get<std::string>();
    os << '\n';
    for (const auto& s : samples) {
      for (std::size_t a = 0; a < m; ++a) os << (a ? "," : "") << cell(s["multipliers"][a]);
      os << (m ? "," : "") << cell(s["value"]) << ',' << cell(s["flag"]) << ',' << cell(s["certified_bound"]);
      for (const auto& e : s["extra"]) os << ',' << cell(e);
      os << '\n';
    }
    return os.str();
  }
  if (cmd == "dual" && !r.contains("samples")) {
    const auto& vars = r["variables"];
    for (const auto& v : vars) os << v.get<std::string>() << ',';
    for (std::size_t a = 0; a < r["lambda"].size(); ++a) os << "lambda" << a + 1 << ',';
    os << "value\n";
    for (const auto& v : r["x"]) os << cell(v) << ',';
    for (const auto& v : r["lambda"]) os << cell(v) << ',';
    os << cell(r["value"]) << '\n';
    return os.str();
  }
  if (cmd == "dual") {
    os << "mu1";
    const std::size_t q = r["samples"].empty() ? 1 : r["samples"][0]["mu"].size();
    for (std::size_t k = 1; k < q; ++k) os << ",mu" << k + 1;
    os << ",value\n";
    for (const auto& s : r["samples"]) {
      for (std::size_t k = 0; k < q; ++k) os << (k ? "," : "") << cell(s["mu"][k]);
      os << ',' << cell(s["value"]) << '\n';
    }
    return os.str();
  }
  throw InputError("CSV output is available for 'dual' and 'sweep' reports");
}

std::string dump(const json& report) { return report.dump(2) + "\n"; }

}  // namespace pfaffopt::io
