#include "pfaffopt/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

#include "pfaffopt/errors.hpp"

#ifndef PFAFFOPT_CORPUS_DEFAULT
#define PFAFFOPT_CORPUS_DEFAULT "corpus"
#endif

namespace pfaffopt::verify {

using nlohmann::json;
using numerics::Vector;

std::string_view status_name(Status s) {
  switch (s) {
    case Status::pass: return "PASS";
    case Status::fail: return "FAIL";
    case Status::skip: return "SKIP";
  }
  return "?";
}

double tolerance_of(const std::string& name) {
  static const std::map<std::string, double> table{
      {"exact", 1e-10},  // closed-form values from Newton solves
      {"kkt", 1e-8},     // KKT / Wolfe points, duality gaps of convex programs
      {"ode", 1e-6},     // RK4-integrated duals and their derivatives
      {"fd", 1e-4},      // finite-difference sensitivities
      {"sample", 1e-3},  // sampled suprema and restored feasible points
  };
  const auto it = table.find(name);
  if (it == table.end()) throw InputError("unknown tolerance class '" + name + "'");
  return it->second;
}

const std::vector<ManifestEntry>& manifest() {
  static const std::vector<ManifestEntry> m{
      {"sec14_4", {1}},    {"sec14_1", {2}},    {"sec14_2", {3}},           {"sec14_3", {4}},
      {"sec14_5", {5}},    {"sec14_6", {6}},    {"sec16", {7}},             {"sec341_ex1", {8}},
      {"sec341_ex2", {9}}, {"sec37_2", {10}},   {"sec37_1", {11}},          {"sec421", {12}},
      {"frobenius_contact", {13}},              {"frobenius_exact", {13}},
  };
  return m;
}

namespace {

std::string brief(const json& j) {
  std::string s = j.dump();
  if (s.size() > 160) s = s.substr(0, 157) + "...";
  return s;
}

void select(const json& node, const std::vector<std::string>& parts, std::size_t k, std::vector<json>& out) {
  if (k == parts.size()) {
    out.push_back(node);
    return;
  }
  const std::string& key = parts[k];
  if (key == "*") {
    if (!node.is_array()) throw InputError("'*' applied to a non-array");
    for (const auto& e : node) select(e, parts, k + 1, out);
    return;
  }
  if (node.is_array()) {
    std::size_t used = 0;
    const unsigned long idx = std::stoul(key, &used);
    if (used != key.size() || idx >= node.size()) throw InputError("index '" + key + "' out of range");
    select(node[idx], parts, k + 1, out);
    return;
  }
  if (!node.is_object() || !node.contains(key)) throw InputError("no member '" + key + "'");
  select(node[key], parts, k + 1, out);
}

std::vector<json> select(const json& report, const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string part; std::getline(ss, part, '/');)
    if (!part.empty()) parts.push_back(part);
  std::vector<json> out;
  select(report, parts, 0, out);
  return out;
}

double as_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
  }
  throw InputError("not a number: " + brief(j));
}

bool near(const json& actual, const json& expected, double tol) {
  if (expected.is_number()) {
    if (!(actual.is_number() || actual.is_string())) return false;
    double a;
    try {
      a = as_number(actual);
    } catch (const InputError&) {
      return false;
    }
    return std::fabs(a - expected.get<double>()) <= tol;
  }
  if (expected.is_array()) {
    if (!actual.is_array() || actual.size() != expected.size()) return false;
    for (std::size_t i = 0; i < expected.size(); ++i)
      if (!near(actual[i], expected[i], tol)) return false;
    return true;
  }
  return actual == expected;
}

json run_report(const io::ProblemFile& pf, const json& run, std::uint64_t seed) {
  const std::string cmd = run.value("command", "");
  io::RunOptions ro;
  ro.seed = seed;
  if (run.contains("mu")) {
    for (const auto& m : run["mu"]) ro.mu.push_back(m.is_array() ? m.get<Vector>() : Vector{m.get<double>()});
  }
  if (cmd == "solve") return io::run_solve(pf, ro);
  if (cmd == "dual") return io::run_dual(pf, io::dual_command_from_name(run.value("kind", "")), ro);
  if (cmd == "sweep") return io::run_sweep(pf, run.value("param", "mu"), ro);
  if (cmd == "frobenius") return io::run_frobenius(pf, ro);
  throw InputError("unknown command '" + cmd + "' in expectation");
}

std::string error_class(const std::exception& e) {
  if (dynamic_cast<const SingularPathError*>(&e)) return "singular_path";
  if (dynamic_cast<const InputError*>(&e) || dynamic_cast<const ExprError*>(&e)) return "input";
  if (dynamic_cast<const SolverError*>(&e)) return "solver";
  return "other";
}

Outcome check_one(const io::ProblemFile& pf, const json& e, std::size_t index,
                  std::map<std::string, std::pair<json, std::string>>& cache, std::uint64_t seed) {
  Outcome o;
  o.source = pf.name;
  o.criterion = e.value("criterion", 0);
  o.label = e.value("label", "expect[" + std::to_string(index) + "]");
  o.status = Status::fail;
  try {
    if (!e.contains("run") || !e["run"].is_object()) throw InputError("expectation needs a 'run' object");
    const std::string key = e["run"].dump();
    if (!cache.count(key)) {
      try {
        cache[key] = {run_report(pf, e["run"], seed), ""};
      } catch (const Error& err) {
        cache[key] = {json(nullptr), error_class(err) + ": " + err.what()};
      }
    }
    const auto& [report, error] = cache[key];
    if (e.contains("error")) {
      o.expected = "error " + e["error"].get<std::string>();
      o.actual = error.empty() ? "no error" : error;
      o.status = error.rfind(e["error"].get<std::string>() + ":", 0) == 0 ? Status::pass : Status::fail;
      return o;
    }
    if (!error.empty()) {
      o.actual = error;
      return o;
    }
    const std::string check = e.value("check", "near");
    o.tolerance = tolerance_of(e.value("tol", "exact"));
    const json& value = e.at("value");
    o.expected = brief(value);
    const auto sel = select(report, e.at("path").get<std::string>());
    o.actual = brief(sel.size() == 1 ? sel[0] : json(sel));
    bool ok = false;
    if (check == "near") {
      if (e.value("each", false)) {
        ok = !sel.empty() && std::all_of(sel.begin(), sel.end(), [&](const json& a) { return near(a, value, o.tolerance); });
        if (!ok)
          for (const auto& a : sel)
            if (!near(a, value, o.tolerance)) {
              o.detail = "first mismatch " + brief(a);
              break;
            }
      } else if (sel.size() == 1) {
        ok = near(sel[0], value, o.tolerance);
      } else {
        ok = near(json(sel), value, o.tolerance);
      }
    } else if (check == "contains") {
      ok = std::any_of(sel.begin(), sel.end(), [&](const json& a) { return near(a, value, o.tolerance); });
    } else if (check == "count") {
      ok = double(sel.size()) == value.get<double>();
      o.actual = std::to_string(sel.size());
    } else if (check == "expr") {
      const Expr ex = parse(e.at("expr").get<std::string>(), pf.program.space);
      json vals = json::array();
      ok = !sel.empty();
      for (const auto& a : sel) {
        Vector x;
        for (const auto& v : a) x.push_back(as_number(v));
        const double r = ex.eval(x);
        vals.push_back(io::number(r));
        ok = ok && std::fabs(r - value.get<double>()) <= o.tolerance;
      }
      o.actual = brief(vals.size() == 1 ? vals[0] : vals);
    } else {
      throw InputError("unknown check '" + check + "'");
    }
    o.status = ok ? Status::pass : Status::fail;
  } catch (const std::exception& err) {
    o.status = Status::fail;
    o.detail = std::string("malformed expectation: ") + err.what();
  }
  return o;
}

}  // namespace

std::vector<Outcome> check_file(const io::ProblemFile& pf, std::uint64_t seed) {
  std::vector<Outcome> out;
  std::map<std::string, std::pair<json, std::string>> cache;
  for (std::size_t i = 0; i < pf.expect.size(); ++i) out.push_back(check_one(pf, pf.expect[i], i, cache, seed));
  return out;
}

std::vector<Outcome> check_corpus(const std::filesystem::path& dir, std::uint64_t seed) {
  std::vector<Outcome> out;
  std::set<std::string> seen;
  for (const auto& m : manifest()) {
    const auto path = dir / (m.file + ".json");
    seen.insert(m.file + ".json");
    if (!std::filesystem::exists(path)) {
      for (int c : m.criteria) out.push_back({c, m.file, "corpus file", Status::skip, "", "", 0.0, "missing " + path.string()});
      continue;
    }
    try {
      const auto pf = io::load_problem(path);
      auto r = check_file(pf, seed);
      if (r.empty())
        for (int c : m.criteria) out.push_back({c, m.file, "expectations", Status::fail, "", "", 0.0, "file has no expectations"});
      out.insert(out.end(), r.begin(), r.end());
    } catch (const Error& e) {
      for (int c : m.criteria) out.push_back({c, m.file, "load", Status::fail, "", "", 0.0, e.what()});
    }
  }
  if (std::filesystem::is_directory(dir)) {
    std::vector<std::filesystem::path> extra;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
      if (entry.path().extension() == ".json" && !seen.count(entry.path().filename().string()))
        extra.push_back(entry.path());
    std::sort(extra.begin(), extra.end());
    for (const auto& path : extra) {
      try {
        const auto pf = io::load_problem(path);
        auto r = check_file(pf, seed);
        out.insert(out.end(), r.begin(), r.end());
      } catch (const Error& e) {
        out.push_back({0, path.filename().string(), "load", Status::fail, "", "", 0.0, e.what()});
      }
    }
  }
  return out;
}

json report_json(const std::vector<Outcome>& outcomes) {
  std::map<int, Status> per;
  bool failed = false;
  json checks = json::array();
  for (const auto& o : outcomes) {
    auto& s = per.try_emplace(o.criterion, Status::pass).first->second;
    if (o.status == Status::fail) s = Status::fail;
    else if (o.status == Status::skip && s == Status::pass) s = Status::skip;
    failed = failed || o.status == Status::fail;
    checks.push_back({{"criterion", o.criterion}, {"source", o.source}, {"label", o.label},
                      {"status", std::string(status_name(o.status))}, {"expected", o.expected}, {"actual", o.actual},
                      {"tolerance", io::number(o.tolerance)}, {"detail", o.detail}});
  }
  json summary = json::object();
  for (const auto& [c, s] : per) summary[std::to_string(c)] = std::string(status_name(s));
  return {{"command", "verify"}, {"checks", checks}, {"criteria", summary}, {"passed", !failed}};
}

std::vector<io::ProblemFile> load_corpus(const std::filesystem::path& dir) {
  std::vector<io::ProblemFile> out;
  if (!std::filesystem::is_directory(dir)) return out;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      out.push_back(io::load_problem(f));
    } catch (const Error&) {
    }
  }
  return out;
}

std::filesystem::path default_corpus_dir() {
  if (const char* env = std::getenv("PFAFFOPT_CORPUS_DIR"); env && *env) return env;
  return PFAFFOPT_CORPUS_DEFAULT;
}

}  // namespace pfaffopt::verify
