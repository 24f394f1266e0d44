#include "pfaffopt/problem_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pfaffopt/errors.hpp"

namespace pfaffopt::io {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw InputError(where + ": " + what);
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : keys) ok = ok || it.key() == k;
    if (!ok) fail(where + "/" + it.key(), "unknown property");
  }
}

const json& object(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  return j;
}

const json& array(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  return j;
}

std::string string_at(const json& obj, const char* key, const std::string& where, bool required = true,
                      const std::string& fallback = "") {
  if (!obj.contains(key)) {
    if (required) fail(where, std::string("missing required property '") + key + "'");
    return fallback;
  }
  if (!obj[key].is_string()) fail(where + "/" + key, "expected a string");
  return obj[key].get<std::string>();
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "expected a finite number");
  return v;
}

double number_at(const json& obj, const char* key, const std::string& where, double fallback) {
  return obj.contains(key) ? number(obj[key], where + "/" + key) : fallback;
}

int integer_at(const json& obj, const char* key, const std::string& where, int fallback, int min) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj[key];
  if (!v.is_number_integer()) fail(where + "/" + key, "expected an integer");
  const int n = v.get<int>();
  if (n < min) fail(where + "/" + key, "must be at least " + std::to_string(min));
  return n;
}

Vector numbers(const json& j, const std::string& where) {
  array(j, where);
  Vector out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "/" + std::to_string(i)));
  return out;
}

std::vector<std::string> strings(const json& j, const std::string& where) {
  array(j, where);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_string()) fail(where + "/" + std::to_string(i), "expected a string");
    out.push_back(j[i].get<std::string>());
  }
  return out;
}

Expr expression(const std::string& text, const VarSpace& space, const std::string& where) {
  try {
    return parse(text, space);
  } catch (const ParseError& e) {
    std::string base = e.what();
    const std::string suffix = " at offset " + std::to_string(e.offset());
    if (base.size() >= suffix.size() && base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0)
      base.resize(base.size() - suffix.size());
    throw ParseError(e.kind(), e.offset(), where + ": " + base);
  }
}

holonomic::GridAxis axis(const json& j, const std::string& where) {
  object(j, where);
  only_keys(j, where, {"from", "to", "count", "log"});
  holonomic::GridAxis a;
  if (!j.contains("from") || !j.contains("to")) fail(where, "axis needs 'from' and 'to'");
  a.from = number(j["from"], where + "/from");
  a.to = number(j["to"], where + "/to");
  a.count = integer_at(j, "count", where, 11, 1);
  if (j.contains("log")) {
    if (!j["log"].is_boolean()) fail(where + "/log", "expected a boolean");
    a.log_scale = j["log"].get<bool>();
  }
  if (a.log_scale && (a.from <= 0 || a.to <= 0)) fail(where, "log axis needs positive ends");
  return a;
}

std::vector<holonomic::GridAxis> axes(const json& j, const std::string& where) {
  array(j, where);
  std::vector<holonomic::GridAxis> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(axis(j[i], where + "/" + std::to_string(i)));
  return out;
}

VarSpace variables(const json& j, const std::string& where) {
  array(j, where);
  if (j.empty()) fail(where, "at least one variable is required");
  std::vector<std::string> names;
  std::vector<std::optional<Bounds>> bounds;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = where + "/" + std::to_string(i);
    std::string name;
    std::optional<Bounds> b;
    if (j[i].is_string()) {
      name = j[i].get<std::string>();
    } else {
      object(j[i], at);
      only_keys(j[i], at, {"name", "lower", "upper"});
      name = string_at(j[i], "name", at);
      if (j[i].contains("lower") != j[i].contains("upper")) fail(at, "give both 'lower' and 'upper' or neither");
      if (j[i].contains("lower")) {
        b = Bounds{number(j[i]["lower"], at + "/lower"), number(j[i]["upper"], at + "/upper")};
        if (!(b->lower < b->upper)) fail(at, "lower bound must be below upper bound");
      }
    }
    if (name.empty()) fail(at, "empty variable name");
    if (!seen.insert(name).second) fail(at, "duplicate variable '" + name + "'");
    names.push_back(name);
    bounds.push_back(b);
  }
  try {
    return VarSpace(names, bounds);
  } catch (const Error& e) {
    fail(where, e.what());
  }
}

Relation relation_at(const json& obj, const std::string& where) {
  const std::string r = string_at(obj, "relation", where, false, "=");
  try {
    return relation_from_name(r);
  } catch (const Error&) {
    fail(where + "/relation", "expected one of '=', '<=', '>='");
  }
}

Options options(const json& j, const std::string& where, const Program& p) {
  object(j, where);
  only_keys(j, where, {"tol", "starts", "box", "mu", "lambda_grid", "mu_box", "anchor", "anchor_x", "grid",
                       "sweep", "family", "integral", "consumer", "frobenius_samples"});
  Options o;
  o.tol = number_at(j, "tol", where, o.tol);
  if (!(o.tol > 0)) fail(where + "/tol", "must be positive");
  o.starts = integer_at(j, "starts", where, o.starts, 1);
  o.frobenius_samples = integer_at(j, "frobenius_samples", where, o.frobenius_samples, 1);
  if (j.contains("box")) {
    const Vector b = numbers(j["box"], where + "/box");
    if (b.size() != 2 || !(b[0] < b[1])) fail(where + "/box", "expected [lower, upper] with lower < upper");
    o.box_lower = b[0];
    o.box_upper = b[1];
  }
  const std::size_t q = p.pfaff.size();
  if (j.contains("mu")) {
    const json& m = array(j["mu"], where + "/mu");
    for (std::size_t i = 0; i < m.size(); ++i) {
      const std::string at = where + "/mu/" + std::to_string(i);
      Vector v = m[i].is_array() ? numbers(m[i], at) : Vector{number(m[i], at)};
      if (q && v.size() != q) fail(at, "expected " + std::to_string(q) + " multipliers");
      o.mu.push_back(v);
    }
  }
  if (j.contains("lambda_grid")) o.lambda_grid = axes(j["lambda_grid"], where + "/lambda_grid");
  if (j.contains("mu_box")) o.mu_box = axes(j["mu_box"], where + "/mu_box");
  if (j.contains("anchor")) o.anchor = numbers(j["anchor"], where + "/anchor");
  if (j.contains("anchor_x")) {
    o.anchor_x = numbers(j["anchor_x"], where + "/anchor_x");
    if (o.anchor_x->size() != p.dimension()) fail(where + "/anchor_x", "expected one entry per variable");
  }
  if (j.contains("grid")) o.grid = numbers(j["grid"], where + "/grid");
  if (j.contains("sweep")) {
    const std::string at = where + "/sweep";
    object(j["sweep"], at);
    only_keys(j["sweep"], at, {"from", "to", "count"});
    SweepSpec s;
    s.from = number_at(j["sweep"], "from", at, s.from);
    s.to = number_at(j["sweep"], "to", at, s.to);
    s.count = integer_at(j["sweep"], "count", at, s.count, 1);
    o.sweep = s;
  }
  if (j.contains("family")) {
    const std::string at = where + "/family";
    const json& f = object(j["family"], at);
    only_keys(f, at, {"parameter", "x", "lambda", "free", "from", "to", "count"});
    FamilySpec s;
    s.parameter = string_at(f, "parameter", at, false, s.parameter);
    if (!f.contains("x") || !f.contains("lambda")) fail(at, "family needs 'x' and 'lambda'");
    s.x = strings(f["x"], at + "/x");
    s.lambda = strings(f["lambda"], at + "/lambda");
    if (s.x.size() != p.dimension()) fail(at + "/x", "expected one expression per variable");
    if (s.lambda.size() != p.holonomic.size()) fail(at + "/lambda", "expected one expression per constraint");
    if (f.contains("free"))
      for (double v : numbers(f["free"], at + "/free")) {
        if (v < 0 || v >= double(p.dimension()) || v != std::floor(v)) fail(at + "/free", "expected variable indices");
        s.free.push_back(std::size_t(v));
      }
    s.from = number_at(f, "from", at, s.from);
    s.to = number_at(f, "to", at, s.to);
    s.count = integer_at(f, "count", at, s.count, 2);
    const VarSpace ps({s.parameter});
    for (std::size_t i = 0; i < s.x.size(); ++i) expression(s.x[i], ps, at + "/x/" + std::to_string(i));
    for (std::size_t i = 0; i < s.lambda.size(); ++i)
      expression(s.lambda[i], ps, at + "/lambda/" + std::to_string(i));
    o.family = s;
  }
  if (j.contains("integral")) {
    const std::string at = where + "/integral";
    const json& f = object(j["integral"], at);
    only_keys(f, at, {"g", "point"});
    IntegralSpec s;
    if (!f.contains("g") || !f.contains("point")) fail(at, "integral needs 'g' and 'point'");
    s.g = strings(f["g"], at + "/g");
    for (std::size_t i = 0; i < s.g.size(); ++i) expression(s.g[i], p.space, at + "/g/" + std::to_string(i));
    s.point = numbers(f["point"], at + "/point");
    if (s.point.size() != p.dimension()) fail(at + "/point", "expected one entry per variable");
    o.integral = s;
  }
  if (j.contains("consumer")) {
    const std::string at = where + "/consumer";
    const json& f = object(j["consumer"], at);
    only_keys(f, at, {"alpha", "price_sets", "mu"});
    ConsumerSpec s;
    if (!f.contains("alpha") || !f.contains("price_sets")) fail(at, "consumer needs 'alpha' and 'price_sets'");
    s.alpha = numbers(f["alpha"], at + "/alpha");
    if (s.alpha.size() != p.dimension()) fail(at + "/alpha", "expected one exponent per variable");
    const json& ps = array(f["price_sets"], at + "/price_sets");
    for (std::size_t k = 0; k < ps.size(); ++k) {
      const std::string pk = at + "/price_sets/" + std::to_string(k);
      auto prices = strings(ps[k], pk);
      if (prices.size() != p.dimension()) fail(pk, "expected one price per variable");
      for (std::size_t i = 0; i < prices.size(); ++i) expression(prices[i], p.space, pk + "/" + std::to_string(i));
      s.price_sets.push_back(std::move(prices));
    }
    s.mu = number_at(f, "mu", at, s.mu);
    o.consumer = s;
  }
  return o;
}

}  // namespace

ProblemFile parse_problem(const json& doc) {
  object(doc, "");
  only_keys(doc, "", {"name", "description", "variables", "objective", "sense", "constraints", "pfaff", "options",
                      "expect"});
  ProblemFile pf;
  pf.name = string_at(doc, "name", "");
  pf.description = string_at(doc, "description", "", false);
  if (!doc.contains("variables")) fail("", "missing required property 'variables'");
  Program& p = pf.program;
  p.name = pf.name;
  p.space = variables(doc["variables"], "/variables");
  p.objective = expression(string_at(doc, "objective", ""), p.space, "/objective");
  const std::string sense = string_at(doc, "sense", "", false, "min");
  if (sense != "min" && sense != "max") fail("/sense", "expected 'min' or 'max'");
  p.sense = sense_from_name(sense);
  if (doc.contains("constraints")) {
    const json& cs = array(doc["constraints"], "/constraints");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string at = "/constraints/" + std::to_string(i);
      object(cs[i], at);
      only_keys(cs[i], at, {"expr", "relation", "constant"});
      HolonomicConstraint c;
      c.g = expression(string_at(cs[i], "expr", at), p.space, at + "/expr");
      c.relation = relation_at(cs[i], at);
      c.constant = number_at(cs[i], "constant", at, 0.0);
      p.holonomic.push_back(c);
    }
  }
  if (doc.contains("pfaff")) {
    const json& ws = array(doc["pfaff"], "/pfaff");
    for (std::size_t i = 0; i < ws.size(); ++i) {
      const std::string at = "/pfaff/" + std::to_string(i);
      object(ws[i], at);
      only_keys(ws[i], at, {"coefficients", "relation"});
      if (!ws[i].contains("coefficients")) fail(at, "missing required property 'coefficients'");
      const auto cs = strings(ws[i]["coefficients"], at + "/coefficients");
      if (cs.size() != p.dimension()) fail(at + "/coefficients", "expected one coefficient per variable");
      PfaffForm w;
      for (std::size_t k = 0; k < cs.size(); ++k)
        w.coefficients.push_back(expression(cs[k], p.space, at + "/coefficients/" + std::to_string(k)));
      w.relation = relation_at(ws[i], at);
      p.pfaff.push_back(std::move(w));
    }
  }
  if (!p.holonomic.empty() && !p.pfaff.empty()) fail("", "a problem has either 'constraints' or 'pfaff', not both");
  pf.options = doc.contains("options") ? options(doc["options"], "/options", p) : Options{};
  if (doc.contains("expect")) pf.expect = array(doc["expect"], "/expect");
  p.validate();
  return pf;
}

ProblemFile load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
  ProblemFile pf = parse_problem(doc);
  pf.path = path;
  return pf;
}

StartSpec start_spec(const Options& o, std::uint64_t seed) { return {o.starts, o.box_lower, o.box_upper, seed}; }

holonomic::GridAxis parse_axis(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.size() < 3 || parts.size() > 4 || (parts.size() == 4 && parts[3] != "log"))
    throw InputError("range '" + text + "' must look like from:to:count[:log]");
  holonomic::GridAxis a;
  try {
    std::size_t used = 0;
    a.from = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("");
    a.to = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("");
    a.count = std::stoi(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw InputError("range '" + text + "' has a malformed number");
  }
  if (a.count < 1) throw InputError("range '" + text + "' is empty");
  a.log_scale = parts.size() == 4;
  if (a.log_scale && (a.from <= 0 || a.to <= 0)) throw InputError("log range needs positive ends");
  return a;
}

Vector parse_vector(const std::string& text) {
  Vector out;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw InputError("'" + text + "' is not a comma-separated list of numbers");
    }
  }
  if (out.empty()) throw InputError("empty number list");
  return out;
}

}  // namespace pfaffopt::io
