#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pfaffopt/commands.hpp"
#include "pfaffopt/errors.hpp"
#include "pfaffopt/verify.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace pfaffopt;

namespace {

// Python objects cross the boundary as JSON text; reports are plain dicts.
json to_json(const py::handle& obj) {
  const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return json::parse(text);
}

py::object to_python(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

io::ProblemFile problem(const py::object& src) {
  if (py::isinstance<py::str>(src) || py::hasattr(src, "__fspath__"))
    return io::load_problem(py::str(py::module_::import("os").attr("fspath")(src)).cast<std::string>());
  return io::parse_problem(to_json(src));
}

io::RunOptions run_options(std::uint64_t seed, std::optional<double> tol, std::optional<int> starts,
                           const std::vector<std::string>& grid, const std::optional<std::vector<double>>& anchor,
                           const std::vector<std::vector<double>>& mu, const std::optional<std::string>& range) {
  io::RunOptions ro;
  ro.seed = seed;
  ro.tol = tol;
  ro.starts = starts;
  for (const auto& g : grid) ro.grid.push_back(io::parse_axis(g));
  ro.anchor = anchor;
  ro.mu = mu;
  if (range) ro.range = io::parse_axis(*range);
  return ro;
}

class PyExpression {
 public:
  PyExpression(const std::string& text, std::vector<std::string> variables)
      : space_(std::move(variables)), expr_(parse(text, space_)) {}

  double eval(const std::vector<double>& x) const {
    if (x.size() != space_.size()) throw InputError("expected " + std::to_string(space_.size()) + " values");
    return expr_.eval(x);
  }
  std::vector<std::string> gradient() const {
    std::vector<std::string> out;
    for (const auto& g : pfaffopt::gradient(expr_, space_)) out.push_back(unparse(g));
    return out;
  }
  std::string str() const { return unparse(expr_); }
  std::vector<std::string> variables() const { return space_.names(); }

 private:
  VarSpace space_;
  Expr expr_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Optimization with holonomic and Pfaff constraints";

  static py::exception<Error> base(m, "Error");
  static py::exception<InputError> input(m, "InputError", PyExc_ValueError);
  static py::exception<SolverError> solver(m, "SolverError", base.ptr());
  static py::exception<SingularPathError> singular(m, "SingularPathError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const SingularPathError& e) {
      singular(e.what());
    } catch (const InputError& e) {
      input(e.what());
    } catch (const ExprError& e) {
      input(e.what());
    } catch (const SolverError& e) {
      solver(e.what());
    } catch (const Error& e) {
      base(e.what());
    }
  });

  py::class_<PyExpression>(m, "Expression")
      .def(py::init<const std::string&, std::vector<std::string>>(), py::arg("text"), py::arg("variables"))
      .def("eval", &PyExpression::eval, py::arg("x"))
      .def("gradient", &PyExpression::gradient, "symbolic partial derivatives, one string per variable")
      .def_property_readonly("variables", &PyExpression::variables)
      .def("__str__", &PyExpression::str)
      .def("__repr__", [](const PyExpression& e) { return "Expression('" + e.str() + "')"; });

  m.def(
      "validate",
      [](const py::object& src) {
        const auto pf = problem(src);
        return py::make_tuple(pf.name, pf.program.space.names());
      },
      py::arg("problem"), "parse and validate a problem (path or dict); returns (name, variables)");

  m.def(
      "solve",
      [](const py::object& src, std::uint64_t seed, std::optional<double> tol, std::optional<int> starts,
         const std::vector<std::vector<double>>& mu) {
        return to_python(io::run_solve(problem(src), run_options(seed, tol, starts, {}, {}, mu, {})));
      },
      py::arg("problem"), py::arg("seed") = 42, py::arg("tol") = py::none(), py::arg("starts") = py::none(),
      py::arg("mu") = std::vector<std::vector<double>>{});

  m.def(
      "dual",
      [](const py::object& src, const std::string& kind, std::uint64_t seed, const std::vector<std::string>& grid,
         const std::optional<std::vector<double>>& anchor) {
        return to_python(io::run_dual(problem(src), io::dual_command_from_name(kind),
                                      run_options(seed, {}, {}, grid, anchor, {}, {})));
      },
      py::arg("problem"), py::arg("kind") = "psi", py::arg("seed") = 42,
      py::arg("grid") = std::vector<std::string>{}, py::arg("anchor") = py::none());

  m.def(
      "sweep",
      [](const py::object& src, const std::string& param, const std::optional<std::string>& range, std::uint64_t seed) {
        return to_python(io::run_sweep(problem(src), param, run_options(seed, {}, {}, {}, {}, {}, range)));
      },
      py::arg("problem"), py::arg("param") = "mu", py::arg("range") = py::none(), py::arg("seed") = 42);

  m.def(
      "frobenius",
      [](const py::object& src, std::uint64_t seed) {
        return to_python(io::run_frobenius(problem(src), run_options(seed, {}, {}, {}, {}, {}, {})));
      },
      py::arg("problem"), py::arg("seed") = 42);

  m.def(
      "verify",
      [](const std::optional<std::string>& corpus, std::uint64_t seed, bool properties) {
        const std::filesystem::path dir = corpus ? std::filesystem::path(*corpus) : verify::default_corpus_dir();
        auto outcomes = verify::check_corpus(dir, seed);
        if (properties) {
          const auto more = verify::property_suite(verify::load_corpus(dir), seed);
          outcomes.insert(outcomes.end(), more.begin(), more.end());
        }
        return to_python(verify::report_json(outcomes));
      },
      py::arg("corpus") = py::none(), py::arg("seed") = 42, py::arg("properties") = true);

  m.def(
      "to_csv", [](const py::object& report) { return io::to_csv(to_json(report)); }, py::arg("report"));
}
