#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dynbc/certificate.hpp"
#include "dynbc/cli.hpp"
#include "dynbc/errors.hpp"
#include "dynbc/expr.hpp"
#include "dynbc/report.hpp"
#include "dynbc/solver.hpp"
#include "dynbc/verify.hpp"

namespace py = pybind11;
using namespace dynbc;

namespace {

Var var_from(const std::string& name) {
    if (name == "t") return Var::t;
    if (name == "x") return Var::x;
    if (name == "z") return Var::z;
    if (name == "p") return Var::p;
    throw py::value_error("variable must be one of t, x, z, p");
}

RunSpec spec_from_text(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("spec is not valid JSON: ") + e.what());
    }
    return run_spec_from_json(j);
}

py::dict barrier_dict(const BarrierCertificate& c) {
    py::dict d;
    d["psi"] = c.psi;
    d["q0"] = c.q0;
    d["q1"] = c.q1;
    d["kappa0"] = c.kappa0;
    d["kappa0_ode"] = c.kappa0_ode;
    d["M"] = c.M;
    d["K"] = c.K;
    d["xi"] = c.xi;
    d["h"] = c.h;
    d["dh"] = c.dh;
    return d;
}

std::vector<std::vector<double>> rows(const GridFunction& g) {
    std::vector<std::vector<double>> out(g.nt());
    for (std::size_t i = 0; i < g.nt(); ++i) out[i].assign(g.row(i), g.row(i) + g.nx());
    return out;
}

}  // namespace

PYBIND11_MODULE(_dynbc, m) {
    m.doc() = "Barrier certificates, solver and verifier for parabolic problems with dynamic boundary conditions";

    auto base = py::register_exception<Error>(m, "DynbcError", PyExc_RuntimeError);
    py::register_exception<SyntaxError>(m, "SyntaxError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ConditionViolated>(m, "ConditionViolated", base.ptr());
    py::register_exception<PreconditionFailed>(m, "PreconditionFailed", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<CertificateMismatch>(m, "CertificateMismatch", base.ptr());
    py::register_exception<DivergentIntegral>(m, "DivergentIntegral", base.ptr());
    py::register_exception<InputError>(m, "InputError", base.ptr());

    py::class_<Expr>(m, "Expr")
        .def("__str__", &Expr::str)
        .def("__repr__", [](const Expr& e) { return "Expr('" + e.str() + "')"; })
        .def("__eq__", [](const Expr& a, const Expr& b) { return a == b; })
        .def("eval",
             [](const Expr& e, double t, double x, double z, double p) { return eval(e, Env{t, x, z, p}); },
             py::arg("t") = 0.0, py::arg("x") = 0.0, py::arg("z") = 0.0, py::arg("p") = 0.0)
        .def("diff", [](const Expr& e, const std::string& v) { return diff(e, var_from(v)); })
        .def("depends_on", [](const Expr& e, const std::string& v) { return e.depends_on(var_from(v)); })
        .def_property_readonly("size", &Expr::size);

    m.def("parse", [](const std::string& text) { return parse(text); }, py::arg("text"));

    m.def("find_q1",
          [](const std::string& psi, double q0, double M) { return find_q1(PsiSpec::parse(psi), q0, M); },
          py::arg("psi"), py::arg("q0"), py::arg("M"));

    m.def("build_barrier",
          [](const std::string& psi, double q0, double M, double K) {
              return barrier_dict(build_barrier(PsiSpec::parse(psi), q0, M, K));
          },
          py::arg("psi"), py::arg("q0"), py::arg("M"), py::arg("K") = 0.0);

    m.def("sup_bound",
          [](const std::string& Phi, double B, double u0_sup, double T) {
              const auto s = sup_bound(parse(Phi), B, u0_sup, T);
              py::dict d;
              d["M_paper"] = s.M_paper;
              d["M_proof"] = s.M_proof;
              d["lambda_star"] = s.lambda_star;
              d["lambda_star_paper"] = s.lambda_star_paper;
              return d;
          },
          py::arg("Phi"), py::arg("B"), py::arg("u0_sup"), py::arg("T"));

    m.def("check_compatibility",
          [](const std::string& spec_json) {
              const auto r = check_compatibility(spec_from_text(spec_json).problem);
              return py::make_tuple(r.minus, r.plus);
          },
          py::arg("spec_json"));

    m.def("check_hypotheses",
          [](const std::string& spec_json, double M, double q0, const std::string& psi, double pmax) {
              const auto rs = spec_from_text(spec_json);
              const auto rep = check_hypotheses(rs.problem, M, q0, PsiSpec::parse(psi), pmax);
              py::list out;
              for (const auto& e : rep.entries) {
                  py::dict d;
                  d["name"] = e.name;
                  d["satisfied"] = e.satisfied;
                  d["worst_violation"] = e.worst_violation;
                  py::dict w;
                  for (const auto& [k, v] : e.witness) w[py::str(k)] = v;
                  d["witness"] = w;
                  d["note"] = e.note;
                  out.append(d);
              }
              return out;
          },
          py::arg("spec_json"), py::arg("M"), py::arg("q0"), py::arg("psi"), py::arg("pmax") = 0.0);

    m.def("solve",
          [](const std::string& spec_json, std::optional<int> nx, std::optional<double> cutoff) {
              auto rs = spec_from_text(spec_json);
              if (nx) rs.solver.nx = *nx;
              if (cutoff) rs.solver.gradient_cutoff = *cutoff;
              Solution sol;
              {
                  py::gil_scoped_release release;
                  sol = solve(rs.problem, rs.solver);
              }
              py::dict d;
              d["status"] = std::string(to_string(sol.status));
              d["status_time"] = sol.status_time;
              d["max_gradient"] = sol.max_gradient;
              d["reason"] = sol.reason;
              d["times"] = sol.u.times();
              d["nodes"] = sol.u.nodes();
              d["u"] = rows(sol.u);
              d["u_x"] = rows(sol.ux);
              d["sup_u"] = sup_norm(sol.u);
              return d;
          },
          py::arg("spec_json"), py::arg("nx") = py::none(), py::arg("cutoff") = py::none());

    m.def("run_cli",
          [](const std::vector<std::string>& args) {
              py::gil_scoped_release release;
              return cli::run(args);
          },
          py::arg("args"));
}
