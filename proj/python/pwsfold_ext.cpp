#include "pwsfold/cli.hpp"
#include "pwsfold/error.hpp"
#include "pwsfold/io.hpp"
#include "pwsfold/sim.hpp"
#include "pwsfold/twofold.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <limits>
#include <sstream>

namespace py = pybind11;
using namespace pwsfold;

namespace {

twofold::TwoFoldParams params(int a1, int a2, double b1, double b2, double alpha) {
    twofold::TwoFoldParams p{a1, a2, b1, b2, alpha};
    p.validate();
    return p;
}

std::array<std::string_view, 3> as_views(const std::array<std::string, 3>& a) { return {a[0], a[1], a[2]}; }

py::dict trajectory_dict(const pws::Trajectory& tr) {
    const auto n = static_cast<py::ssize_t>(tr.samples.size());
    py::array_t<double> t(n), lambda(n);
    py::array_t<double> x({n, py::ssize_t{3}});
    auto tv = t.mutable_unchecked<1>();
    auto lv = lambda.mutable_unchecked<1>();
    auto xv = x.mutable_unchecked<2>();
    py::list modes;
    for (py::ssize_t i = 0; i < n; ++i) {
        const auto& s = tr.samples[static_cast<std::size_t>(i)];
        tv(i) = s.t;
        for (py::ssize_t k = 0; k < 3; ++k) xv(i, k) = s.x[static_cast<std::size_t>(k)];
        lv(i) = s.lambda ? *s.lambda : std::numeric_limits<double>::quiet_NaN();
        modes.append(std::string(pws::to_string(s.mode)));
    }
    py::list events;
    for (const auto& e : tr.events) {
        py::dict d;
        d["t"] = e.t;
        d["x"] = e.x;
        d["kind"] = std::string(pws::to_string(e.kind));
        d["lambda"] = e.lambda ? py::cast(*e.lambda) : py::none();
        events.append(d);
    }
    py::dict out;
    out["t"] = t;
    out["x"] = x;
    out["lambda"] = lambda;
    out["mode"] = modes;
    out["events"] = events;
    out["non_unique"] = tr.non_unique;
    out["escaped"] = tr.escaped;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Two-fold singularities of piecewise-smooth systems and their regularizations";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<DegenerateError>(m, "DegenerateError", PyExc_ArithmeticError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<EvalError>(m, "EvalError", PyExc_ArithmeticError);

    py::class_<pws::PiecewiseSystem>(m, "System")
        .def(py::init([](const std::array<std::string, 3>& fplus, const std::array<std::string, 3>& fminus,
                         const std::array<std::string, 3>& hidden) {
                 return pws::PiecewiseSystem::from_text(as_views(fplus), as_views(fminus), as_views(hidden));
             }),
             py::arg("fplus"), py::arg("fminus"), py::arg("hidden") = std::array<std::string, 3>{"0", "0", "0"})
        .def_static(
            "normal_form",
            [](int a1, int a2, double b1, double b2, double alpha) {
                return twofold::build_normal_form(params(a1, a2, b1, b2, alpha));
            },
            py::arg("a1"), py::arg("a2"), py::arg("b1"), py::arg("b2"), py::arg("alpha"))
        .def("combined",
             [](const pws::PiecewiseSystem& s) {
                 const auto& f = s.combined();
                 return std::array<std::string, 3>{f[0].to_string(), f[1].to_string(), f[2].to_string()};
             })
        .def("field", [](const pws::PiecewiseSystem& s, const pws::Vec3& x,
                         double lambda) { return pws::combination(s, x, lambda); })
        .def("sliding_lambdas", [](const pws::PiecewiseSystem& s, double x2,
                                   double x3) { return pws::sliding_lambdas(s, x2, x3); })
        .def_property_readonly("has_hidden_terms", &pws::PiecewiseSystem::has_hidden_terms);

    m.def(
        "load_system",
        [](const std::string& path) { return io::load_system(path).system; }, py::arg("path"));

    m.def(
        "classify_json",
        [](int a1, int a2, double b1, double b2, double alpha, const std::string& sigmoid) {
            return io::classify_json(params(a1, a2, b1, b2, alpha), reg::Sigmoid::from_name(sigmoid)).dump();
        },
        py::arg("a1"), py::arg("a2"), py::arg("b1"), py::arg("b2"), py::arg("alpha"), py::arg("sigmoid") = "tanh");

    m.def(
        "fit_json",
        [](int a1, int a2, double b1, double b2, double alpha, const std::string& sigmoid) {
            return io::fit_json(params(a1, a2, b1, b2, alpha), reg::Sigmoid::from_name(sigmoid)).dump();
        },
        py::arg("a1"), py::arg("a2"), py::arg("b1"), py::arg("b2"), py::arg("alpha"), py::arg("sigmoid") = "tanh");

    m.def(
        "folded_points",
        [](int a1, int a2, double b1, double b2, double alpha) {
            return twofold::folded_points(params(a1, a2, b1, b2, alpha));
        },
        py::arg("a1"), py::arg("a2"), py::arg("b1"), py::arg("b2"), py::arg("alpha"));

    m.def(
        "canonical_coefficients",
        [](int a1, int a2, double b1, double b2, double alpha, double phi_s, const std::string& sigmoid) {
            const auto c = twofold::canonical_coefficients(params(a1, a2, b1, b2, alpha),
                                                           reg::Sigmoid::from_name(sigmoid), phi_s);
            return py::make_tuple(c.p, c.q, c.r);
        },
        py::arg("a1"), py::arg("a2"), py::arg("b1"), py::arg("b2"), py::arg("alpha"), py::arg("phi_s"),
        py::arg("sigmoid") = "tanh");

    m.def(
        "critical_manifold",
        [](const pws::PiecewiseSystem& sys, std::pair<double, double> x2, std::pair<double, double> x3, std::size_t n2,
           std::size_t n3) {
            const auto pts =
                reg::critical_manifold(sys, reg::Grid::uniform(x2.first, x2.second, n2, x3.first, x3.second, n3));
            py::list out;
            for (const auto& p : pts)
                out.append(py::make_tuple(p.lambda, p.x2, p.x3, std::string(reg::to_string(p.stability))));
            return out;
        },
        py::arg("system"), py::arg("x2") = std::pair{-1.0, 1.0}, py::arg("x3") = std::pair{-1.0, 1.0},
        py::arg("n2") = 41, py::arg("n3") = 41);

    m.def(
        "simulate",
        [](const pws::PiecewiseSystem& sys, const pws::Vec3& x0, double t_end, const std::string& mode,
           std::optional<double> eps, const std::string& sigmoid, double stride, double rel_tol, double abs_tol,
           double escape) {
            IntegratorOptions opts;
            opts.rel_tol = rel_tol;
            opts.abs_tol = abs_tol;
            opts.dense_output_stride = stride;
            if (mode == "regularized") {
                if (!eps || !(*eps > 0.0)) throw InputError("eps: a positive value is required in regularized mode");
                sim::SimResult res;
                {
                    py::gil_scoped_release release;
                    res = sim::integrate_regularized(sys, {*eps, reg::Sigmoid::from_name(sigmoid)}, x0, t_end, opts,
                                                     escape);
                }
                auto out = trajectory_dict(res.trajectory);
                out["escaped"] = res.escaped;
                out["steps"] = res.steps;
                out["layer_entries"] = res.layer_entries;
                out["sup_norm"] = res.sup_norm;
                return out;
            }
            if (mode != "pws") throw InputError("mode: expected pws or regularized");
            pws::PwsOptions po;
            po.integrator = opts;
            po.escape_radius = escape;
            pws::Trajectory tr;
            {
                py::gil_scoped_release release;
                tr = pws::integrate_pws(sys, x0, t_end, po);
            }
            return trajectory_dict(tr);
        },
        py::arg("system"), py::arg("x0"), py::arg("t_end"), py::arg("mode") = "pws", py::arg("eps") = py::none(),
        py::arg("sigmoid") = "tanh", py::arg("stride") = 0.01, py::arg("rel_tol") = 1e-8, py::arg("abs_tol") = 1e-10,
        py::arg("escape") = std::numeric_limits<double>::infinity());

    m.def(
        "example_system", [](const std::string& name) { return sim::example_system(sim::example_from_name(name)); },
        py::arg("name"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = cli::run(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
