#include <pybind11/pybind11.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>

#include "divopt/errors.hpp"
#include "divopt/oracle.hpp"
#include "divopt/sim.hpp"
#include "divopt/solver.hpp"
#include "divopt/verify.hpp"

namespace py = pybind11;
using namespace divopt;

namespace {

py::dict report_dict(const VerificationReport& r) {
    py::dict d;
    d["z1"] = r.pair.z1;
    d["z2"] = r.pair.z2;
    d["first_order"] = r.first_order;
    d["condition_a"] = r.condition_a;
    d["condition_b"] = r.condition_b;
    d["condition_b_residual"] = r.condition_b_residual;
    d["condition_c"] = r.condition_c;
    d["g2_at_a_plus"] = r.g2_at_a_plus;
    d["interior_residual"] = r.interior_residual;
    d["qvi_max_residual"] = r.qvi_max_residual;
    d["increment_min_slack"] = r.increment_min_slack;
    d["verdict"] = to_string(r.verdict);
    d["reason"] = r.reason;
    return d;
}

py::dict estimate_dict(const MCEstimate& e) {
    py::dict d;
    d["mean"] = e.mean;
    d["std_error"] = e.std_error;
    d["ci95"] = py::make_tuple(e.ci95_lo, e.ci95_hi);
    d["n_paths"] = e.n_paths;
    d["truncation_bias_bound"] = e.truncation_bias_bound;
    return d;
}

// Scale context that owns its parameters, so Python can hold it alone.
struct Scale {
    explicit Scale(const ModelParams& p) : ctx(p) {}
    ScaleContext ctx;
};

}  // namespace

PYBIND11_MODULE(_divopt, m) {
    m.doc() = "Two-barrier dividend strategies for a threshold-switching surplus";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init([](double mu_plus, double sigma_plus, double mu_minus, double sigma_minus, double a, double q,
                         double beta) {
                 return ModelParams({mu_plus, sigma_plus}, {mu_minus, sigma_minus}, a, q, beta);
             }),
             py::kw_only(), py::arg("mu_plus"), py::arg("sigma_plus"), py::arg("mu_minus"), py::arg("sigma_minus"),
             py::arg("a"), py::arg("q"), py::arg("beta"))
        .def_property_readonly("mu_plus", [](const ModelParams& p) { return p.plus().mu; })
        .def_property_readonly("sigma_plus", [](const ModelParams& p) { return p.plus().sigma; })
        .def_property_readonly("mu_minus", [](const ModelParams& p) { return p.minus().mu; })
        .def_property_readonly("sigma_minus", [](const ModelParams& p) { return p.minus().sigma; })
        .def_property_readonly("a", &ModelParams::a)
        .def_property_readonly("q", &ModelParams::q)
        .def_property_readonly("beta", &ModelParams::beta)
        .def("with_beta", &ModelParams::with_beta, py::arg("beta"))
        .def("__repr__", [](const ModelParams& p) {
            return "ModelParams(mu_plus=" + std::to_string(p.plus().mu) + ", sigma_plus=" +
                   std::to_string(p.plus().sigma) + ", mu_minus=" + std::to_string(p.minus().mu) +
                   ", sigma_minus=" + std::to_string(p.minus().sigma) + ", a=" + std::to_string(p.a()) +
                   ", q=" + std::to_string(p.q()) + ", beta=" + std::to_string(p.beta()) + ")";
        });

    py::class_<Scale>(m, "Scale")
        .def(py::init<const ModelParams&>(), py::arg("params"))
        .def_property_readonly("x_max", [](const Scale& s) { return s.ctx.x_max(); })
        .def("g", [](const Scale& s, py::array_t<double> x) {
            return py::vectorize([&s](double v) { return s.ctx.g(v); })(x);
        })
        .def("g_prime", [](const Scale& s, py::array_t<double> x) {
            return py::vectorize([&s](double v) { return s.ctx.g_prime(v); })(x);
        })
        .def("exit_down", [](const Scale& s, double x, double y, double z) { return s.ctx.exit_down(x, y, z); },
             py::arg("x"), py::arg("y"), py::arg("z"))
        .def("exit_up", [](const Scale& s, double x, double y, double z) { return s.ctx.exit_up(x, y, z); },
             py::arg("x"), py::arg("y"), py::arg("z"));

    m.def("classify", [](const ModelParams& p) { return to_string(classify_case(p, derive_constants(p))); },
          py::arg("params"));

    m.def(
        "solve",
        [](const ModelParams& p) {
            ScaleContext ctx(p);
            const auto sol = solve_barriers(ctx);
            py::list pairs;
            for (const auto& pr : sol.pairs) pairs.append(py::make_tuple(pr.z1, pr.z2));
            py::dict d;
            d["case"] = to_string(sol.label);
            d["pairs"] = pairs;
            d["zeta_star"] = zeta(ctx, sol.pairs.front().z1, sol.pairs.front().z2);
            d["degenerate"] = sol.degenerate;
            d["trace"] = sol.trace;
            return d;
        },
        py::arg("params"));

    m.def(
        "zeta", [](const ModelParams& p, double z1, double z2) { return zeta(ScaleContext(p), z1, z2); },
        py::arg("params"), py::arg("z1"), py::arg("z2"));

    m.def(
        "value",
        [](const ModelParams& p, double z1, double z2, py::array_t<double> x) {
            ScaleContext ctx(p);
            ValueFunction vf(ctx, {z1, z2});
            return py::vectorize([&vf](double v) { return vf(v); })(x);
        },
        py::arg("params"), py::arg("z1"), py::arg("z2"), py::arg("x"));

    m.def(
        "verify",
        [](const ModelParams& p, double z1, double z2) {
            ScaleContext ctx(p);
            return report_dict(check_conditions(ValueFunction(ctx, {z1, z2})));
        },
        py::arg("params"), py::arg("z1"), py::arg("z2"));

    m.def(
        "oracle",
        [](const ModelParams& p, int n1, int n2, int refine_rounds) {
            ScaleContext ctx(p);
            GridSpec spec;
            spec.n1 = n1;
            spec.n2 = n2;
            spec.refine_rounds = refine_rounds;
            const auto res = grid_maximize_zeta(ctx, spec);
            const auto cmp = compare_solver_oracle(ctx, solve_barriers(ctx), res);
            py::list args;
            for (const auto& a : res.argmaxes) args.append(py::make_tuple(a.pair.z1, a.pair.z2, a.zeta));
            py::dict d;
            d["zeta_max"] = res.zeta_max;
            d["argmaxes"] = args;
            d["spacing"] = py::make_tuple(res.spacing_z1, res.spacing_z2);
            d["value_ok"] = cmp.value_ok;
            d["argmax_ok"] = cmp.argmax_ok;
            return d;
        },
        py::arg("params"), py::arg("n1") = 400, py::arg("n2") = 400, py::arg("refine_rounds") = 3);

    m.def(
        "estimate_value_mc",
        [](const ModelParams& p, double z1, double z2, double x0, long n_paths, double dt, double horizon,
           std::uint64_t seed, bool antithetic) {
            SimConfig cfg;
            cfg.n_paths = n_paths;
            cfg.dt = dt;
            cfg.horizon = horizon;
            cfg.seed = seed;
            cfg.antithetic = antithetic;
            MCEstimate e;
            {
                py::gil_scoped_release release;
                e = estimate_value_mc(p, {z1, z2}, cfg, x0);
            }
            return estimate_dict(e);
        },
        py::arg("params"), py::arg("z1"), py::arg("z2"), py::arg("x0"), py::arg("n_paths") = 10000,
        py::arg("dt") = 1e-3, py::arg("horizon") = 0.0, py::arg("seed") = 0, py::arg("antithetic") = true);
}
