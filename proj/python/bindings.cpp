// Python bindings of the hetflow core. Matrices are numpy arrays, tensors are
// numpy arrays of shape (n,)*rank, reports are dicts.
#include "hetflow/chart.hpp"
#include "hetflow/het_flow.hpp"
#include "hetflow/homothety.hpp"
#include "hetflow/soliton.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

namespace py = pybind11;
using namespace hetflow;

namespace {

py::array_t<double> to_numpy(const Tensor& t) {
    std::vector<py::ssize_t> shape(t.rank(), t.dim());
    py::array_t<double> out(shape);
    std::copy(t.data().begin(), t.data().end(), out.mutable_data());
    return out;
}

py::dict to_dict(const ResidualReport& r) {
    py::dict eq;
    for (const auto& e : r.entries()) {
        py::dict d;
        d["value"] = e.value;
        d["tol"] = e.tol;
        d["pass"] = e.pass;
        eq[py::str(e.name)] = d;
    }
    py::dict out;
    out["schema_version"] = kReportSchemaVersion;
    out["equations"] = eq;
    out["pass"] = r.all_pass();
    out["info"] = r.info();
    out["labels"] = r.labels();
    return out;
}

py::dict to_dict(const Behavior& b) {
    py::dict d;
    d["tag"] = to_string(b.tag);
    d["sigma_minus_inf"] = b.sigma_minus_inf;
    d["sigma_plus_inf"] = b.sigma_plus_inf;
    d["collapse_time"] = b.collapse_time;
    return d;
}

LaurentRhs homothety_rhs(const std::string& c, double kappa, double mu, double sigma0, const std::string& model) {
    if (c == "su2") return su2_rhs(kappa);
    HomothetyProblem p = make_problem(parse_homothety_case(c), kappa, mu, sigma0);
    if (model == "exact") p.model = HomothetyModel::Exact;
    else if (model != "printed") throw std::invalid_argument("model must be printed or exact");
    p.validate();
    return p.rhs();
}

InvariantGeometry soliton_geometry(const std::string& which, double kappa) {
    if (which == "heisenberg") return heisenberg_geometry(kappa);
    if (which == "hyperbolic") return hyperbolic_geometry(kappa);
    throw std::invalid_argument("soliton must be heisenberg or hyperbolic");
}

SolitonCandidate soliton_candidate(const std::string& which, double kappa) {
    if (which == "heisenberg") return heisenberg_strong_soliton(kappa);
    if (which == "hyperbolic") return hyperbolic_soliton(kappa);
    throw std::invalid_argument("soliton must be heisenberg or hyperbolic");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "heterotic flow laboratory core";
    m.attr("REPORT_SCHEMA_VERSION") = kReportSchemaVersion;

    // homothety reductions
    m.def("F_p", &F_p, py::arg("kappa"), py::arg("mu"), py::arg("y"));
    m.def("F_flat", &F_flat, py::arg("kappa"), py::arg("mu"), py::arg("y"));
    m.def("F_n", &F_n, py::arg("kappa"), py::arg("mu"), py::arg("y"));
    m.def("kappa_crit_p", &kappa_crit_p, py::arg("mu"));
    m.def("kappa_crit_n", &kappa_crit_n, py::arg("mu"));
    m.def("mu_threshold_cubic", &mu_threshold_cubic);
    m.def(
        "kappa0",
        [](double mu) -> std::optional<std::pair<double, double>> {
            const Kappa0Result r = kappa0(mu);
            if (!r.ok) return std::nullopt;
            return std::make_pair(r.kappa0, r.y0);
        },
        py::arg("mu"), "(kappa0, y0) or None when no double root exists in (0, 1)");
    m.def("lambert_w", &lambert_w, py::arg("x"), py::arg("branch") = 0);
    m.def("flat_closed_form", &flat_closed_form, py::arg("kappa"), py::arg("mu"), py::arg("t"));
    m.def("flat_collapse_time", &flat_collapse_time, py::arg("kappa"), py::arg("mu"));
    m.def("su2_closed_form", &su2_closed_form, py::arg("kappa"), py::arg("t"));
    m.def("su2_t_max", &su2_t_max, py::arg("kappa"));
    m.def(
        "classify",
        [](const std::string& c, double kappa, double mu, double sigma0) {
            if (c == "su2") return to_dict(classify(su2_rhs(kappa), sigma0));
            return to_dict(classify(parse_homothety_case(c), kappa, mu, sigma0));
        },
        py::arg("case"), py::arg("kappa"), py::arg("mu") = 0.0, py::arg("sigma0") = 1.0);
    m.def(
        "integrate_homothety",
        [](const std::string& c, double kappa, double mu, double t1, double sigma0, double sample_dt,
           const std::string& model, double rtol, double atol) {
            OdeOptions opt;
            opt.rtol = rtol;
            opt.atol = atol;
            const HomothetyTrajectory tr =
                integrate(homothety_rhs(c, kappa, mu, sigma0, model), sigma0, 0.0, t1, opt, HomothetyEvents{}, sample_dt);
            py::dict d;
            d["t"] = py::array_t<double>(tr.t.size(), tr.t.data());
            d["sigma"] = py::array_t<double>(tr.sigma.size(), tr.sigma.data());
            d["event"] = tr.event;
            d["status"] = to_string(tr.status);
            return d;
        },
        py::arg("case"), py::arg("kappa"), py::arg("mu") = 0.0, py::arg("t1") = 1.0, py::arg("sigma0") = 1.0,
        py::arg("sample_dt") = 0.0, py::arg("model") = "printed", py::arg("rtol") = 1e-10, py::arg("atol") = 1e-12);
    m.def(
        "sweep",
        [](const std::string& c, double kappa_lo, double kappa_hi, int n_kappa, double mu_lo, double mu_hi, int n_mu,
           int threads) {
            const SweepGrid grid{kappa_lo, kappa_hi, mu_lo, mu_hi, n_kappa, n_mu};
            std::vector<SweepCell> cells;
            {
                py::gil_scoped_release release;
                cells = sweep(parse_homothety_case(c), grid, threads);
            }
            py::list out;
            for (const SweepCell& cell : cells) out.append(py::make_tuple(cell.kappa, cell.mu, to_string(cell.behavior.tag)));
            return out;
        },
        py::arg("case"), py::arg("kappa_lo") = 0.0, py::arg("kappa_hi") = 1.0, py::arg("n_kappa") = 41,
        py::arg("mu_lo") = 0.0, py::arg("mu_hi") = 2.0, py::arg("n_mu") = 41, py::arg("threads") = 1,
        "list of (kappa, mu, tag), mu-major");

    // three-dimensional flow
    m.def("catalog_names", &catalog_names);
    m.def(
        "rhs_3d",
        [](const std::string& algebra, const Mat& g, double f, double kappa, std::optional<double> param,
           double h_coefficient) {
            const Rhs3 r = rhs_3d(catalog(algebra, param), g, f, kappa, h_coefficient);
            return py::make_tuple(r.g_dot, r.f_dot);
        },
        py::arg("algebra"), py::arg("g"), py::arg("f"), py::arg("kappa"), py::arg("param") = py::none(),
        py::arg("h_coefficient") = kAdoptedHCoefficient, "(g_dot, f_dot)");
    m.def(
        "integrate_flow",
        [](const std::string& algebra, const Mat& g, double f, double kappa, double t1, double sample_dt,
           std::optional<double> param, double h_coefficient) {
            FlowParams p;
            p.kappa = kappa;
            p.t1 = t1;
            p.sample_dt = sample_dt;
            p.h_coefficient = h_coefficient;
            const FlowTrajectory tr = integrate_flow({catalog(algebra, param), g, f, 0.0}, p);
            py::array_t<double> gs({static_cast<py::ssize_t>(tr.g.size()), py::ssize_t(3), py::ssize_t(3)});
            auto v = gs.mutable_unchecked<3>();
            for (std::size_t k = 0; k < tr.g.size(); ++k)
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) v(k, i, j) = tr.g[k](i, j);
            py::dict d;
            d["t"] = py::array_t<double>(tr.t.size(), tr.t.data());
            d["g"] = gs;
            d["f"] = py::array_t<double>(tr.f.size(), tr.f.data());
            d["event"] = tr.event;
            d["status"] = to_string(tr.status);
            return d;
        },
        py::arg("algebra"), py::arg("g"), py::arg("f"), py::arg("kappa"), py::arg("t1") = 1.0, py::arg("sample_dt") = 0.0,
        py::arg("param") = py::none(), py::arg("h_coefficient") = kAdoptedHCoefficient);

    // curvature of left-invariant metrics
    m.def(
        "invariant_curvature",
        [](const std::string& algebra, const Mat& g, std::optional<double> param) {
            const InvariantCurvature cv = invariant_curvature(catalog(algebra, param), Metric(g));
            py::dict d;
            d["R"] = to_numpy(cv.R);
            d["ric"] = cv.ric;
            d["s"] = cv.s;
            return d;
        },
        py::arg("algebra"), py::arg("g"), py::arg("param") = py::none());

    // solitons
    m.def(
        "soliton_geometry",
        [](const std::string& which, double kappa) {
            const InvariantGeometry geom = soliton_geometry(which, kappa);
            py::dict d;
            d["algebra"] = geom.alg.name;
            d["g"] = geom.g.g();
            d["f"] = build_sample_invariant(geom).f;
            d["ric"] = geom.ric;
            return d;
        },
        py::arg("which"), py::arg("kappa"));
    m.def(
        "soliton_report",
        [](const std::string& which, double kappa, double tol) {
            const SolitonCandidate c = soliton_candidate(which, kappa);
            ResidualReport r;
            for (const ResidualReport& part : {residual_general(c, tol), residual_3d(c.sample, kappa, tol), strong_residual(c, tol)})
                for (const auto& e : part.entries()) r.add(e.name, e.value, e.tol);
            r.set_info("kappa", kappa);
            r.set_info("f", c.sample.f);
            return to_dict(r);
        },
        py::arg("which"), py::arg("kappa"), py::arg("tol") = kConstructorTol);
    m.def(
        "classify_constant_dilaton",
        [](const Mat& ric, const Mat& g, double kappa) {
            const ConstantDilatonClass c = classify_constant_dilaton(ric, Metric(g), kappa);
            py::dict d;
            d["case"] = c.case_id;
            d["f"] = c.f;
            d["eigenvalues"] = c.eigenvalues;
            return d;
        },
        py::arg("ric"), py::arg("g"), py::arg("kappa"));
    m.def("quadratic_discriminant", &quadratic_discriminant, py::arg("f"), py::arg("kappa"));

    // identity checks on seeded random chart samples
    m.def(
        "verify_chart_sample",
        [](std::uint64_t seed, double kappa) {
            const ChartInputs in = random_chart_inputs(seed);
            const GeometrySample s = build_sample_poly(in.metric, in.f, in.potential, 2);
            ResidualReport r;
            for (const ResidualReport& part : {verify_curvature_identities_3d(s), verify_divergence_identities(s, kappa, seed)})
                for (const auto& e : part.entries()) r.add(e.name, e.value, e.tol);
            return to_dict(r);
        },
        py::arg("seed"), py::arg("kappa") = 1.0);
}
