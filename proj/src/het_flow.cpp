#include "hetflow/het_flow.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace hetflow {

Rhs3 rhs_3d(const LieAlgebraData& alg, const Mat& g, double f, double kappa, double h_coefficient) {
    if (alg.n != 3 || g.rows() != 3 || g.cols() != 3) throw std::invalid_argument("rhs_3d requires dimension 3");
    if (!std::isfinite(f) || !g.allFinite()) throw std::invalid_argument("rhs_3d: non-finite state");
    const Metric m(g);  // validates SPD
    const InvariantCurvature cv = invariant_curvature(alg, m);
    const double s = cv.s;
    const double f2 = f * f;
    const double ric2 = bilinear_norm_sq(cv.ric, m);
    Rhs3 r;
    r.g_dot = 2.0 * kappa * ric_circ_ric(cv.ric, m) - (2.0 + kappa * (2.0 * s - f2)) * cv.ric +
              (h_coefficient * f2 + kappa * (s * s - 2.0 * ric2 - 0.25 * f2 * f2)) * g;
    r.f_dot = -0.5 * trace(r.g_dot, m) * f;
    return r;
}

Rhs3 rhs_3d(const FlowState3& state, double kappa, double h_coefficient) {
    return rhs_3d(state.alg, state.g, state.f, kappa, h_coefficient);
}

RhsGeneral rhs_general(const GeometrySample& s, double kappa, double h_coefficient) {
    require_depth(s, 2, "rhs_general");
    const int n = s.dim();
    const Mat& gi = s.g.inv();
    RhsGeneral r;
    r.g_dot = -2.0 * ricci(s) + h_coefficient * h_circ_h(s.H, s.g) -
              2.0 * kappa * r_circ_r(torsion_curvature(s), s.g);
    // ∇_e(δH)(b,c) = -g^{ad} (∇_e∇_a H)(d,b,c)
    Tensor D_delta(n, 3);
    for (int e = 0; e < n; ++e)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                double acc = 0.0;
                for (int a = 0; a < n; ++a)
                    for (int d = 0; d < n; ++d) acc += gi(a, d) * s.DDH(e, a, d, b, c);
                D_delta(e, b, c) = -acc;
            }
    r.H_dot = -1.0 * exterior_derivative(D_delta);
    return r;
}

Tensor bianchi_residual(const GeometrySample& s, double kappa) {
    // no non-zero 4-forms below dimension 4
    if (s.dim() < 4) return Tensor(s.dim(), 4);
    return exterior_derivative(s.DH) + kappa * r_wedge_r(torsion_curvature(s), s.g);
}

double dilaton_rhs(const GeometrySample& s, double kappa) {
    const double delta_phi = -trace(s.Dphi, s.g);
    return 0.5 * (form_inner(s.H, s.H, s.g) - delta_phi - kappa * curvature_norm_sq(torsion_curvature(s), s.g));
}

GeometrySample invariant_state_sample(const LieAlgebraData& alg, const Mat& g, double f) {
    InvariantGeometry geom(alg, Metric(g));
    geom.set_dilaton_density(f);
    return build_sample_invariant(geom);
}

double homothety_factor(const Mat& g, const Mat& base) {
    return std::pow(g.determinant() / base.determinant(), 1.0 / static_cast<double>(g.rows()));
}

namespace {

constexpr int kDim = 3;
constexpr int kPacked = kDim * (kDim + 1) / 2;

Mat unpack(const OdeState& x) {
    Mat g(kDim, kDim);
    int k = 0;
    for (int i = 0; i < kDim; ++i)
        for (int j = i; j < kDim; ++j) g(i, j) = g(j, i) = x[k++];
    return g;
}

OdeState pack(const Mat& g, double f) {
    OdeState x(kPacked + 1);
    int k = 0;
    for (int i = 0; i < kDim; ++i)
        for (int j = i; j < kDim; ++j) x[k++] = g(i, j);
    x[kPacked] = f;
    return x;
}

Vec eigenvalues(const Mat& g) { return Eigen::SelfAdjointEigenSolver<Mat>(g, Eigen::EigenvaluesOnly).eigenvalues(); }

}  // namespace

FlowTrajectory integrate_flow(const FlowState3& state, const FlowParams& params) {
    if (params.kappa < 0.0 || !std::isfinite(params.kappa)) throw std::invalid_argument("flow: kappa must be >= 0");
    // validates dimension and SPD before integrating
    rhs_3d(state, params.kappa, params.h_coefficient);

    const LieAlgebraData& alg = state.alg;
    const double kappa = params.kappa, hc = params.h_coefficient;
    OdeRhs rhs = [&alg, kappa, hc](const OdeState& x, OdeState& dx, double) {
        const Rhs3 r = rhs_3d(alg, unpack(x), x[kPacked], kappa, hc);
        dx = pack(r.g_dot, r.f_dot);
    };
    std::vector<OdeEvent> events;
    events.push_back({"degenerate", [&params](double, const OdeState& x) {
                          return eigenvalues(unpack(x)).minCoeff() - params.degenerate_tol;
                      }});
    events.push_back({"blowup", [&params](double, const OdeState& x) {
                          return params.blowup - eigenvalues(unpack(x)).maxCoeff();
                      }});

    const OdeResult res = integrate_ode(rhs, pack(state.g, state.f), state.t, params.t1, params.ode, events,
                                        params.sample_dt);
    FlowTrajectory out;
    out.status = res.status;
    out.event = res.event_name;
    out.message = res.message;
    out.error_bound = res.error_bound;
    out.steps = res.steps;
    for (const auto& smp : res.samples) {
        out.t.push_back(smp.t);
        out.g.push_back(unpack(smp.x));
        out.f.push_back(smp.x[kPacked]);
    }
    return out;
}

}  // namespace hetflow
