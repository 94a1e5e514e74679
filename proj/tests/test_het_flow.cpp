#include "doctest.h"

#include "hetflow/het_flow.hpp"
#include "hetflow/homothety.hpp"
#include "hetflow/soliton.hpp"
#include "support.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

using namespace hetflow;
using namespace hetflow::testing;

namespace {

// dH(x0..x3) = Σ_{i<j} (-1)^{i+j} H([xi,xj], ...) for an invariant 3-form
Tensor invariant_d3(const LieAlgebraData& alg, const Tensor& H) {
    const int n = alg.n;
    Tensor out(n, 4);
    for (std::size_t k = 0; k < out.size(); ++k) {
        int x[4];
        out.unflatten(k, x);
        double acc = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) {
                int rest[2], r = 0;
                for (int m = 0; m < 4; ++m)
                    if (m != i && m != j) rest[r++] = x[m];
                const double sg = ((i + j) % 2 == 0) ? 1.0 : -1.0;
                for (int c = 0; c < n; ++c) acc += sg * alg.c(c, x[i], x[j]) * H(c, rest[0], rest[1]);
            }
        out[k] = acc;
    }
    return out;
}

LieAlgebraData solvable4() {
    LieAlgebraData alg = make_algebra(4, "r_x_r3");
    for (int i = 0; i < 3; ++i) {
        Vec v = Vec::Zero(4);
        v(i) = 0.5 + 0.4 * i;
        set_bracket(alg, 3, i, v);
    }
    return alg;
}

FlowState3 state(const LieAlgebraData& alg, const Mat& g, double f) { return {alg, g, f, 0.0}; }

// Einstein metrics with s = +1 and s = -1
LieAlgebraData round_unit() {
    const double l = std::sqrt(2.0 / 3.0);
    return milnor_algebra(l, l, l, "su2");
}
LieAlgebraData hyperbolic_unit() { return catalog("hyperbolic", 1.0 / std::sqrt(6.0)); }

}  // namespace

TEST_CASE("flat space is stationary") {
    const Rhs3 r = rhs_3d(catalog("r3"), Mat::Identity(3, 3), 0.0, 0.7);
    CHECK(max_abs(r.g_dot) == 0.0);
    CHECK(r.f_dot == 0.0);
}

// Jacobian of rhs_3d in the packed (upper triangle of g, f) variables
Mat flow_jacobian(const InvariantGeometry& geom, double f, double kappa) {
    auto packed = [](const Rhs3& r) {
        Vec v(7);
        int k = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) v(k++) = r.g_dot(i, j);
        v(6) = r.f_dot;
        return v;
    };
    const Mat g0 = geom.g.g();
    const double h = 1e-6;
    Mat J(7, 7);
    int col = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j, ++col) {
            Mat dg = Mat::Zero(3, 3);
            dg(i, j) = dg(j, i) = h;
            J.col(col) = (packed(rhs_3d(geom.alg, g0 + dg, f, kappa)) - packed(rhs_3d(geom.alg, g0 - dg, f, kappa))) / (2 * h);
        }
    J.col(6) = (packed(rhs_3d(geom.alg, g0, f + h, kappa)) - packed(rhs_3d(geom.alg, g0, f - h, kappa))) / (2 * h);
    return J;
}

double largest_growth_rate(const Mat& J) { return Eigen::EigenSolver<Mat>(J).eigenvalues().real().maxCoeff(); }

TEST_CASE("solitons are fixed points") {
    for (double kappa : {0.25, 1.0, 3.0, 10.0}) {
        const InvariantGeometry geoms[] = {heisenberg_geometry(kappa), hyperbolic_geometry(kappa)};
        const double rates[] = {4.0 / kappa, 10.0 / kappa};
        for (int which = 0; which < 2; ++which) {
            const InvariantGeometry& geom = geoms[which];
            const double f = build_sample_invariant(geom).f;
            const Rhs3 r = rhs_3d(geom.alg, geom.g.g(), f, kappa);
            CHECK(max_abs(r.g_dot) <= 1e-10);
            CHECK(std::abs(r.f_dot) <= 1e-10);

            // the fixed point is unstable; round-off grows like exp(rate t)
            const double rate = largest_growth_rate(flow_jacobian(geom, f, kappa));
            CHECK(rate == doctest::Approx(rates[which]).epsilon(1e-6));

            FlowParams p;
            p.kappa = kappa;
            p.t1 = std::min(10.0, 12.0 / rate);
            const FlowTrajectory tr = integrate_flow(state(geom.alg, geom.g.g(), f), p);
            REQUIRE(tr.status == OdeStatus::Completed);
            CHECK(max_abs(tr.g.back() - geom.g.g()) <= 1e-10);
            CHECK(std::abs(tr.f.back() - f) <= 1e-10);
        }
    }
}

TEST_CASE("general and reduced right-hand sides agree on invariant data") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uf(-1.5, 1.5), uk(0.0, 2.0);
    for (const std::string& name : catalog_names()) {
        for (int trial = 0; trial < 5; ++trial) {
            const LieAlgebraData alg = catalog(name);
            const Mat g = random_spd(rng, 3);
            const double f = uf(rng), kappa = uk(rng);
            const GeometrySample smp = invariant_state_sample(alg, g, f);
            const Rhs3 r3 = rhs_3d(alg, g, f, kappa);
            const RhsGeneral rg = rhs_general(smp, kappa);
            CHECK(max_abs(rg.g_dot - r3.g_dot) <= 1e-10 * std::max(1.0, max_abs(r3.g_dot)));
            CHECK(rg.H_dot.max_abs() <= 1e-10);

            // second path: symmetric torsion Ricci tensor
            const Mat alt = -2.0 * symmetric_part(torsion_ricci(smp)) -
                            2.0 * kappa * r_circ_r(torsion_curvature(smp), smp.g);
            CHECK(max_abs(alt - r3.g_dot) <= 1e-10 * std::max(1.0, max_abs(r3.g_dot)));

            // ḟ keeps f√det g fixed
            CHECK(std::abs(r3.f_dot + 0.5 * trace(r3.g_dot, Metric(g)) * f) <= 1e-12 * std::max(1.0, std::abs(r3.f_dot)));
        }
    }
}

TEST_CASE("alternative H coefficient at kappa = 0") {
    std::mt19937_64 rng(5);
    const LieAlgebraData alg = catalog("su2");
    const Mat g = random_spd(rng, 3);
    const double f = 0.8;
    const GeometrySample smp = invariant_state_sample(alg, g, f);
    const Mat adopted = rhs_general(smp, 0.0, kAdoptedHCoefficient).g_dot;
    const Mat display = rhs_general(smp, 0.0, kAlternativeHCoefficient).g_dot;
    // H∘H = f²g for H = fν
    CHECK(max_abs(h_circ_h(smp.H, smp.g) - f * f * g) <= 1e-12);
    CHECK(max_abs(adopted - display - 0.5 * f * f * g) <= 1e-12);
    CHECK(max_abs(adopted + 2.0 * ricci(smp) - f * f * g) <= 1e-12);
    for (double kappa : {0.0, 0.7}) {
        const Rhs3 r = rhs_3d(alg, g, f, kappa, kAlternativeHCoefficient);
        CHECK(max_abs(r.g_dot - rhs_general(smp, kappa, kAlternativeHCoefficient).g_dot) <= 1e-10);
        CHECK(r.f_dot == doctest::Approx(-0.5 * trace(r.g_dot, Metric(g)) * f).epsilon(1e-12));
    }
}

TEST_CASE("dilaton right-hand side") {
    CHECK(dilaton_rhs(invariant_state_sample(catalog("r3"), Mat::Identity(3, 3), 0.0), 1.0) == 0.0);
    for (double kappa : {0.5, 2.0}) {
        const GeometrySample h = build_sample_invariant(hyperbolic_geometry(kappa));
        CHECK(std::abs(dilaton_rhs(h, kappa)) <= 1e-12);
    }

    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const Mat g = random_spd(rng, 3);
        const double f = 0.3 + 0.2 * trial, kappa = 0.1 * trial;
        const GeometrySample smp = invariant_state_sample(catalog("sl2r"), g, f);
        const double oracle = 0.5 * (f * f - kappa * norm_sq_oracle(torsion_curvature(smp), g));
        CHECK(dilaton_rhs(smp, kappa) == doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("bianchi residual") {
    std::mt19937_64 rng(3);
    SUBCASE("dimension 3") {
        const GeometrySample smp = invariant_state_sample(catalog("su2"), random_spd(rng, 3), 1.3);
        const Tensor b = bianchi_residual(smp, 2.0);
        CHECK(b.rank() == 4);
        CHECK(b.max_abs() == 0.0);
    }
    SUBCASE("dimension 4") {
        const LieAlgebraData alg = solvable4();
        CHECK(alg.jacobi_residual() <= 1e-14);
        for (int trial = 0; trial < 5; ++trial) {
            const Mat g = random_spd(rng, 4);
            InvariantGeometry geom(alg, Metric(g));
            const Tensor H = random_form(rng, 4, 3);
            geom.set_three_form(H);
            const GeometrySample smp = build_sample_invariant(geom);
            const double kappa = 0.7;
            const Tensor oracle = invariant_d3(alg, H) + kappa * wedge_oracle(torsion_curvature(smp), g);
            const Tensor b = bianchi_residual(smp, kappa);
            CHECK(max_abs_diff(b, oracle) <= 1e-10);
            CHECK(is_alternating(b, 1e-10));
            CHECK(b.max_abs() > 1e-3);
        }
    }
}

TEST_CASE("einstein homothety data follows the scalar reduction") {
    struct Case {
        LieAlgebraData alg;
        double s, kappa, mu, t1;
    };
    const Case cases[] = {
        {round_unit(), 1.0, 0.5, 0.8, 0.3},
        {round_unit(), 1.0, 0.1, 0.0, 0.4},
        {catalog("r3"), 0.0, 0.5, 1.0, 2.0},
        {hyperbolic_unit(), -1.0, 0.3, 0.4, 2.0},
        {hyperbolic_unit(), -1.0, 6.0, 0.0, 1.0},
    };
    for (const Case& c : cases) {
        const Mat gE = Mat::Identity(3, 3);
        CHECK(invariant_curvature(c.alg, Metric(gE)).s == doctest::Approx(c.s).epsilon(1e-14));
        const LaurentRhs F = exact_rhs(c.kappa, c.mu, c.s);

        // pointwise: ġ = (F(σ)/σ) g_E at σ g_E
        for (double sigma : {0.5, 1.0, 2.0}) {
            const Rhs3 r = rhs_3d(c.alg, sigma * gE, c.mu * std::pow(sigma, -1.5), c.kappa);
            CHECK(max_abs(r.g_dot - F(sigma) / sigma * gE) <= 1e-12 * std::max(1.0, std::abs(F(sigma))));
        }

        OdeOptions opt;
        opt.rtol = 1e-11;
        opt.atol = 1e-13;
        FlowParams p;
        p.kappa = c.kappa;
        p.t1 = c.t1;
        p.sample_dt = c.t1 / 20.0;
        p.ode = opt;
        const FlowTrajectory tr = integrate_flow(state(c.alg, gE, c.mu), p);
        REQUIRE(tr.status == OdeStatus::Completed);
        const HomothetyTrajectory ht = integrate(F, 1.0, 0.0, c.t1, opt, HomothetyEvents{}, p.sample_dt);
        REQUIRE(ht.status == OdeStatus::Completed);
        REQUIRE(ht.t.size() == tr.t.size());
        for (std::size_t i = 0; i < tr.t.size(); ++i) {
            CHECK(ht.t[i] == doctest::Approx(tr.t[i]).epsilon(1e-12));
            const double sigma = ht.sigma[i];
            CHECK(max_abs(tr.g[i] - sigma * gE) <= 1e-6 * sigma);
            CHECK(tr.f[i] == doctest::Approx(c.mu * std::pow(sigma, -1.5)).epsilon(1e-6));
            CHECK(homothety_factor(tr.g[i], gE) == doctest::Approx(sigma).epsilon(1e-6));
        }
    }
}

TEST_CASE("printed and exact reductions on flat data") {
    for (double kappa : {0.0, 0.4, 1.5})
        for (double mu : {0.0, 0.7, 1.3})
            for (double sigma : {0.6, 1.0, 1.7}) {
                const Rhs3 r = rhs_3d(catalog("r3"), sigma * Mat::Identity(3, 3), mu * std::pow(sigma, -1.5), kappa);
                const double rate = F_flat(kappa, mu, sigma) / sigma;
                CHECK(max_abs(r.g_dot - rate * Mat::Identity(3, 3)) <= 1e-12 * std::max(1.0, std::abs(rate)));
            }
}

TEST_CASE("su2 with zero dilaton is not homothetic") {
    const double kappa = 0.8;
    const LieAlgebraData alg = catalog("su2", kappa);
    const Mat I = Mat::Identity(3, 3);
    // at t = 0 the flow is homothetic with the rate of the closed form
    const Rhs3 r0 = rhs_3d(alg, I, 0.0, kappa);
    CHECK(max_abs(r0.g_dot + 8.0 / kappa * I) <= 1e-12);
    CHECK(su2_rhs(kappa)(1.0) == doctest::Approx(-8.0 / kappa));

    FlowParams p;
    p.kappa = kappa;
    p.t1 = 0.5 * su2_t_max(kappa);
    const FlowTrajectory tr = integrate_flow(state(alg, I, 0.0), p);
    REQUIRE(tr.status == OdeStatus::Completed);
    const Mat g = tr.g.back();
    const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(g).eigenvalues();
    CHECK((ev.maxCoeff() - ev.minCoeff()) / ev.maxCoeff() > 1e-3);
    CHECK(std::abs(homothety_factor(g, I) - su2_closed_form(kappa, p.t1)) > 1e-4);
}

TEST_CASE("scaling of the reduced right-hand side") {
    std::mt19937_64 rng(8);
    for (const std::string& name : catalog_names()) {
        const LieAlgebraData alg = catalog(name);
        const Mat g = random_spd(rng, 3);
        const double f = 0.9, kappa = 0.6;
        for (double lambda : {0.5, 3.0}) {
            const Rhs3 a = rhs_3d(alg, g, f, kappa);
            const Rhs3 b = rhs_3d(alg, lambda * g, f / std::sqrt(lambda), lambda * kappa);
            CHECK(max_abs(b.g_dot - a.g_dot) <= 1e-12 * std::max(1.0, max_abs(a.g_dot)));
            CHECK(b.f_dot == doctest::Approx(a.f_dot * std::pow(lambda, -1.5)).epsilon(1e-12));
        }
    }
    // without rescaling κ the right-hand side does change
    const Mat g = Mat::Identity(3, 3);
    const Rhs3 a = rhs_3d(catalog("su2"), g, 0.9, 0.6);
    const Rhs3 b = rhs_3d(catalog("su2"), 2.0 * g, 0.9 / std::sqrt(2.0), 0.6);
    CHECK(max_abs(b.g_dot - a.g_dot) > 1e-3);
}

TEST_CASE("f times the volume density is conserved along the flow") {
    std::mt19937_64 rng(13);
    for (const std::string& name : {"su2", "sl2r", "heisenberg", "hyperbolic"}) {
        const Mat g0 = random_spd(rng, 3);
        FlowParams p;
        p.kappa = 0.4;
        p.t1 = 0.2;
        p.sample_dt = 0.02;
        const FlowTrajectory tr = integrate_flow(state(catalog(name), g0, 0.7), p);
        REQUIRE(tr.status == OdeStatus::Completed);
        const double q0 = 0.7 * std::sqrt(g0.determinant());
        for (std::size_t i = 0; i < tr.t.size(); ++i)
            CHECK(tr.f[i] * std::sqrt(tr.g[i].determinant()) == doctest::Approx(q0).epsilon(1e-8));
    }
}

TEST_CASE("invalid flow input") {
    Mat bad = Mat::Identity(3, 3);
    bad(2, 2) = -1.0;
    CHECK_THROWS_AS(rhs_3d(catalog("su2"), bad, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(rhs_3d(solvable4(), Mat::Identity(4, 4), 1.0, 1.0), std::invalid_argument);
    Mat nan = Mat::Identity(3, 3);
    nan(0, 1) = nan(1, 0) = std::nan("");
    CHECK_THROWS_AS(rhs_3d(catalog("su2"), nan, 1.0, 1.0), std::invalid_argument);
    FlowParams p;
    p.kappa = -1.0;
    CHECK_THROWS_AS(integrate_flow(state(catalog("su2"), Mat::Identity(3, 3), 0.0), p), std::invalid_argument);
}

TEST_CASE("singular flows stop") {
    // the su2 flow with zero dilaton becomes singular before the homothetic collapse time
    const double kappa = 0.8;
    FlowParams p;
    p.kappa = kappa;
    p.t1 = 10.0;
    const FlowTrajectory tr = integrate_flow(state(catalog("su2", kappa), Mat::Identity(3, 3), 0.0), p);
    CHECK(tr.status == OdeStatus::StepUnderflow);
    CHECK(tr.t.back() < su2_t_max(kappa));
    const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(tr.g.back()).eigenvalues();
    CHECK(ev.minCoeff() < 1e-2);

    // a flow reaching the threshold reports the event
    FlowParams q = p;
    q.degenerate_tol = 0.5;
    const FlowTrajectory tq = integrate_flow(state(catalog("su2", kappa), Mat::Identity(3, 3), 0.0), q);
    CHECK(tq.status == OdeStatus::Event);
    CHECK(tq.event == "degenerate");
    CHECK(Eigen::SelfAdjointEigenSolver<Mat>(tq.g.back()).eigenvalues().minCoeff() == doctest::Approx(0.5).epsilon(1e-8));
}
