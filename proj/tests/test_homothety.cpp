#include "hetflow/homothety.hpp"

#include <doctest.h>
#include <unsupported/Eigen/Polynomials>

#include <cmath>
#include <random>

using namespace hetflow;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

/// Five-point central difference.
template <class Fn>
double derivative5(Fn f, double t, double h) {
    return (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h);
}

OdeOptions tight() {
    OdeOptions o;
    o.rtol = 1e-12;
    o.atol = 1e-14;
    return o;
}

}  // namespace

TEST_CASE("printed right-hand sides") {
    CHECK(F_p(1.0, 1.0, 1.0) == doctest::Approx(-37.0 / 36.0).epsilon(1e-15));
    CHECK(std::abs(F_n(6.0, 0.0, 1.0)) <= 1e-15);
    CHECK(F_flat(2.0, 1.0, 1.0) == doctest::Approx(1.0 - 0.5).epsilon(1e-15));
    CHECK_THROWS_AS(F_p(1.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(F_n(1.0, 1.0, -1.0), std::invalid_argument);

    // derivative against a difference quotient
    for (double y : {0.3, 1.0, 2.5}) {
        const double fd = derivative5([](double x) { return F_general(0.7, 1.3, 1.0, x); }, y, 1e-4 * y);
        CHECK(dF_general_dy(0.7, 1.3, 1.0, y) == doctest::Approx(fd).epsilon(1e-8));
    }
}

TEST_CASE("exact and printed reductions agree when flat or kappa = 0") {
    for (double mu : {0.0, 0.4, 1.7}) {
        const LaurentRhs a = printed_rhs(0.9, mu, 0.0), b = exact_rhs(0.9, mu, 0.0);
        for (int i = 0; i < 6; ++i) CHECK(a.c[i] == doctest::Approx(b.c[i]));
        for (double s : {-1.0, 1.0, 2.5}) {
            const LaurentRhs p = printed_rhs(0.0, mu, s), e = exact_rhs(0.0, mu, s);
            for (int i = 0; i < 6; ++i) CHECK(p.c[i] == doctest::Approx(e.c[i]));
        }
    }
    // they differ otherwise
    CHECK(std::abs(printed_rhs(1.0, 1.0, 1.0)(1.0) - exact_rhs(1.0, 1.0, 1.0)(1.0)) > 0.1);
}

TEST_CASE("static curves") {
    CHECK(kappa_crit_p(std::sqrt(2.0 / 3.0)) == doctest::Approx(0.0));
    CHECK(kappa_crit_p(1.0) == doctest::Approx(12.0 / 49.0).epsilon(1e-15));
    CHECK(kappa_crit_n(0.0) == 6.0);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(std::sqrt(2.0 / 3.0), 3.0);
    for (int i = 0; i < 20; ++i) {
        const double mu = U(rng);
        CHECK(std::abs(F_p(kappa_crit_p(mu), mu, 1.0)) <= 1e-12);
    }
    // no admissible static point inside the negative band
    for (double x : {0.5, 1.0, 2.0, 3.5}) {
        if (x > mu_sq_minus() && x < mu_sq_plus()) CHECK(kappa_crit_n(std::sqrt(x)) < 0.0);
    }
    CHECK(std::abs(kappa_crit_n(std::sqrt(mu_sq_minus()))) > 1e12);
    const double x = mu_sq_plus();
    CHECK(std::abs(9 * x * (x - 4) + 4) <= 1e-12);
}

TEST_CASE("threshold cubic") {
    const double x = mu_threshold_cubic();
    CHECK(x > 1.5);
    CHECK(x < 1.6);
    CHECK(std::abs(threshold_cubic(x)) <= 1e-10);
    CHECK(threshold_cubic(1.5) < 0.0);
    CHECK(threshold_cubic(1.6) > 0.0);

    Eigen::VectorXd c(4);
    c << -8, -68, 6, 27;
    Eigen::PolynomialSolver<double, 3> solver;
    solver.compute(c);
    int positive = 0;
    for (const auto& z : solver.roots())
        if (std::abs(z.imag()) < 1e-9 && z.real() > 0) ++positive;
    CHECK(positive == 1);
}

TEST_CASE("kappa0 double root") {
    for (double mu : {0.5, 1.0, 1.2}) {
        const Kappa0Result r = kappa0(mu);
        REQUIRE(r.ok);
        CHECK(r.residual_F <= 1e-10);
        CHECK(r.residual_dF <= 1e-10);
        CHECK(r.y0 > 0.0);
        CHECK(r.y0 < 1.0);
        CHECK(r.kappa0 > std::max(0.0, kappa_crit_p(mu)));

        const Behavior below = classify(HomothetyCase::Positive, r.kappa0 * (1 - 1e-3), mu);
        const Behavior above = classify(HomothetyCase::Positive, r.kappa0 * (1 + 1e-3), mu);
        CHECK(below.tag == BehaviorTag::EternalPastDivergentFutureFinite);
        CHECK(above.tag == BehaviorTag::FiniteTimeCollapse);
    }
    // above the cubic threshold the band is empty
    const Kappa0Result none = kappa0(1.5);
    CHECK_FALSE(none.ok);
    CHECK_FALSE(none.error.empty());
}

TEST_CASE("lambert w") {
    CHECK(lambert_w(0.0) == 0.0);
    CHECK(lambert_w(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(lambert_w(-std::exp(-1.0)) == doctest::Approx(-1.0).epsilon(1e-7));
    CHECK(lambert_w(-std::exp(-1.0), -1) == doctest::Approx(-1.0).epsilon(1e-7));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-0.36, 50.0);
    for (int i = 0; i < 50; ++i) {
        const double x = U(rng);
        const double w = lambert_w(x);
        CHECK(std::abs(w * std::exp(w) - x) <= 1e-14 * std::max(1.0, std::abs(x)));
        if (x < 0.0) {
            const double wm = lambert_w(x, -1);
            CHECK(wm <= -1.0);
            CHECK(std::abs(wm * std::exp(wm) - x) <= 1e-14);
        }
    }
    CHECK_THROWS_AS(lambert_w(-0.5), std::domain_error);
    CHECK_THROWS_AS(lambert_w(0.5, -1), std::domain_error);
    CHECK_THROWS_AS(lambert_w(1.0, 2), std::domain_error);
}

TEST_CASE("flat closed form") {
    for (double t : {-3.0, 0.0, 2.0}) CHECK(flat_closed_form(4.0, 1.0, t) == 1.0);
    CHECK(flat_closed_form(0.0, 1.0, 2.0) == doctest::Approx(std::cbrt(7.0)));
    CHECK(flat_domain(0.0, 1.0).lo == doctest::Approx(-1.0 / 3.0));
    CHECK_THROWS_AS(flat_closed_form(0.0, 1.0, -0.5), std::domain_error);
    CHECK(flat_closed_form(1.0, 0.0, 5.0) == 1.0);

    // b > 0
    CHECK(flat_closed_form(1.0, 1.0, -200.0) == doctest::Approx(std::cbrt(0.25)).epsilon(1e-12));
    CHECK(flat_closed_form(1.0, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(flat_closed_form(1.0, 1.0, 1e4) > 10.0);
    // b < 0
    const double ts = flat_collapse_time(2.0, 2.0);
    CHECK(flat_domain(2.0, 2.0).hi == ts);
    CHECK(flat_closed_form(2.0, 2.0, ts) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(flat_closed_form(2.0, 2.0, -300.0) == doctest::Approx(std::cbrt(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(flat_closed_form(2.0, 2.0, ts + 0.1), std::domain_error);

    // σσ′ = F_flat(σ)
    for (auto [kappa, mu] : {std::pair{1.0, 1.0}, std::pair{2.0, 2.0}, std::pair{0.3, 0.7}}) {
        const TimeDomain dom = flat_domain(kappa, mu);
        for (double t : {-1.0, -0.2, 0.0, 0.3}) {
            if (t >= dom.hi - 0.05) continue;
            auto sig = [&](double x) { return flat_closed_form(kappa, mu, x); };
            const double s = sig(t);
            CHECK(s * derivative5(sig, t, 1e-3) == doctest::Approx(F_flat(kappa, mu, s)).epsilon(1e-8));
        }
    }
}

TEST_CASE("su2 closed form") {
    const double kappa = 1.3;
    CHECK(su2_closed_form(kappa, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(su2_closed_form(kappa, -200.0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(std::abs(su2_closed_form(kappa, su2_t_max(kappa))) <= 1e-6);
    CHECK_THROWS_AS(su2_closed_form(kappa, su2_t_max(kappa) + 0.01), std::domain_error);

    const LaurentRhs F = su2_rhs(kappa);
    auto sig = [&](double x) { return su2_closed_form(kappa, x); };
    const double lo = -5.0 * kappa, hi = su2_t_max(kappa) - 0.05 * kappa;
    for (int i = 0; i < 100; ++i) {
        const double t = lo + (hi - lo) * i / 99.0;
        const double s = sig(t);
        // σ′ = 4W/(κ(1 + W)) with W the Lambert argument of the closed form
        const double W = lambert_w(-(2.0 / 3.0) * std::exp((2.0 / 3.0) * (2.0 * t / kappa - 1.0)));
        const double ds = 4.0 * W / (kappa * (1.0 + W));
        CHECK(s == doctest::Approx(3.0 + 3.0 * W).epsilon(1e-14));
        CHECK(std::abs(s * ds - F(s)) <= 1e-9 * std::max(1.0, std::abs(F(s))));
    }
}

TEST_CASE("laurent roots") {
    const LaurentRhs F = su2_rhs(2.0);
    REQUIRE(F.positive_roots().size() == 1);
    CHECK(F.positive_roots()[0] == doctest::Approx(3.0));
    CHECK(F.pole_order() == 0);
    CHECK(printed_rhs(1.0, 1.0, 1.0).pole_order() == 4);
    CHECK(printed_rhs(0.0, 1.0, 1.0).pole_order() == 1);

    const LaurentRhs P = printed_rhs(0.1, 1.0, 1.0);
    for (double r : P.positive_roots()) CHECK(std::abs(P(r)) <= 1e-10);
}

TEST_CASE("integrator against closed forms") {
    SUBCASE("flat, b > 0") {
        const double kappa = 1.0, mu = 1.0;
        const auto tr = integrate(make_problem(HomothetyCase::Flat, kappa, mu), 0.0, 5.0, tight(), {}, 0.05);
        CHECK(tr.status == OdeStatus::Completed);
        double worst = 0.0;
        for (std::size_t i = 0; i < tr.t.size(); ++i)
            worst = std::max(worst, rel_err(tr.sigma[i], flat_closed_form(kappa, mu, tr.t[i])));
        CHECK(worst <= 1e-6);
    }
    SUBCASE("flat, b < 0 collapses at t*") {
        const double kappa = 2.0, mu = 2.0;
        const auto tr = integrate(make_problem(HomothetyCase::Flat, kappa, mu), 0.0, 10.0, tight(), {}, 0.01);
        REQUIRE(tr.status == OdeStatus::Event);
        CHECK(tr.event == "collapse");
        CHECK(rel_err(tr.t_end, flat_collapse_time(kappa, mu)) <= 1e-6);
    }
    SUBCASE("su2 collapse at t_max") {
        const double kappa = 0.8;
        const auto tr = integrate(su2_rhs(kappa), 1.0, 0.0, 10.0, tight());
        REQUIRE(tr.status == OdeStatus::Event);
        CHECK(tr.event == "collapse");
        CHECK(rel_err(tr.t_end, su2_t_max(kappa)) <= 1e-6);
    }
    SUBCASE("static") {
        const auto tr = integrate(make_problem(HomothetyCase::Negative, 6.0, 0.0), 0.0, 20.0, tight(), {}, 1.0);
        CHECK(tr.status == OdeStatus::Completed);
        for (double s : tr.sigma) CHECK(std::abs(s - 1.0) <= 1e-12);
    }
    SUBCASE("backwards in time") {
        const auto tr = integrate(make_problem(HomothetyCase::Flat, 0.0, 1.0), 0.0, -1.0, tight());
        REQUIRE(tr.status == OdeStatus::Event);
        CHECK(tr.event == "collapse");
        CHECK(tr.t_end == doctest::Approx(-1.0 / 3.0).epsilon(1e-6));
    }
}

TEST_CASE("classification examples") {
    const Behavior reg = classify(HomothetyCase::Positive, 0.1, 1.0);
    CHECK(reg.tag == BehaviorTag::EternalRegular);
    REQUIRE(reg.sigma_minus_inf);
    REQUIRE(reg.sigma_plus_inf);
    CHECK(*reg.sigma_minus_inf > 0.0);
    CHECK(*reg.sigma_minus_inf < 1.0);
    CHECK(*reg.sigma_plus_inf > 1.0);
    CHECK(std::isfinite(*reg.sigma_plus_inf));

    CHECK(classify(HomothetyCase::Negative, 7.0, 0.0).tag == BehaviorTag::FiniteTimeCollapse);
    CHECK(classify(HomothetyCase::Negative, 6.0, 0.0).tag == BehaviorTag::Static);
    CHECK(classify(HomothetyCase::Negative, 5.0, 0.0).tag == BehaviorTag::EternalPastFiniteFutureDivergent);

    const Behavior lin = classify(HomothetyCase::Positive, 0.0, 0.0);
    CHECK(lin.tag == BehaviorTag::Linear);
    REQUIRE(lin.collapse_time);
    CHECK(*lin.collapse_time == doctest::Approx(1.5));
    CHECK(classify(HomothetyCase::Flat, 0.0, 0.0).tag == BehaviorTag::Static);

    const double x = mu_threshold_cubic();
    CHECK(classify(HomothetyCase::Positive, 2.0, std::sqrt(x)).tag == BehaviorTag::Unresolved);

    // tags are exclusive and limits present iff finite
    const Behavior col = classify(HomothetyCase::Flat, 2.0, 2.0);
    CHECK(col.tag == BehaviorTag::FiniteTimeCollapse);
    REQUIRE(col.collapse_time);
    CHECK(*col.collapse_time == doctest::Approx(flat_collapse_time(2.0, 2.0)).epsilon(1e-8));
    REQUIRE(col.sigma_minus_inf);
    CHECK(*col.sigma_minus_inf == doctest::Approx(std::cbrt(2.0)));
    CHECK_FALSE(col.sigma_plus_inf);
}

TEST_CASE("classification agrees with integration on grids") {
    for (HomothetyCase c : {HomothetyCase::Positive, HomothetyCase::Flat, HomothetyCase::Negative}) {
        int disagreements = 0;
        for (int i = 0; i < 20; ++i)
            for (int j = 0; j < 20; ++j) {
                const double kappa = 0.025 + 0.05 * i, mu = 0.05 + 0.1 * j;
                const HomothetyProblem p = make_problem(c, kappa, mu);
                const Behavior a = classify(p);
                const Behavior b = classify_by_integration(p.rhs(), 1.0);
                if (a.tag == BehaviorTag::Unresolved) continue;
                if (a.tag != b.tag) {
                    ++disagreements;
                    MESSAGE(std::string(to_string(c)) << " kappa=" << kappa << " mu=" << mu << " " << std::string(to_string(a.tag)) << " vs "
                                         << std::string(to_string(b.tag)));
                }
                if (a.tag == BehaviorTag::FiniteTimeCollapse && b.collapse_time)
                    CHECK(*a.collapse_time == doctest::Approx(*b.collapse_time).epsilon(1e-6));
            }
        CHECK(disagreements == 0);
    }
}

TEST_CASE("trajectories are monotone") {
    for (auto [kappa, mu] : {std::pair{0.1, 1.0}, std::pair{0.5, 0.3}, std::pair{0.9, 1.9}}) {
        const auto tr = integrate(make_problem(HomothetyCase::Negative, kappa, mu), 0.0, 30.0);
        const double d0 = tr.sigma[1] - tr.sigma[0];
        for (std::size_t i = 1; i < tr.sigma.size(); ++i) CHECK((tr.sigma[i] - tr.sigma[i - 1]) * d0 >= 0.0);
    }
}

TEST_CASE("halving the tolerance stays within the error estimate") {
    OdeOptions a;
    a.rtol = 1e-8;
    a.atol = 1e-10;
    OdeOptions b = a;
    b.rtol /= 2;
    b.atol /= 2;
    for (auto [kappa, mu] : {std::pair{0.1, 1.0}, std::pair{0.2, 0.5}}) {
        const HomothetyProblem p = make_problem(HomothetyCase::Positive, kappa, mu);
        const auto ta = integrate(p, 0.0, 3.0, a);
        const auto tb = integrate(p, 0.0, 3.0, b);
        CHECK(std::abs(ta.sigma_end - tb.sigma_end) <= ta.error_bound);
    }
}

TEST_CASE("homothety consistency of the initial metric") {
    const double kappa = 0.6;
    const LieAlgebraData su2 = catalog("su2", kappa);
    const ConsistencyReport r = check_homothety_consistency(su2, Metric(Mat::Identity(3, 3)), kappa, 0.0);
    CHECK(r.pass);
    CHECK_FALSE(r.einstein);
    CHECK(std::abs(r.s) <= 1e-12);
    for (double ps : r.pair_sums) CHECK(ps == doctest::Approx(1.0 / kappa));
    CHECK_FALSE(check_homothety_consistency(su2, Metric(Mat::Identity(3, 3)), kappa, 0.5).pass);

    const LieAlgebraData round = milnor_algebra(1.0, 1.0, 1.0, "round");
    CHECK(check_homothety_consistency(round, Metric(Mat::Identity(3, 3)), kappa, 0.7).einstein);
    CHECK(check_homothety_consistency(round, Metric(Mat::Identity(3, 3)), kappa, 0.7).pass);

    std::mt19937_64 rng(4);
    const Metric g(random_spd(rng, 3, 0.5, 2.0));
    const ConsistencyReport bad = check_homothety_consistency(round, g, kappa, 0.0);
    CHECK(std::abs(bad.s) > 1e-3);
    CHECK_FALSE(bad.pass);
}

TEST_CASE("invalid problems") {
    CHECK_THROWS_AS(make_problem(HomothetyCase::Positive, -1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_problem(HomothetyCase::Positive, 1.0, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(parse_homothety_case("sideways"), std::invalid_argument);
    CHECK(parse_homothety_case("negative") == HomothetyCase::Negative);
}

TEST_CASE("sweeps") {
    SweepGrid grid;
    grid.kappa_lo = 4.0;
    grid.kappa_hi = 8.0;
    grid.n_kappa = 9;
    grid.mu_hi = 1.0;
    grid.n_mu = 5;
    const auto one = sweep(HomothetyCase::Negative, grid, 1);
    const auto four = sweep(HomothetyCase::Negative, grid, 4, true);
    REQUIRE(one.size() == 45);
    REQUIRE(four.size() == 45);
    for (std::size_t k = 0; k < one.size(); ++k) {
        CHECK(one[k].i == four[k].i);
        CHECK(one[k].j == four[k].j);
        CHECK(one[k].behavior.tag == four[k].behavior.tag);
        CHECK(static_cast<int>(k) == one[k].j * grid.n_kappa + one[k].i);
        REQUIRE(four[k].integrated);
        CHECK(tags_agree(four[k].behavior.tag, *four[k].integrated));
        CHECK_FALSE(one[k].integrated);
    }
    // μ = 0 row splits at κ = 6
    CHECK(one[0].behavior.tag == BehaviorTag::EternalPastFiniteFutureDivergent);
    CHECK(one[4].kappa == 6.0);
    CHECK(one[4].behavior.tag == BehaviorTag::Static);
    CHECK(one[8].behavior.tag == BehaviorTag::FiniteTimeCollapse);

    SweepGrid bad = grid;
    bad.kappa_hi = 1.0;
    CHECK_THROWS_AS(sweep(HomothetyCase::Flat, bad), std::invalid_argument);
    bad = grid;
    bad.n_mu = 1;
    CHECK_THROWS_AS(sweep(HomothetyCase::Flat, bad), std::invalid_argument);
    CHECK(tags_agree(BehaviorTag::Linear, BehaviorTag::FiniteTimeCollapse));
    CHECK_FALSE(tags_agree(BehaviorTag::Linear, BehaviorTag::Static));
    CHECK(tags_agree(BehaviorTag::Unresolved, BehaviorTag::Static));
    CHECK_FALSE(tags_agree(BehaviorTag::Static, BehaviorTag::EternalRegular));
    bad = grid;
    bad.mu_lo = NAN;
    CHECK_THROWS_AS(sweep(HomothetyCase::Flat, bad), std::invalid_argument);
}
