#include "hetflow/homothety.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/lambert_w.hpp>
#include <boost/math/tools/roots.hpp>
#include <unsupported/Eigen/Polynomials>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace hetflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double y) {
    if (!(y > 0.0) || !std::isfinite(y)) throw std::invalid_argument("homothety: y must be positive and finite");
}

/// σᵐF(σ) as a polynomial in σ, m = pole order.
double shifted(const LaurentRhs& F, int m, double y) {
    double acc = 0.0;
    for (int p = 1; p >= -m; --p) acc = acc * y + F.c[p + 4];
    return acc;
}

double sign_root(double v, int k) { return std::copysign(std::pow(std::abs(v), 1.0 / k), v); }

/// W₀(e^L) for large L without overflow.
double lambert_w0_of_exp(double L) {
    if (L < 700.0) return boost::math::lambert_w0(std::exp(L));
    double w = L - std::log(L);
    for (int i = 0; i < 50; ++i) {
        const double step = (w + std::log(w) - L) / (1.0 + 1.0 / w);
        w -= step;
        if (std::abs(step) <= 1e-16 * w) break;
    }
    return w;
}

}  // namespace

// ---- Laurent right-hand sides -------------------------------------------------

double LaurentRhs::operator()(double y) const {
    double acc = 0.0;
    for (int p = -4; p <= 1; ++p)
        if (c[p + 4] != 0.0) acc += c[p + 4] * std::pow(y, p);
    return acc;
}

double LaurentRhs::derivative(double y) const {
    double acc = 0.0;
    for (int p = -4; p <= 1; ++p)
        if (c[p + 4] != 0.0 && p != 0) acc += p * c[p + 4] * std::pow(y, p - 1);
    return acc;
}

double LaurentRhs::term_scale(double y) const {
    double m = 0.0;
    for (int p = -4; p <= 1; ++p) m = std::max(m, std::abs(c[p + 4] * std::pow(y, p)));
    return m;
}

int LaurentRhs::pole_order() const {
    for (int m = 4; m >= 1; --m)
        if (c[4 - m] != 0.0) return m;
    return 0;
}

std::vector<double> LaurentRhs::positive_roots() const {
    // y⁴F(y) has ascending coefficients c[0..5]
    int deg = 5;
    while (deg >= 0 && c[deg] == 0.0) --deg;
    std::vector<double> out;
    if (deg <= 0) return out;
    int low = 0;
    while (c[low] == 0.0) ++low;  // y = 0 roots are not positive
    const int d = deg - low;
    if (d == 0) return out;
    Eigen::VectorXd coeffs(d + 1);
    for (int i = 0; i <= d; ++i) coeffs(i) = c[low + i];
    auto P = [&](double y) {
        double v = 0.0, dv = 0.0;
        for (int i = d; i >= 0; --i) {
            dv = dv * y + v;
            v = v * y + coeffs(i);
        }
        return std::pair{v, dv};
    };
    if (d == 1) {
        const double r = -coeffs(0) / coeffs(1);
        if (r > 0.0) out.push_back(r);
        return out;
    }
    Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
    solver.compute(coeffs);
    for (const auto& z : solver.roots()) {
        if (std::abs(z.imag()) > 1e-6 * std::max(1.0, std::abs(z)) || z.real() <= 0.0) continue;
        double y = z.real();
        for (int it = 0; it < 8; ++it) {
            const auto [v, dv] = P(y);
            if (dv == 0.0) break;
            const double ny = y - v / dv;
            if (!(ny > 0.0) || std::abs(ny - y) > 1e-3 * y) break;
            y = ny;
        }
        out.push_back(y);
    }
    std::sort(out.begin(), out.end());
    std::vector<double> unique;
    for (double r : out)
        if (unique.empty() || r - unique.back() > 1e-9 * std::max(1.0, r)) unique.push_back(r);
    return unique;
}

// ---- printed reductions -------------------------------------------------------

const char* to_string(HomothetyCase c) {
    switch (c) {
        case HomothetyCase::Positive: return "positive";
        case HomothetyCase::Flat: return "flat";
        case HomothetyCase::Negative: return "negative";
    }
    return "unknown";
}

HomothetyCase parse_homothety_case(const std::string& s) {
    if (s == "positive") return HomothetyCase::Positive;
    if (s == "flat") return HomothetyCase::Flat;
    if (s == "negative") return HomothetyCase::Negative;
    throw std::invalid_argument("unknown homothety case '" + s + "' (positive, flat, negative)");
}

double normalized_scalar(HomothetyCase c) {
    switch (c) {
        case HomothetyCase::Positive: return 1.0;
        case HomothetyCase::Flat: return 0.0;
        case HomothetyCase::Negative: return -1.0;
    }
    return 0.0;
}

LaurentRhs printed_rhs(double kappa, double mu, double s) {
    const double m2 = mu * mu;
    LaurentRhs F;
    F.c[5] = (2.0 * kappa * s / 3.0 - 2.0) * s / 3.0;
    F.c[4] = -kappa * s * s / 3.0;
    F.c[3] = m2;
    F.c[2] = -kappa * s * m2;
    F.c[0] = -kappa * m2 * m2 / 4.0;
    return F;
}

LaurentRhs exact_rhs(double kappa, double mu, double s) {
    const double m2 = mu * mu;
    LaurentRhs F;
    F.c[5] = -2.0 * s / 3.0;
    F.c[4] = -kappa * s * s / 9.0;
    F.c[3] = m2;
    F.c[2] = kappa * s * m2 / 3.0;
    F.c[0] = -kappa * m2 * m2 / 4.0;
    return F;
}

LaurentRhs su2_rhs(double kappa) {
    if (!(kappa > 0.0)) throw std::invalid_argument("su2_rhs: kappa must be positive");
    LaurentRhs F;
    F.c[5] = 4.0 / kappa;
    F.c[4] = -12.0 / kappa;
    return F;
}

double F_general(double kappa, double mu, double s, double y) {
    require_positive(y);
    return printed_rhs(kappa, mu, s)(y);
}

double F_p(double kappa, double mu, double y) { return F_general(kappa, mu, 1.0, y); }
double F_flat(double kappa, double mu, double y) { return F_general(kappa, mu, 0.0, y); }
double F_n(double kappa, double mu, double y) { return F_general(kappa, mu, -1.0, y); }

double dF_general_dy(double kappa, double mu, double s, double y) {
    require_positive(y);
    return printed_rhs(kappa, mu, s).derivative(y);
}

double kappa_crit_p(double mu) {
    const double m2 = mu * mu;
    return (36.0 * m2 - 24.0) / (9.0 * m2 * (m2 + 4.0) + 4.0);
}

double kappa_crit_n(double mu) {
    const double m2 = mu * mu;
    const double den = 9.0 * m2 * (m2 - 4.0) + 4.0;
    const double num = 36.0 * m2 + 24.0;
    if (den == 0.0) return kInf;
    return num / den;
}

double mu_sq_minus() { return 2.0 / 3.0 * (3.0 - 2.0 * std::sqrt(2.0)); }
double mu_sq_plus() { return 2.0 / 3.0 * (3.0 + 2.0 * std::sqrt(2.0)); }

double threshold_cubic(double x) { return ((27.0 * x + 6.0) * x - 68.0) * x - 8.0; }

double mu_threshold_cubic() {
    double hi = 1.0;
    while (threshold_cubic(hi) <= 0.0) hi *= 2.0;
    auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-12; };
    const auto [lo_r, hi_r] = boost::math::tools::bisect(threshold_cubic, 0.0, hi, tol);
    return 0.5 * (lo_r + hi_r);
}

Kappa0Result kappa0(double mu) {
    // F_p = A + κB
    const double m2 = mu * mu;
    auto A = [&](double y) { return -2.0 * y / 3.0 + m2 / y; };
    auto B = [&](double y) { return 2.0 * y / 9.0 - 1.0 / 3.0 - m2 / (y * y) - m2 * m2 / (4.0 * std::pow(y, 4)); };
    auto dA = [&](double y) { return -2.0 / 3.0 - m2 / (y * y); };
    auto dB = [&](double y) { return 2.0 / 9.0 + 2.0 * m2 / std::pow(y, 3) + m2 * m2 / std::pow(y, 5); };
    auto ddA = [&](double y) { return 2.0 * m2 / std::pow(y, 3); };
    auto ddB = [&](double y) { return -6.0 * m2 / std::pow(y, 4) - 5.0 * m2 * m2 / std::pow(y, 6); };
    auto kappa_of = [&](double y) { return -A(y) / B(y); };

    Kappa0Result r;
    constexpr int kGrid = 981;
    int best = 0;
    double best_k = -kInf;
    for (int i = 0; i < kGrid; ++i) {
        const double y = 0.01 + 0.001 * i;
        const double k = kappa_of(y);
        if (k > best_k) {
            best_k = k;
            best = i;
        }
    }
    if (best == 0 || best == kGrid - 1 || !(best_k > 0.0)) {
        r.error = "no double root of F_p with y0 in (0,1)";
        return r;
    }
    auto h = [&](double y) {
        return std::pair{dA(y) * B(y) - A(y) * dB(y), ddA(y) * B(y) - A(y) * ddB(y)};
    };
    const double lo = 0.01 + 0.001 * (best - 1), hi = 0.01 + 0.001 * (best + 1);
    std::uintmax_t iters = 100;
    const double y0 = boost::math::tools::newton_raphson_iterate(h, 0.01 + 0.001 * best, lo, hi, 50, iters);
    r.y0 = y0;
    r.kappa0 = kappa_of(y0);
    r.residual_F = std::abs(F_p(r.kappa0, mu, y0));
    r.residual_dF = std::abs(dF_general_dy(r.kappa0, mu, 1.0, y0));
    r.ok = r.residual_F <= 1e-10 && r.residual_dF <= 1e-10 && y0 > 0.0 && y0 < 1.0;
    if (!r.ok) r.error = "Newton did not reach the residual tolerance";
    return r;
}

// ---- closed forms ---------------------------------------------------------------

double lambert_w(double x, int branch) {
    const double branch_point = -std::exp(-1.0);
    if (!std::isfinite(x)) throw std::domain_error("lambert_w: argument must be finite");
    if (x < branch_point) throw std::domain_error("lambert_w: argument below -1/e");
    if (branch == 0) return boost::math::lambert_w0(x);
    if (branch == -1) {
        if (x >= 0.0) throw std::domain_error("lambert_w: branch -1 needs x < 0");
        return boost::math::lambert_wm1(x);
    }
    throw std::domain_error("lambert_w: branch must be 0 or -1");
}

TimeDomain flat_domain(double kappa, double mu) {
    if (mu == 0.0) return {-kInf, kInf};
    if (kappa == 0.0) return {-1.0 / (3.0 * mu * mu), kInf};
    const double b = 4.0 / (kappa * mu * mu) - 1.0;
    if (b >= 0.0) return {-kInf, kInf};
    return {-kInf, flat_collapse_time(kappa, mu)};
}

double flat_collapse_time(double kappa, double mu) {
    const double b = 4.0 / (kappa * mu * mu) - 1.0;
    if (!(b < 0.0)) throw std::domain_error("flat_collapse_time: needs b < 0");
    return -kappa / 12.0 * (1.0 + b + std::log(-b));
}

double flat_closed_form(double kappa, double mu, double t) {
    if (kappa < 0.0) throw std::domain_error("flat_closed_form: kappa must be non-negative");
    if (mu == 0.0) return 1.0;
    const double m2 = mu * mu;
    if (kappa == 0.0) {
        const double base = 1.0 + 3.0 * t * m2;
        if (!(base > 0.0)) throw std::domain_error("flat_closed_form: t before the past collapse");
        return std::cbrt(base);
    }
    const double b = 4.0 / (kappa * m2) - 1.0;
    if (b == 0.0) return 1.0;
    const double scale = std::cbrt(kappa * m2 / 4.0);
    const double L = 12.0 * t / kappa + b;
    double w;
    if (b > 0.0) {
        w = lambert_w0_of_exp(std::log(b) + L);
    } else {
        if (t > flat_collapse_time(kappa, mu)) throw std::domain_error("flat_closed_form: t beyond collapse");
        w = lambert_w(std::max(b * std::exp(L), -std::exp(-1.0)), 0);
    }
    return scale * std::cbrt(1.0 + w);
}

double su2_t_max(double kappa) { return kappa / 4.0 * (std::log(27.0 / 8.0) - 1.0); }

double su2_closed_form(double kappa, double t) {
    if (!(kappa > 0.0)) throw std::domain_error("su2_closed_form: kappa must be positive");
    const double t_max = su2_t_max(kappa);
    if (t > t_max + 1e-12 * std::max(1.0, std::abs(t_max))) throw std::domain_error("su2_closed_form: t beyond t_max");
    const double z = -2.0 / 3.0 * std::exp(2.0 / 3.0 * (2.0 * t / kappa - 1.0));
    return 3.0 + 3.0 * lambert_w(std::max(z, -std::exp(-1.0)), 0);
}

// ---- problems and integration ----------------------------------------------------

LaurentRhs HomothetyProblem::rhs() const {
    return model == HomothetyModel::Printed ? printed_rhs(kappa, mu, s) : exact_rhs(kappa, mu, s);
}

void HomothetyProblem::validate() const {
    if (!std::isfinite(kappa) || !std::isfinite(mu) || !std::isfinite(s) || !std::isfinite(sigma0))
        throw std::invalid_argument("homothety problem: non-finite parameter");
    if (kappa < 0.0) throw std::invalid_argument("homothety problem: kappa must be non-negative");
    if (!(sigma0 > 0.0)) throw std::invalid_argument("homothety problem: sigma0 must be positive");
}

HomothetyProblem make_problem(HomothetyCase c, double kappa, double mu, double sigma0) {
    HomothetyProblem p;
    p.kappa = kappa;
    p.mu = mu;
    p.s = normalized_scalar(c);
    p.sigma0 = sigma0;
    p.validate();
    return p;
}

HomothetyTrajectory integrate(const LaurentRhs& F, double sigma0, double t0, double t1, const OdeOptions& opt,
                              const HomothetyEvents& ev, double sample_dt) {
    require_positive(sigma0);
    const int m = F.pole_order();
    const int k = 2 + m;
    auto sigma_of = [k](const OdeState& x) { return sign_root(x[0], k); };
    OdeRhs rhs = [&F, m, k, sigma_of](const OdeState& x, OdeState& dx, double) {
        dx[0] = k * shifted(F, m, sigma_of(x));
    };
    std::vector<OdeEvent> events;
    events.push_back({"collapse", [&](double, const OdeState& x) { return sigma_of(x) - ev.collapse; }});
    events.push_back({"divergence", [&](double, const OdeState& x) { return ev.divergence - sigma_of(x); }});
    if (ev.detect_stall)
        events.push_back({"stall", [&](double, const OdeState& x) {
                              const double s = sigma_of(x);
                              if (!(s > 0.0)) return 1.0;
                              return std::abs(F(s)) - ev.stall * F.term_scale(s);
                          }});

    const OdeResult res = integrate_ode(rhs, {std::pow(sigma0, k)}, t0, t1, opt, events, sample_dt);
    HomothetyTrajectory out;
    out.status = res.status;
    out.event = res.event_name;
    out.steps = res.steps;
    out.t.reserve(res.samples.size());
    out.sigma.reserve(res.samples.size());
    for (const auto& smp : res.samples) {
        out.t.push_back(smp.t);
        out.sigma.push_back(sigma_of(smp.x));
    }
    out.t_end = res.t_end;
    out.sigma_end = sigma_of(res.x_end);
    // dσ/dv = 1/(k σ^{k-1})
    const double se = std::max(std::abs(out.sigma_end), 1e-300);
    out.error_bound = res.error_bound / (k * std::pow(se, k - 1));
    return out;
}

HomothetyTrajectory integrate(const HomothetyProblem& p, double t0, double t1, const OdeOptions& opt,
                              const HomothetyEvents& ev, double sample_dt) {
    p.validate();
    return integrate(p.rhs(), p.sigma0, t0, t1, opt, ev, sample_dt);
}

// ---- classification ---------------------------------------------------------------

const char* to_string(BehaviorTag t) {
    switch (t) {
        case BehaviorTag::Static: return "Static";
        case BehaviorTag::EternalRegular: return "EternalRegular";
        case BehaviorTag::EternalPastFiniteFutureDivergent: return "EternalPastFiniteFutureDivergent";
        case BehaviorTag::EternalPastDivergentFutureFinite: return "EternalPastDivergentFutureFinite";
        case BehaviorTag::FiniteTimeCollapse: return "FiniteTimeCollapse";
        case BehaviorTag::Linear: return "Linear";
        case BehaviorTag::Unresolved: return "Unresolved";
    }
    return "unknown";
}

namespace {

enum class Fate { Finite, Divergent, Collapse, Unknown };

struct Side {
    Fate fate = Fate::Unknown;
    double value = 0.0;  ///< limit or collapse time
};

Behavior assemble(const Side& past, const Side& future) {
    Behavior b;
    if (past.fate == Fate::Finite) b.sigma_minus_inf = past.value;
    if (future.fate == Fate::Finite) b.sigma_plus_inf = future.value;
    if (past.fate == Fate::Unknown || future.fate == Fate::Unknown) {
        b.tag = BehaviorTag::Unresolved;
    } else if (past.fate == Fate::Collapse || future.fate == Fate::Collapse) {
        b.tag = BehaviorTag::FiniteTimeCollapse;
        b.collapse_time = past.fate == Fate::Collapse ? past.value : future.value;
    } else if (past.fate == Fate::Finite && future.fate == Fate::Finite) {
        b.tag = BehaviorTag::EternalRegular;
    } else if (past.fate == Fate::Finite) {
        b.tag = BehaviorTag::EternalPastFiniteFutureDivergent;
    } else if (future.fate == Fate::Finite) {
        b.tag = BehaviorTag::EternalPastDivergentFutureFinite;
    } else {
        b.tag = BehaviorTag::Unresolved;
    }
    return b;
}

double balance_scale(const LaurentRhs& F) {
    double r = 1.0;
    for (int p = -4; p <= 1; ++p)
        for (int q = p + 1; q <= 1; ++q)
            if (F.c[p + 4] != 0.0 && F.c[q + 4] != 0.0)
                r = std::min(r, std::pow(std::abs(F.c[p + 4] / F.c[q + 4]), 1.0 / (q - p)));
    return r;
}

bool is_static(const LaurentRhs& F, double sigma0, double tol) {
    return std::abs(F(sigma0)) <= tol * std::max(1.0, F.term_scale(sigma0));
}

Behavior static_behavior(double sigma0) {
    Behavior b;
    b.tag = BehaviorTag::Static;
    b.sigma_minus_inf = sigma0;
    b.sigma_plus_inf = sigma0;
    return b;
}

}  // namespace

double collapse_time(const LaurentRhs& F, double sigma0) {
    require_positive(sigma0);
    const int m = F.pole_order();
    auto integrand = [&](double y) { return std::pow(y, m + 1) / shifted(F, m, y); };
    const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, sigma0, 15, 1e-13);
    return -I;
}

Behavior classify(const LaurentRhs& F, double sigma0, double static_tol) {
    require_positive(sigma0);
    if (is_static(F, sigma0, static_tol)) return static_behavior(sigma0);
    const auto roots = F.positive_roots();
    const bool up = F(sigma0) > 0.0;
    std::optional<double> above, below;
    for (double r : roots) {
        if (r > sigma0 && !above) above = r;
        if (r < sigma0) below = r;
    }
    Side past, future;
    // increasing: the future moves up, the past moves down
    const std::optional<double>& ahead = up ? above : below;
    const std::optional<double>& behind = up ? below : above;
    if (ahead) {
        future = {Fate::Finite, *ahead};
    } else if (up) {
        future = {Fate::Divergent, 0.0};
    } else {
        future = {Fate::Collapse, collapse_time(F, sigma0)};
    }
    if (behind) {
        past = {Fate::Finite, *behind};
    } else if (up) {
        past = {Fate::Collapse, collapse_time(F, sigma0)};
    } else {
        past = {Fate::Divergent, 0.0};
    }
    return assemble(past, future);
}

Behavior classify(const HomothetyProblem& p, double static_tol) {
    p.validate();
    if (p.kappa == 0.0 && p.mu == 0.0 && p.s != 0.0) {
        // σ = σ₀ - 2st/3
        Behavior b;
        b.tag = BehaviorTag::Linear;
        b.collapse_time = 3.0 * p.sigma0 / (2.0 * p.s);
        return b;
    }
    if (p.model == HomothetyModel::Printed && p.s == 1.0 && p.kappa > std::max(0.0, kappa_crit_p(p.mu)) &&
        std::abs(p.mu * p.mu - mu_threshold_cubic()) <= 1e-9) {
        Behavior b;
        b.tag = BehaviorTag::Unresolved;
        return b;
    }
    return classify(p.rhs(), p.sigma0, static_tol);
}

Behavior classify(HomothetyCase c, double kappa, double mu, double sigma0) {
    return classify(make_problem(c, kappa, mu, sigma0));
}

bool tags_agree(BehaviorTag classified, BehaviorTag integrated) {
    if (classified == BehaviorTag::Unresolved) return true;
    if (classified == BehaviorTag::Linear) return integrated == BehaviorTag::FiniteTimeCollapse;
    return classified == integrated;
}

double SweepGrid::kappa(int i) const { return kappa_lo + (kappa_hi - kappa_lo) * i / (n_kappa - 1); }
double SweepGrid::mu(int j) const { return mu_lo + (mu_hi - mu_lo) * j / (n_mu - 1); }

void SweepGrid::validate() const {
    for (double v : {kappa_lo, kappa_hi, mu_lo, mu_hi})
        if (!std::isfinite(v)) throw std::invalid_argument("sweep bounds must be finite");
    if (!(kappa_lo < kappa_hi) || !(mu_lo < mu_hi)) throw std::invalid_argument("sweep bounds must be ordered");
    if (kappa_lo < 0.0) throw std::invalid_argument("sweep requires kappa >= 0");
    if (n_kappa < 2 || n_mu < 2) throw std::invalid_argument("sweep needs at least 2 nodes per axis");
}

std::vector<SweepCell> sweep(HomothetyCase c, const SweepGrid& grid, int threads, bool cross_check) {
    grid.validate();
    const int total = grid.n_kappa * grid.n_mu;
    std::vector<SweepCell> cells(total);
    std::atomic<int> next{0};
    auto work = [&] {
        for (int k = next++; k < total; k = next++) {
            SweepCell& cell = cells[k];
            cell.i = k % grid.n_kappa;
            cell.j = k / grid.n_kappa;
            cell.kappa = grid.kappa(cell.i);
            cell.mu = grid.mu(cell.j);
            const HomothetyProblem p = make_problem(c, cell.kappa, cell.mu);
            cell.behavior = classify(p);
            if (cross_check) cell.integrated = classify_by_integration(p.rhs(), p.sigma0).tag;
        }
    };
    const int n = std::clamp(threads, 1, total);
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    return cells;
}

Behavior classify_by_integration(const LaurentRhs& F, double sigma0, double horizon, const OdeOptions& opt) {
    require_positive(sigma0);
    if (is_static(F, sigma0, 1e-12)) return static_behavior(sigma0);
    // v = σᵏ is tiny near small roots: tolerances are scaled by the smallest length where two terms of F balance
    const double floor = 1e-2 * std::min(sigma0, balance_scale(F));
    HomothetyEvents ev;
    ev.collapse = std::max(ev.collapse, floor);
    auto side = [&](double t1) {
        OdeOptions o = opt;
        o.max_steps = std::min<std::size_t>(o.max_steps, 200000);
        o.atol = std::min(o.atol, opt.atol * std::pow(floor, F.pole_order() + 2));
        const HomothetyTrajectory tr = integrate(F, sigma0, 0.0, t1, o, ev);
        Side sd;
        if (tr.status == OdeStatus::Event) {
            if (tr.event == "collapse") sd = {Fate::Collapse, tr.t_end};
            if (tr.event == "divergence") sd = {Fate::Divergent, 0.0};
            if (tr.event == "stall") sd = {Fate::Finite, tr.sigma_end};
        } else if (tr.status == OdeStatus::StepUnderflow) {
            // σ heading to 0 faster than t can be resolved
            const double s = tr.sigma_end;
            const double rate = F(s) / s * (t1 > 0.0 ? 1.0 : -1.0);
            if (rate < 0.0 && s / -rate <= 1e-9 * std::max(1.0, std::abs(tr.t_end))) sd = {Fate::Collapse, tr.t_end};
        } else if (tr.status == OdeStatus::MaxSteps) {
            // near a stiff attracting root step noise can keep |σ′| above the stall threshold
            const double s = tr.sigma_end;
            if (std::abs(F(s)) <= 1e-6 * F.term_scale(s)) sd = {Fate::Finite, s};
        }
        return sd;
    };
    return assemble(side(-horizon), side(horizon));
}

// ---- consistency of the initial metric ------------------------------------------------

ConsistencyReport check_homothety_consistency(const LieAlgebraData& alg, const Metric& g, double kappa, double mu,
                                              double tol) {
    const InvariantCurvature cv = invariant_curvature(alg, g);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(cv.ric, g.g());
    ConsistencyReport r;
    r.s = cv.s;
    const Vec ev = es.eigenvalues();
    r.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    const int n = static_cast<int>(ev.size());
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    r.einstein = (ev.maxCoeff() - ev.minCoeff()) <= tol * scale;
    r.F_t = kappa > 0.0 ? 1.0 / kappa + cv.s - mu * mu / 2.0 : kInf;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(ev(i) - ev(j)) > tol * scale) r.pair_sums.push_back(ev(i) + ev(j));
    if (r.einstein) {
        r.pass = true;
        r.reason = "Einstein";
        return r;
    }
    if (std::abs(cv.s) > tol * scale || std::abs(mu) > tol) {
        r.reason = "non-Einstein with s^2 + mu^2 != 0";
        return r;
    }
    if (!(kappa > 0.0)) {
        r.reason = "non-Einstein with kappa = 0";
        return r;
    }
    for (double ps : r.pair_sums)
        if (std::abs(ps - r.F_t) > tol * std::max(scale, r.F_t)) {
            r.reason = "pair sums differ from F_t";
            return r;
        }
    r.pass = true;
    r.reason = "non-Einstein, s = mu = 0, pair sums equal F_t";
    return r;
}

}  // namespace hetflow
