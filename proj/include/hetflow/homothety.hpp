/**
 * @file homothety.hpp
 * @brief Scalar ODE reductions for flows of the form (σ_t g, f_t = μ σ_t^{-3/2}).
 *
 * Every reduction has the form ½∂_tσ² = F(σ) with F a Laurent polynomial
 * c₋₄y⁻⁴ + c₋₂y⁻² + c₋₁y⁻¹ + c₀ + c₁y, so σ′ = F(σ)/σ.
 */
#pragma once

#include "hetflow/lie.hpp"
#include "hetflow/ode.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace hetflow {

/// F(y) = Σ_{p=-4}^{1} c[p+4] y^p.
struct LaurentRhs {
    std::array<double, 6> c{};

    double operator()(double y) const;
    double derivative(double y) const;
    /// max_p |c_p y^p|, the size F would have without cancellation.
    double term_scale(double y) const;
    /// Largest p with c₋ₚ ≠ 0 (0 when F is affine).
    int pole_order() const;
    /// Positive roots of y⁴F(y), ascending and polished.
    std::vector<double> positive_roots() const;
};

enum class HomothetyCase { Positive, Flat, Negative };
/// Printed: the displayed reduction. Exact: the reduction of rhs_3d on Einstein data.
enum class HomothetyModel { Printed, Exact };

const char* to_string(HomothetyCase c);
HomothetyCase parse_homothety_case(const std::string& s);
double normalized_scalar(HomothetyCase c);

/// Throws std::invalid_argument for y ≤ 0.
double F_general(double kappa, double mu, double s, double y);
double F_p(double kappa, double mu, double y);
double F_flat(double kappa, double mu, double y);
double F_n(double kappa, double mu, double y);
double dF_general_dy(double kappa, double mu, double s, double y);

/// (2κs/3 - 2)(s/3)y - κs²/3 + μ²/y - κsμ²/y² - κμ⁴/(4y⁴).
LaurentRhs printed_rhs(double kappa, double mu, double s);
/// -2sy/3 - κs²/9 + μ²/y + κsμ²/(3y²) - κμ⁴/(4y⁴).
LaurentRhs exact_rhs(double kappa, double mu, double s);
/// (4y - 12)/κ.
LaurentRhs su2_rhs(double kappa);

/// (36μ² - 24)/(9μ²(μ² + 4) + 4).
double kappa_crit_p(double mu);
/// (36μ² + 24)/(9μ²(μ² - 4) + 4); ±inf at the poles μ² = μ±².
double kappa_crit_n(double mu);
/// μ±² = (2/3)(3 ± 2√2).
double mu_sq_minus();
double mu_sq_plus();

/// Unique positive root of 27x³ + 6x² - 68x - 8.
double mu_threshold_cubic();
double threshold_cubic(double x);

struct Kappa0Result {
    bool ok = false;
    double kappa0 = 0.0;
    double y0 = 0.0;
    double residual_F = 0.0;
    double residual_dF = 0.0;
    std::string error;
};
/// Double root of F_p in y ∈ (0,1): grid seed on (0.01, 0.99), then Newton.
Kappa0Result kappa0(double mu);

/// Branch 0 for x ≥ -1/e, branch -1 for -1/e ≤ x < 0. Throws std::domain_error otherwise.
double lambert_w(double x, int branch = 0);

struct TimeDomain {
    double lo;  ///< -inf when unbounded
    double hi;  ///< +inf when unbounded
};

/// Flat reduction in closed form; throws std::domain_error outside its domain.
double flat_closed_form(double kappa, double mu, double t);
TimeDomain flat_domain(double kappa, double mu);
/// -κ/12 (1 + b + log(-b)) with b = 4/(κμ²) - 1 < 0.
double flat_collapse_time(double kappa, double mu);

/// 3 + 3W₀(-(2/3) exp((2/3)(2t/κ - 1))) for t ≤ t_max.
double su2_closed_form(double kappa, double t);
/// κ/4 (log(27/8) - 1).
double su2_t_max(double kappa);

struct HomothetyProblem {
    double kappa = 0.0;
    double mu = 0.0;
    double s = 1.0;
    double sigma0 = 1.0;
    HomothetyModel model = HomothetyModel::Printed;

    LaurentRhs rhs() const;
    /// Throws std::invalid_argument on κ < 0, σ₀ ≤ 0 or non-finite values.
    void validate() const;
};

HomothetyProblem make_problem(HomothetyCase c, double kappa, double mu, double sigma0 = 1.0);

struct HomothetyEvents {
    double collapse = 1e-8;
    double divergence = 1e8;
    double stall = 1e-9;  ///< |F(σ)| ≤ stall·term_scale(σ), i.e. σ sits on a root of F
    bool detect_stall = true;
};

struct HomothetyTrajectory {
    OdeStatus status = OdeStatus::Completed;
    std::string event;  ///< collapse, divergence, stall or empty
    std::vector<double> t;
    std::vector<double> sigma;
    double t_end = 0.0;
    double sigma_end = 0.0;
    double error_bound = 0.0;
    std::size_t steps = 0;
};

/// Integrates σ′ = F(σ)/σ in the variable v = σᵏ, k = 2 + pole order, so that v′ is polynomial in σ.
HomothetyTrajectory integrate(const LaurentRhs& F, double sigma0, double t0, double t1, const OdeOptions& opt = {},
                              const HomothetyEvents& ev = {}, double sample_dt = 0.0);
HomothetyTrajectory integrate(const HomothetyProblem& p, double t0, double t1, const OdeOptions& opt = {},
                              const HomothetyEvents& ev = {}, double sample_dt = 0.0);

enum class BehaviorTag {
    Static,
    EternalRegular,
    EternalPastFiniteFutureDivergent,
    EternalPastDivergentFutureFinite,
    FiniteTimeCollapse,
    Linear,
    Unresolved
};

const char* to_string(BehaviorTag t);

struct Behavior {
    BehaviorTag tag = BehaviorTag::Static;
    std::optional<double> sigma_minus_inf;
    std::optional<double> sigma_plus_inf;
    std::optional<double> collapse_time;  ///< negative for a collapse in the past
};

/// Root and sign analysis of F around σ₀.
Behavior classify(const LaurentRhs& F, double sigma0 = 1.0, double static_tol = 1e-12);
/// Adds the Linear (κ = μ = 0, s ≠ 0) and Unresolved (cubic boundary) tags.
Behavior classify(const HomothetyProblem& p, double static_tol = 1e-12);
Behavior classify(HomothetyCase c, double kappa, double mu, double sigma0 = 1.0);

/// Same tags derived from integration events in both time directions. Divergence is only
/// recognised through the divergence event, so the horizon must be long enough to reach it.
Behavior classify_by_integration(const LaurentRhs& F, double sigma0 = 1.0, double horizon = 1e30,
                                 const OdeOptions& opt = {});

/// Whether an integration tag confirms a classifier tag: Linear is a collapse for the integrator
/// and Unresolved accepts anything.
bool tags_agree(BehaviorTag classified, BehaviorTag integrated);

/// Inclusive grid κ_lo..κ_hi × μ_lo..μ_hi with n_kappa × n_mu nodes.
struct SweepGrid {
    double kappa_lo = 0.0, kappa_hi = 1.0;
    double mu_lo = 0.0, mu_hi = 2.0;
    int n_kappa = 41, n_mu = 41;

    double kappa(int i) const;
    double mu(int j) const;
    /// Throws std::invalid_argument on unordered or non-finite bounds or fewer than 2 nodes.
    void validate() const;
};

struct SweepCell {
    int i = 0, j = 0;
    double kappa = 0.0, mu = 0.0;
    Behavior behavior;
    std::optional<BehaviorTag> integrated;  ///< set when the integration cross-check ran
};

/// Classifies every node, μ-major (index j·n_kappa + i). Cells are computed on up to `threads`
/// workers and stored by index, so the result does not depend on the thread count.
std::vector<SweepCell> sweep(HomothetyCase c, const SweepGrid& grid, int threads = 1, bool cross_check = false);

/// ∫_{σ₀}^0 σ/F(σ) dσ, valid when F has no root between 0 and σ₀.
double collapse_time(const LaurentRhs& F, double sigma0);

struct ConsistencyReport {
    bool pass = false;
    bool einstein = false;
    double s = 0.0;
    double F_t = 0.0;  ///< 1/κ + s - μ²/2 at σ = 1
    std::vector<double> eigenvalues;
    std::vector<double> pair_sums;  ///< λᵢ + λⱼ over pairs of distinct eigenvalues
    std::string reason;
};

/// Pairwise relations (λᵢ² - λⱼ²) = F_t(λᵢ - λⱼ) for a left-invariant metric.
ConsistencyReport check_homothety_consistency(const LieAlgebraData& alg, const Metric& g, double kappa, double mu,
                                              double tol = 1e-9);

}  // namespace hetflow
