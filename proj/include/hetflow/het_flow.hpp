/**
 * @file het_flow.hpp
 * @brief Right-hand sides of the heterotic flow, its dimension-3 reformulation on
 *        left-invariant data, the dilaton flow and trajectory integration.
 *
 * Adopted flow: ∂g = -2Ric + c·H∘H - 2κR'∘R', ∂H = -dδH with c = 1, i.e. -2 times the
 * symmetric part of the torsion Ricci tensor. c = ½ is available for comparison.
 */
#pragma once

#include "hetflow/geometry.hpp"
#include "hetflow/lie.hpp"
#include "hetflow/ode.hpp"

#include <string>
#include <vector>

namespace hetflow {

inline constexpr double kAdoptedHCoefficient = 1.0;
inline constexpr double kAlternativeHCoefficient = 0.5;

struct FlowState3 {
    LieAlgebraData alg;
    Mat g;
    double f = 0.0;
    double t = 0.0;
};

struct FlowParams {
    double kappa = 0.0;
    double t1 = 1.0;  ///< integration runs from state.t to t1
    double sample_dt = 0.0;  ///< 0 samples every accepted step
    OdeOptions ode;
    double degenerate_tol = 1e-6;  ///< event when the smallest eigenvalue of g drops below
    double blowup = 1e8;           ///< event when the largest eigenvalue of g exceeds
    double h_coefficient = kAdoptedHCoefficient;
};

struct Rhs3 {
    Mat g_dot;
    double f_dot = 0.0;
};

/// ġ = 2κRic∘Ric - (2 + κ(2s - f²))Ric + (f² + κ(s² - 2|Ric|² - ¼f⁴))g, ḟ = -½Tr_g(ġ)f.
/// A coefficient c on H∘H other than the adopted one adds (c - 1)f²g to ġ (H∘H = f²g).
/// Throws std::invalid_argument unless dim 3 with finite entries, std::domain_error unless g is SPD.
Rhs3 rhs_3d(const LieAlgebraData& alg, const Mat& g, double f, double kappa,
            double h_coefficient = kAdoptedHCoefficient);
Rhs3 rhs_3d(const FlowState3& state, double kappa, double h_coefficient = kAdoptedHCoefficient);

struct RhsGeneral {
    Mat g_dot;
    Tensor H_dot;
};

/// ġ = -2Ric + c·H∘H - 2κR'∘R', Ḣ = -dδH (needs jet depth 2).
RhsGeneral rhs_general(const GeometrySample& s, double kappa, double h_coefficient = kAdoptedHCoefficient);

/// dH + κ⟨R'∧R'⟩.
Tensor bianchi_residual(const GeometrySample& s, double kappa);

/// ½(|H|² - δφ - κ|R'|²).
double dilaton_rhs(const GeometrySample& s, double kappa);

/// Sample of the invariant geometry (alg, g) with H = fν_g.
GeometrySample invariant_state_sample(const LieAlgebraData& alg, const Mat& g, double f);

struct FlowTrajectory {
    OdeStatus status = OdeStatus::Completed;
    std::string event;  ///< degenerate, blowup or empty
    std::string message;
    std::vector<double> t;
    std::vector<Mat> g;
    std::vector<double> f;
    double error_bound = 0.0;
    std::size_t steps = 0;
};

/// Integrates rhs_3d with the upper triangle of g and f as state.
FlowTrajectory integrate_flow(const FlowState3& state, const FlowParams& params);

/// det(g)^{1/n}, the homothety factor of g relative to a unit-determinant base.
double homothety_factor(const Mat& g, const Mat& base);

}  // namespace hetflow
