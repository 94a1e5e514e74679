/**
 * @file soliton.hpp
 * @brief Residuals of the heterotic soliton system, the strong condition, the
 *        constant-dilaton classification in dimension 3 and the divergence identities.
 */
#pragma once

#include "hetflow/geometry.hpp"
#include "hetflow/lie.hpp"
#include "hetflow/report.hpp"

#include <cstdint>
#include <optional>

namespace hetflow {

struct SolitonCandidate {
    GeometrySample sample;
    double kappa = 0.0;
};

// ---- system maps -------------------------------------------------------------

/// E^s = Ric + ∇φ - ½H∘H + κ R'∘R'.
Mat einstein_sym(const GeometrySample& s, double kappa);
/// E^a = ½δH + ½ φ⌟H.
Mat einstein_skew(const GeometrySample& s);
/// E_D = δφ + |φ|² - |H|² + κ|R'|².
double dilaton_equation(const GeometrySample& s, double kappa);
/// E_B = dH + κ⟨R'∧R'⟩.
Tensor bianchi_form(const GeometrySample& s, double kappa);

/// ∇'*R' with ∇' acting on every slot, stored (x, c, d).
Tensor torsion_curvature_adjoint(const GeometrySample& s);
/// ∇'*R' + φ⌟R'.
Tensor strong_tensor(const GeometrySample& s);
/// Σ_i e^i ∧ S(e_i) of the strong tensor S.
Tensor strong_skew_projection(const GeometrySample& s);
/// Curvature-free expression for the skew projection of the strong tensor (frame formula,
/// evaluated with g-raised indices), sign-normalized so it equals -strong_skew_projection.
Tensor strong_skew_formula(const GeometrySample& s);
/// ∇*∇H + ∇_φ H.
Tensor rough_laplacian_transport(const GeometrySample& s);
/// Constant dilaton in dimension 3: (d^∇Ric)(x,y;v) + (3f/2) ∗(Ric_0(v))(x,y), stored (v, x, y).
Tensor strong_reduced_3d(const GeometrySample& s);

// ---- reports -----------------------------------------------------------------

inline constexpr double kConstructorTol = 1e-12;
inline constexpr double kIdentityTol = 1e-8;
inline constexpr double kClassifyTol = 1e-6;

/// einstein_sym, einstein_skew, dilaton, bianchi, strong_full, strong_skew.
ResidualReport residual_general(const SolitonCandidate& c, double tol = kConstructorTol);

/// Dimension-3 system in terms of (g, f, φ): einstein_3d, maxwell_3d, maxwell_general_diff,
/// dilaton_gradient (fφ = df), scalar_identity (s = 3δφ + 2|φ|² - ½f²).
ResidualReport residual_3d(const GeometrySample& s, double kappa, double tol = kConstructorTol);

struct ConstantDilatonClass {
    int case_id = 0;  ///< 1, 2, 3 or 0 for none
    double f = 0.0;   ///< positive root of the forced f²
    Vec eigenvalues;  ///< principal Ricci curvatures, ascending
    double scalar_residual = 0.0;  ///< |s + ½f²|
    double trace_residual = 0.0;   ///< |2κ|Ric|² - 2f² + κf⁴/2|
    bool degenerate_tie = false;
};

ConstantDilatonClass classify_constant_dilaton(const Mat& ric, const Metric& g, double kappa,
                                               double tol = kClassifyTol);

/// -κ Ric∘Ric + (1 - κf²) Ric + ½(f² - κf⁴/2) g.
Mat quadratic_form_residual(const Mat& ric, const Metric& g, double f, double kappa);
/// Discriminant of -κx² + (1 - κf²)x + ½(f² - κf⁴/2).
double quadratic_discriminant(double f, double kappa);

/// strong_full and strong_reduced_3d norms plus the skew projection check.
ResidualReport strong_residual(const SolitonCandidate& c, double tol = kConstructorTol);

/// Case 1: metric f²e¹⊗e¹ + e²⊗e² + e³⊗e³ on the Heisenberg algebra, f = 1/√κ.
SolitonCandidate heisenberg_strong_soliton(double kappa);
InvariantGeometry heisenberg_geometry(double kappa);
/// Case 3: hyperbolic model with c² = 1/(4κ), f = √(3/κ).
SolitonCandidate hyperbolic_soliton(double kappa);
InvariantGeometry hyperbolic_geometry(double kappa);

/// Unit eigenvector of the simple positive Ricci eigenvalue, signed so that dξ = -f∗ξ.
struct XiExtraction {
    bool ok = false;
    Vec xi;                      ///< vector components
    double d_xi_residual = 0.0;  ///< |dξ + f∗ξ|
    double nabla_xi_residual = 0.0;  ///< |∇ξ + ½ f ∗ξ|
};
XiExtraction extract_xi(const InvariantGeometry& geom, double f);

/// Connection ∇_v - ½ f ∗v + f g(v,ξ) ∗ξ; returns the max curvature component.
double auxiliary_connection_curvature(const InvariantGeometry& geom, const Vec& xi, double f);

/// Dimension-3 curvature identities at a sample, relative to max(1, |rhs|): reconstruction (R from Ric),
/// r_circ_r (R∘R in terms of Ric), norm (|R|² = |Ric|² - s²/4), torsion_r_circ_r (R'∘R' with the
/// [∗df, Ric] and df⊗df terms), torsion_norm (|R'|²), torsion_ricci (Ric' = Ric - ½H∘H + ½δH).
inline constexpr double kCurvatureIdentityTol = 1e-9;
ResidualReport verify_curvature_identities_3d(const GeometrySample& s, double tol = kCurvatureIdentityTol);

/// Divergence identities of R∘R (div_rr), H∘H (div_hh) and the full flow operator (divergence) for
/// three seeded random probe vectors; relative to the largest term.
ResidualReport verify_divergence_identities(const GeometrySample& s, double kappa, std::uint64_t probe_seed = 0,
                                          double tol = kIdentityTol);

}  // namespace hetflow
