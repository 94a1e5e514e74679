/**
 * @file geometry.hpp
 * @brief Pointwise geometry bundle shared by the chart and invariant backends,
 *        and the torsion-connection quantities derived from it.
 *
 * The torsion connection is ∇'_u v = ∇_u v - ½ H(u,v)^♯ with ∇ Levi-Civita.
 */
#pragma once

#include "hetflow/tensor.hpp"

namespace hetflow {

struct GeometrySample {
    explicit GeometrySample(const Metric& metric);

    Metric g;
    Tensor gamma;   ///< Γ^k_{ab} stored as gamma(k, a, b), ∇_{e_a} e_b = Γ^k_{ab} e_k
    Tensor R;       ///< Levi-Civita curvature
    Tensor DR;      ///< ∇R
    Tensor H;       ///< 3-form
    Tensor DH;      ///< ∇H
    Tensor DDH;     ///< ∇∇H
    Vec phi;        ///< closed 1-form
    Mat Dphi;       ///< ∇φ
    Tensor DDphi;   ///< ∇∇φ
    double f = 0.0; ///< ∗H (dimension 3)
    Vec df;         ///< dimension 3
    Mat hess_f;     ///< ∇df (dimension 3)
    int jet_depth = 0;

    int dim() const { return g.dim(); }
};

/// Throws std::invalid_argument if depth < required.
void require_depth(const GeometrySample& s, int required, const char* what);

/// Fill f, df and hess_f from H, DH, DDH (dimension 3).
void fill_dilaton_density(GeometrySample& s);

/// δα from ∇α: (δα)_{b..} = -Σ g^{ac} (∇_a α)_{c b..}.
Tensor codifferential(const Tensor& Dalpha, const Metric& g);

/// dα from ∇α (torsion-free connection).
Tensor exterior_derivative(const Tensor& Dalpha);

/// ¼[H_a,H_b] as a 2-form in the last two slots: K(a,b,x,y) = g([H_a,H_b]e_x, e_y).
Tensor h_commutator_tensor(const Tensor& H, const Metric& g);

/// R' = R - ½∇_aH(b) + ½∇_bH(a) + ¼[H_a,H_b].
Tensor torsion_curvature(const GeometrySample& s);

/// Levi-Civita derivative of R' (needs depth 2).
Tensor torsion_curvature_derivative(const GeometrySample& s);

Mat torsion_ricci(const GeometrySample& s);

/// Ricci tensor and its Levi-Civita derivative DRic(e, b, c).
Mat ricci(const GeometrySample& s);
Tensor ricci_derivative(const GeometrySample& s);
double scalar_curvature(const GeometrySample& s);
Vec scalar_curvature_gradient(const GeometrySample& s);

/// Vector components φ^♯.
Vec sharp(const Vec& covector, const Metric& g);

}  // namespace hetflow
