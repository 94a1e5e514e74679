/**
 * @file lie.hpp
 * @brief Left-invariant geometry on Lie algebras of dimension ≤ 6.
 */
#pragma once

#include "hetflow/geometry.hpp"

#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace hetflow {

struct LieAlgebraData {
    int n = 0;
    Tensor c;  ///< c(k, i, j) = c^k_{ij}, [e_i, e_j] = c^k_{ij} e_k
    std::string name;

    /// max |Σ_cyc [[e_i,e_j],e_k]| over basis triples.
    double jacobi_residual() const;
    bool unimodular(double tol = 1e-12) const;
    Vec bracket(const Vec& x, const Vec& y) const;
};

/// Empty algebra of dimension n with the given name.
LieAlgebraData make_algebra(int n, std::string name);

/// Set [e_i, e_j] = Σ_k v(k) e_k and the antisymmetric partner.
void set_bracket(LieAlgebraData& alg, int i, int j, const Vec& v);

/// Milnor-frame unimodular algebra: [e2,e3]=l1 e1, [e3,e1]=l2 e2, [e1,e2]=l3 e3.
LieAlgebraData milnor_algebra(double l1, double l2, double l3, std::string name);

/// Named entries: r3, heisenberg, su2, sl2r, e11, e2, hyperbolic.
/// su2 with a parameter gives the frame [e2,e3]=e1/(2√κ), [e3,e1]=e2/(2√κ), [e1,e2]=(2/√κ)e3;
/// hyperbolic takes c (default 1). Other entries ignore the parameter.
LieAlgebraData catalog(std::string_view name, std::optional<double> param = std::nullopt);

const std::vector<std::string>& catalog_names();

/// Levi-Civita coefficients Γ(k, a, b) from the Koszul formula.
Tensor levi_civita_invariant(const LieAlgebraData& alg, const Metric& g);

/// Curvature of the invariant connection with coefficients gamma.
Tensor invariant_connection_curvature(const LieAlgebraData& alg, const Tensor& gamma, const Metric& g);

struct InvariantCurvature {
    Tensor R;
    Mat ric;
    double s = 0.0;
};

InvariantCurvature invariant_curvature(const LieAlgebraData& alg, const Metric& g);

/// ∇T for a tensor with constant frame components, derivative slot first.
Tensor invariant_covariant_derivative(const Tensor& T, const Tensor& gamma);

/// Torsion T(k,a,b) = Γ^k_{ab} - Γ^k_{ba} - c^k_{ab}.
Tensor invariant_torsion(const LieAlgebraData& alg, const Tensor& gamma);

/// A left-invariant covector is closed iff it annihilates the derived algebra.
bool is_closed_invariant(const LieAlgebraData& alg, const Vec& phi, double tol = 1e-12);

struct InvariantGeometry {
    InvariantGeometry(LieAlgebraData alg, const Metric& g);

    LieAlgebraData alg;
    Metric g;
    Tensor gamma;
    Tensor R;
    Mat ric;
    double s = 0.0;
    Tensor H;  ///< zero unless set
    Vec phi;   ///< zero unless set

    /// H = f ν_g (dimension 3).
    void set_dilaton_density(double f);
    void set_three_form(const Tensor& h);
    /// Throws std::invalid_argument unless phi is closed.
    void set_closed_form(const Vec& phi);
};

GeometrySample build_sample_invariant(const InvariantGeometry& geom);

/// Symmetric positive definite metric with eigenvalues in [lo, hi].
Mat random_spd(std::mt19937_64& rng, int n, double lo = 0.5, double hi = 2.0);

}  // namespace hetflow
