/**
 * @file chart.hpp
 * @brief Exact pointwise jets of polynomial metrics on a coordinate patch of R^3.
 */
#pragma once

#include "hetflow/geometry.hpp"
#include "hetflow/jet.hpp"

#include <array>
#include <random>

namespace hetflow {

/// Symmetric 3x3 matrix of polynomials and an evaluation point.
struct PolyMetric {
    std::array<std::array<Poly3, 3>, 3> g;
    std::array<double, 3> p{0.0, 0.0, 0.0};

    void set(int i, int j, const Poly3& v) {
        g[i][j] = v;
        g[j][i] = v;
    }
};

PolyMetric constant_metric(const Mat& g);

struct ChristoffelAt {
    Tensor gamma;    ///< Γ^k_{ij} as (k,i,j)
    Tensor dgamma;   ///< ∂_e Γ^k_{ij} as (e,k,i,j)
    Tensor ddgamma;  ///< ∂_e ∂_f Γ^k_{ij} as (e,f,k,i,j)
};

ChristoffelAt christoffel_at(const PolyMetric& m);

struct RiemannAt {
    Tensor R;
    Mat ric;
    double s = 0.0;
    Tensor DR;
};

RiemannAt riemann_at(const PolyMetric& m);

/// Curvature of the connection Γ - ½H^♯ computed directly from its coefficients, H = f ν_g.
Tensor torsion_curvature_at(const PolyMetric& m, const Jet& f);

/// Sample with H = f ν_g and φ = d(potential); f and potential given as jets about m.p.
GeometrySample build_sample(const PolyMetric& m, const Jet& f, const Jet& potential, int depth = 2);

/// Polynomial overload: f and the potential are expanded about m.p.
GeometrySample build_sample_poly(const PolyMetric& m, const Poly3& f, const Poly3& potential, int depth = 2);

Poly3 random_poly(std::mt19937_64& rng, double amplitude, int max_degree = Jet::kDegree);

/// δ_ij plus uniform [-amplitude, amplitude] coefficients on every monomial, evaluated at the origin.
PolyMetric random_poly_metric(std::mt19937_64& rng, double amplitude = 0.3);

struct ChartInputs {
    PolyMetric metric;
    Poly3 f;
    Poly3 potential;
};

/// Seeded random chart inputs; f is bounded away from zero at the origin.
ChartInputs random_chart_inputs(std::uint64_t seed);

}  // namespace hetflow
