#include "hetflow/soliton.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace hetflow {

namespace {

Tensor slice(const Tensor& t, int e) {
    Tensor out(t.dim(), t.rank() - 1);
    const std::size_t block = out.size();
    for (std::size_t k = 0; k < block; ++k) out[k] = t[e * block + k];
    return out;
}

Tensor slice2(const Tensor& t, int a, int b) { return slice(slice(t, a), b); }

Vec basis(int n, int i) {
    Vec v = Vec::Zero(n);
    v(i) = 1.0;
    return v;
}

Vec row(const Mat& m, int i) { return m.row(i).transpose(); }

Vec first_slots(const Tensor& t, int a, int b) {
    const int n = t.dim();
    Vec v(n);
    for (int k = 0; k < n; ++k) v(k) = t(a, b, k);
    return v;
}

// Natural action of an endomorphism on a form: (A·α)(x..) = -Σ_k α(.., A x_k, ..).
Tensor act(const Mat& A, const Tensor& alpha) {
    const int n = alpha.dim();
    const int p = alpha.rank();
    Tensor out(n, p);
    std::vector<int> idx(p), src(p);
    for (std::size_t q = 0; q < out.size(); ++q) {
        out.unflatten(q, idx.data());
        double s = 0.0;
        for (int k = 0; k < p; ++k) {
            src = idx;
            for (int m = 0; m < n; ++m) {
                const double w = A(m, idx[k]);
                if (w == 0.0) continue;
                src[k] = m;
                s -= w * alpha.at(src.data());
            }
        }
        out[q] = s;
    }
    return out;
}

// ∇(X∘X)(e; b, c) for X of rank r with inner product 1/(r-1)! Σ over the trailing slots.
Tensor circ_derivative(const Tensor& X, const Tensor& DX, const Metric& g, double weight) {
    const int n = g.dim();
    Tensor out(n, 3);
    std::vector<Tensor> xs;
    for (int b = 0; b < n; ++b) xs.push_back(slice(X, b));
    for (int e = 0; e < n; ++e) {
        Tensor DXe = slice(DX, e);
        for (int b = 0; b < n; ++b) {
            Tensor db = slice(DXe, b);
            for (int c = 0; c < n; ++c) out(e, b, c) += weight * full_contract(db, xs[c], g);
            for (int c = 0; c < n; ++c) out(e, c, b) += weight * full_contract(db, xs[c], g);
        }
    }
    return out;
}

// -g^{ab} D(a, b, v)
Vec divergence(const Tensor& D, const Metric& g) {
    const int n = g.dim();
    const Mat& gi = g.inv();
    Vec out = Vec::Zero(n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int v = 0; v < n; ++v) out(v) -= gi(a, b) * D(a, b, v);
    return out;
}

double inner_12(const Tensor& a, const Tensor& b, const Metric& g) { return 0.5 * full_contract(a, b, g); }

Mat hodge_star_1form(const Vec& alpha, const Metric& g) { return to_matrix(hodge_star(from_vector(alpha), g)); }

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double lower_dot(const Vec& a, const Vec& b, const Metric& g) { return a.dot(g.inv() * b); }

}  // namespace

// ---- system maps -------------------------------------------------------------

Mat einstein_sym(const GeometrySample& s, double kappa) {
    Tensor Rt = torsion_curvature(s);
    return ricci(s) + symmetric_part(s.Dphi) - 0.5 * h_circ_h(s.H, s.g) + kappa * r_circ_r(Rt, s.g);
}

Mat einstein_skew(const GeometrySample& s) {
    Mat dH = to_matrix(codifferential(s.DH, s.g));
    Mat phiH = to_matrix(interior(sharp(s.phi, s.g), s.H));
    return 0.5 * dH + 0.5 * phiH;
}

double dilaton_equation(const GeometrySample& s, double kappa) {
    const double delta_phi = -trace(s.Dphi, s.g);
    return delta_phi + lower_dot(s.phi, s.phi, s.g) - form_inner(s.H, s.H, s.g) +
           kappa * curvature_norm_sq(torsion_curvature(s), s.g);
}

Tensor bianchi_form(const GeometrySample& s, double kappa) {
    return exterior_derivative(s.DH) + kappa * r_wedge_r(torsion_curvature(s), s.g);
}

Tensor torsion_curvature_adjoint(const GeometrySample& s) {
    require_depth(s, 2, "torsion_curvature_adjoint");
    const int n = s.dim();
    const Mat& gi = s.g.inv();
    Tensor R = torsion_curvature(s);
    Tensor DR = torsion_curvature_derivative(s);
    Tensor Hu = raise_slot(s.H, 2, s.g);
    Tensor out(n, 3);
    for (int x = 0; x < n; ++x)
        for (int c = 0; c < n; ++c)
            for (int d = 0; d < n; ++d) {
                double v = 0.0;
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b) {
                        if (gi(a, b) == 0.0) continue;
                        double t = DR(a, b, x, c, d);
                        for (int k = 0; k < n; ++k)
                            t += 0.5 * (Hu(a, c, k) * R(b, x, k, d) + Hu(a, d, k) * R(b, x, c, k) +
                                        Hu(a, x, k) * R(b, k, c, d));
                        v -= gi(a, b) * t;
                    }
                out(x, c, d) = v;
            }
    return out;
}

Tensor strong_tensor(const GeometrySample& s) {
    Tensor S = torsion_curvature_adjoint(s);
    S += interior(sharp(s.phi, s.g), torsion_curvature(s));
    return S;
}

Tensor strong_skew_projection(const GeometrySample& s) {
    Tensor S = strong_tensor(s);
    const int n = s.dim();
    Tensor out(n, 3);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) out(a, b, c) = S(a, b, c) - S(b, a, c) + S(c, a, b);
    return out;
}

Tensor rough_laplacian_transport(const GeometrySample& s) {
    require_depth(s, 2, "rough_laplacian_transport");
    const int n = s.dim();
    const Mat& gi = s.g.inv();
    const Vec phi_up = sharp(s.phi, s.g);
    Tensor out(n, 3);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            if (gi(i, j) != 0.0) out += (-gi(i, j)) * slice2(s.DDH, i, j);
        out += phi_up(i) * slice(s.DH, i);
    }
    return out;
}

Tensor strong_skew_formula(const GeometrySample& s) {
    require_depth(s, 2, "strong_skew_formula");
    const int n = s.dim();
    const Metric& g = s.g;
    const Mat& gi = g.inv();
    const Vec phi_up = sharp(s.phi, g);
    const Tensor dH = exterior_derivative(s.DH);
    Tensor DdH(n, 5);
    {
        const std::size_t block = dH.size();
        for (int e = 0; e < n; ++e) {
            Tensor de = exterior_derivative(slice(s.DDH, e));
            for (std::size_t k = 0; k < block; ++k) DdH[e * block + k] = de[k];
        }
    }
    const Mat deltaH = to_matrix(codifferential(s.DH, g));
    const Mat Hphi = to_matrix(interior(phi_up, s.H));
    std::vector<Mat> Hend(n);
    for (int j = 0; j < n; ++j) Hend[j] = h_endo(s.H, basis(n, j), g);

    Tensor out = rough_laplacian_transport(s);
    out += 0.5 * codifferential(DdH, g);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double w = gi(i, j);
            if (w == 0.0) continue;
            out += (-0.5 * w) * wedge(from_vector(row(deltaH, i)), slice(s.H, j));
            out += (0.5 * w) * act(Hend[i], slice(s.DH, j));
            out += (0.25 * w) * interior(basis(n, i), act(Hend[j], dH));
            out += (-0.5 * w) * wedge(from_vector(row(Hphi, i)), slice(s.H, j));
        }
    // ½ H_{e_j}(e_i) ∧ (∇_{e_j}H)_{e_i}
    for (int j = 0; j < n; ++j)
        for (int jp = 0; jp < n; ++jp)
            for (int i = 0; i < n; ++i)
                for (int ip = 0; ip < n; ++ip) {
                    const double w = gi(j, jp) * gi(i, ip);
                    if (w == 0.0) continue;
                    out += (0.5 * w) * wedge(from_vector(first_slots(s.H, j, i)), slice2(s.DH, jp, ip));
                }
    // -¼ H_{e_j}(H_{e_j}(e_i) ∧ H_{e_i})
    for (int j = 0; j < n; ++j)
        for (int jp = 0; jp < n; ++jp) {
            if (gi(j, jp) == 0.0) continue;
            Tensor inner(n, 3);
            for (int i = 0; i < n; ++i)
                for (int ip = 0; ip < n; ++ip) {
                    const double w = gi(i, ip);
                    if (w == 0.0) continue;
                    inner += w * wedge(from_vector(first_slots(s.H, jp, i)), slice(s.H, ip));
                }
            out += (-0.25 * gi(j, jp)) * act(Hend[j], inner);
        }
    out += 0.5 * interior(phi_up, dH);
    return out;
}

Tensor strong_reduced_3d(const GeometrySample& s) {
    require_depth(s, 2, "strong_reduced_3d");
    if (s.dim() != 3) throw std::invalid_argument("strong_reduced_3d requires dimension 3");
    const int n = 3;
    const Mat ric = ricci(s);
    const double sc = trace(ric, s.g);
    const Mat ric0 = ric - (sc / 3.0) * s.g.g();
    const Tensor DRic = ricci_derivative(s);
    Tensor out(n, 3);
    for (int v = 0; v < n; ++v) {
        const Mat st = hodge_star_1form(row(ric0, v), s.g);
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y)
                out(v, x, y) = DRic(x, y, v) - DRic(y, x, v) + 1.5 * s.f * st(x, y);
    }
    return out;
}

// ---- reports -----------------------------------------------------------------

ResidualReport residual_general(const SolitonCandidate& c, double tol) {
    const GeometrySample& s = c.sample;
    ResidualReport r;
    r.add("einstein_sym", max_abs(einstein_sym(s, c.kappa)), tol);
    r.add("einstein_skew", max_abs(einstein_skew(s)), tol);
    r.add("dilaton", std::abs(dilaton_equation(s, c.kappa)), tol);
    r.add("bianchi", bianchi_form(s, c.kappa).max_abs(), tol);
    if (s.jet_depth >= 2) {
        r.add("strong_full", strong_tensor(s).max_abs(), tol);
        r.add("strong_skew", strong_skew_projection(s).max_abs(), tol);
    }
    // Tr E^s = s - δφ - (3/2)|H|² + 2κ|R'|²
    const double tr_expected = scalar_curvature(s) + trace(s.Dphi, s.g) - 1.5 * form_inner(s.H, s.H, s.g) +
                               2.0 * c.kappa * curvature_norm_sq(torsion_curvature(s), s.g);
    r.add("trace_identity", std::abs(trace(einstein_sym(s, c.kappa), s.g) - tr_expected), std::max(tol, 1e-10));
    r.set_info("kappa", c.kappa);
    return r;
}

ResidualReport residual_3d(const GeometrySample& s, double kappa, double tol) {
    if (s.dim() != 3) throw std::invalid_argument("residual_3d requires dimension 3");
    const Metric& g = s.g;
    const Mat ric = ricci(s);
    const double sc = trace(ric, g);
    const double f = s.f;
    const Vec& df = s.df;
    const double df2 = lower_dot(df, df, g);
    Mat star_df = endo_from_form(hodge_star_1form(df, g), g);
    Mat comm = bilinear_from_endo(endo_commutator(star_df, endo_from_bilinear(ric, g)), g);
    Mat e3 = -kappa * ric_circ_ric(ric, g) + (1.0 + kappa * sc - 0.5 * kappa * f * f) * ric +
             (kappa * bilinear_norm_sq(ric, g) - 0.5 * kappa * sc * sc + 0.25 * kappa * df2 - 0.5 * f * f +
              0.125 * kappa * f * f * f * f) *
                 g.g() +
             0.5 * kappa * comm + 0.25 * kappa * df * df.transpose() + symmetric_part(s.Dphi);
    const Mat maxwell = -hodge_star_1form(df, g) + f * hodge_star_1form(s.phi, g);
    const double delta_phi = -trace(s.Dphi, g);

    ResidualReport r;
    r.add("einstein_3d", max_abs(e3), tol);
    r.add("maxwell_3d", max_abs(maxwell), tol);
    r.add("maxwell_general_diff", max_abs(2.0 * einstein_skew(s) - maxwell), std::max(tol, 1e-10));
    r.add("einstein_general_diff", max_abs(einstein_sym(s, kappa) - e3), std::max(tol, 1e-10));
    r.add("dilaton_gradient", (f * s.phi - df).cwiseAbs().maxCoeff(), tol);
    r.add("scalar_identity", std::abs(sc - 3.0 * delta_phi - 2.0 * lower_dot(s.phi, s.phi, g) + 0.5 * f * f), tol);
    r.set_info("kappa", kappa);
    r.set_info("f", f);
    r.set_info("scalar_curvature", sc);
    return r;
}

ConstantDilatonClass classify_constant_dilaton(const Mat& ric, const Metric& g, double kappa, double tol) {
    if (!(kappa > 0.0)) throw std::invalid_argument("classification requires kappa > 0");
    if (g.dim() != 3) throw std::invalid_argument("classification requires dimension 3");
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(symmetric_part(ric), g.g());
    ConstantDilatonClass out;
    out.eigenvalues = es.eigenvalues();  // ascending
    const double k = 1.0 / kappa;
    struct Case {
        int id;
        double lam[3];
        double f2;
    };
    // ordered by symmetry: all equal first
    const Case cases[3] = {{3, {-0.5 * k, -0.5 * k, -0.5 * k}, 3.0 * k},
                           {1, {-0.5 * k, -0.5 * k, 0.5 * k}, 1.0 * k},
                           {2, {-1.0 * k, 0.0, 0.0}, 2.0 * k}};
    int matches = 0;
    for (const auto& c : cases) {
        double d = 0.0;
        for (int i = 0; i < 3; ++i) d = std::max(d, std::abs(out.eigenvalues(i) - c.lam[i]));
        if (d <= tol * k) {
            if (matches == 0) {
                out.case_id = c.id;
                out.f = std::sqrt(c.f2);
            }
            ++matches;
        }
    }
    out.degenerate_tie = matches > 1;
    const double sc = trace(ric, g);
    const double f = out.f;
    out.scalar_residual = std::abs(sc + 0.5 * f * f);
    out.trace_residual = std::abs(2.0 * kappa * bilinear_norm_sq(ric, g) - 2.0 * f * f + 0.5 * kappa * f * f * f * f);
    return out;
}

Mat quadratic_form_residual(const Mat& ric, const Metric& g, double f, double kappa) {
    return -kappa * ric_circ_ric(ric, g) + (1.0 - kappa * f * f) * ric +
           0.5 * (f * f - 0.5 * kappa * f * f * f * f) * g.g();
}

double quadratic_discriminant(double f, double kappa) {
    const double a = -kappa;
    const double b = 1.0 - kappa * f * f;
    const double c = 0.5 * (f * f - 0.5 * kappa * f * f * f * f);
    return b * b - 4.0 * a * c;
}

ResidualReport strong_residual(const SolitonCandidate& c, double tol) {
    const GeometrySample& s = c.sample;
    ResidualReport r;
    r.add("strong_full", strong_tensor(s).max_abs(), tol);
    r.add("strong_skew", strong_skew_projection(s).max_abs(), tol);
    if (s.dim() == 3) r.add("strong_reduced_3d", strong_reduced_3d(s).max_abs(), tol);
    r.set_info("kappa", c.kappa);
    return r;
}

InvariantGeometry heisenberg_geometry(double kappa) {
    if (!(kappa > 0.0)) throw std::invalid_argument("heisenberg soliton requires kappa > 0");
    const double f = 1.0 / std::sqrt(kappa);
    Mat g = Mat::Identity(3, 3);
    g(0, 0) = f * f;
    InvariantGeometry geom(catalog("heisenberg"), Metric(g));
    geom.set_dilaton_density(f);
    return geom;
}

SolitonCandidate heisenberg_strong_soliton(double kappa) {
    return {build_sample_invariant(heisenberg_geometry(kappa)), kappa};
}

InvariantGeometry hyperbolic_geometry(double kappa) {
    if (!(kappa > 0.0)) throw std::invalid_argument("hyperbolic soliton requires kappa > 0");
    InvariantGeometry geom(catalog("hyperbolic", 1.0 / (2.0 * std::sqrt(kappa))), Metric(Mat::Identity(3, 3)));
    geom.set_dilaton_density(std::sqrt(3.0 / kappa));
    return geom;
}

SolitonCandidate hyperbolic_soliton(double kappa) {
    return {build_sample_invariant(hyperbolic_geometry(kappa)), kappa};
}

XiExtraction extract_xi(const InvariantGeometry& geom, double f) {
    XiExtraction out;
    if (geom.g.dim() != 3) return out;
    const Metric& g = geom.g;
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(symmetric_part(geom.ric), g.g());
    const Vec lam = es.eigenvalues();
    const double gap = 1e-6 * std::abs(geom.s) + 1e-12;
    int simple = -1;
    for (int i = 0; i < 3; ++i) {
        if (lam(i) <= gap) continue;
        bool isolated = true;
        for (int j = 0; j < 3; ++j)
            if (j != i && std::abs(lam(j) - lam(i)) <= gap) isolated = false;
        if (isolated) simple = i;
    }
    if (simple < 0) return out;
    Vec xi = es.eigenvectors().col(simple);
    xi /= std::sqrt(xi.dot(g.g() * xi));
    double best_d = 0.0, best_n = 0.0;
    for (int sign : {1, -1}) {
        const Vec x = sign * xi;
        const Vec xl = g.g() * x;
        Mat Dxi(3, 3);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                double v = 0.0;
                for (int k = 0; k < 3; ++k) v -= geom.gamma(k, a, b) * xl(k);
                Dxi(a, b) = v;
            }
        const Mat st = hodge_star_1form(xl, g);
        const double d_res = max_abs(Dxi - Dxi.transpose() + f * st);
        const double n_res = max_abs(Dxi + 0.5 * f * st);
        if (sign == 1 || d_res < best_d) {
            best_d = d_res;
            best_n = n_res;
            out.xi = x;
        }
    }
    out.d_xi_residual = best_d;
    out.nabla_xi_residual = best_n;
    out.ok = best_d <= 1e-9 * std::max(1.0, std::abs(f));
    return out;
}

double auxiliary_connection_curvature(const InvariantGeometry& geom, const Vec& xi, double f) {
    const int n = 3;
    const Metric& g = geom.g;
    Tensor gamma = geom.gamma;
    const Vec xl = g.g() * xi;
    const Mat star_xi = endo_from_form(hodge_star_1form(xl, g), g);
    for (int a = 0; a < n; ++a) {
        const Mat star_a = endo_from_form(hodge_star_1form(row(g.g(), a), g), g);
        const Mat shift = -0.5 * f * star_a + f * xl(a) * star_xi;
        for (int k = 0; k < n; ++k)
            for (int b = 0; b < n; ++b) gamma(k, a, b) += shift(k, b);
    }
    return invariant_connection_curvature(geom.alg, gamma, g).max_abs();
}

ResidualReport verify_curvature_identities_3d(const GeometrySample& s, double tol) {
    if (s.dim() != 3) throw std::invalid_argument("verify_curvature_identities_3d requires dimension 3");
    const Metric& g = s.g;
    const Mat ric = ricci(s);
    const double sc = trace(ric, g), f = s.f;
    const double ric2 = bilinear_norm_sq(ric, g);
    const double df2 = lower_dot(s.df, s.df, g);
    auto rel_t = [](const Tensor& a, const Tensor& b) { return max_abs_diff(a, b) / std::max(1.0, b.max_abs()); };
    auto rel_m = [](const Mat& a, const Mat& b) { return max_abs(a - b) / std::max(1.0, max_abs(b)); };
    auto rel_s = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };

    ResidualReport r;
    r.add("reconstruction", rel_t(s.R, reconstruct_riemann_3d(ric, sc, g)), tol);
    r.add("r_circ_r", rel_m(r_circ_r(s.R, g), -ric_circ_ric(ric, g) + sc * ric + (ric2 - 0.5 * sc * sc) * g.g()), tol);
    r.add("norm", rel_s(curvature_norm_sq(s.R, g), ric2 - 0.25 * sc * sc), tol);

    const Tensor Rt = torsion_curvature(s);
    const Mat star_df = endo_from_form(hodge_star_1form(s.df, g), g);
    const Mat comm = bilinear_from_endo(endo_commutator(star_df, endo_from_bilinear(ric, g)), g);
    const Mat torsion_rr = -ric_circ_ric(ric, g) + (sc - 0.5 * f * f) * ric +
                      (ric2 - 0.5 * sc * sc + 0.25 * df2 + 0.125 * f * f * f * f) * g.g() + 0.5 * comm +
                      0.25 * s.df * s.df.transpose();
    r.add("torsion_r_circ_r", rel_m(r_circ_r(Rt, g), torsion_rr), tol);
    r.add("torsion_norm",
          rel_s(curvature_norm_sq(Rt, g), ric2 - 0.25 * sc * sc - 0.25 * f * f * sc + 0.5 * df2 + 0.1875 * f * f * f * f),
          tol);
    const Mat dH = to_matrix(codifferential(s.DH, g));
    r.add("torsion_ricci", rel_m(torsion_ricci(s), ric - 0.5 * h_circ_h(s.H, g) + 0.5 * dH), tol);
    return r;
}

ResidualReport verify_divergence_identities(const GeometrySample& s, double kappa, std::uint64_t probe_seed,
                                          double tol) {
    require_depth(s, 2, "verify_divergence_identities");
    const int n = s.dim();
    const Metric& g = s.g;
    const Mat& gi = g.inv();
    const Vec phi_up = sharp(s.phi, g);

    const Tensor Rt = torsion_curvature(s);
    const Tensor DRt = torsion_curvature_derivative(s);
    const Tensor S = torsion_curvature_adjoint(s);
    const Tensor RR = r_wedge_r(Rt, g);
    const Tensor EB = bianchi_form(s, kappa);
    const Mat Ea = einstein_skew(s);
    const Mat Es = einstein_sym(s, kappa);
    const Mat HH = h_circ_h(s.H, g);
    const Mat RtRt = r_circ_r(Rt, g);

    // derivatives of the symmetric pieces
    const Tensor DHH = circ_derivative(s.H, s.DH, g, 0.5);
    const Tensor DRR = circ_derivative(Rt, DRt, g, 0.5);
    const Tensor DRic = ricci_derivative(s);
    Tensor DEs = DRic;
    for (int e = 0; e < n; ++e)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                DEs(e, b, c) += 0.5 * (s.DDphi(e, b, c) + s.DDphi(e, c, b)) - 0.5 * DHH(e, b, c) + kappa * DRR(e, b, c);

    // gradients of scalar quantities
    Vec d_norm_H(n), d_norm_R(n), d_ED(n), d_tr(n);
    for (int v = 0; v < n; ++v) {
        d_norm_H(v) = 2.0 * form_inner(slice(s.DH, v), s.H, g);
        d_norm_R(v) = 0.5 * full_contract(slice(DRt, v), Rt, g);
        double d_delta_phi = 0.0, d_phi2 = 0.0, tr = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                d_delta_phi -= gi(a, b) * s.DDphi(v, a, b);
                d_phi2 += 2.0 * gi(a, b) * s.Dphi(v, a) * s.phi(b);
                tr += gi(a, b) * DEs(v, a, b);
            }
        d_ED(v) = d_delta_phi + d_phi2 - d_norm_H(v) + kappa * d_norm_R(v);
        d_tr(v) = tr;
    }

    const Vec div_RR = divergence(DRR, g);
    const Vec div_HH = divergence(DHH, g);
    const Vec div_Es = divergence(DEs, g);

    // per-basis-vector lhs/rhs and term magnitudes
    Mat lhs(3, n), rhs(3, n), mag(3, n);
    for (int v = 0; v < n; ++v) {
        const Vec ev = basis(n, v);
        const Tensor Rv = slice(Rt, v);
        const Tensor Hv = slice(s.H, v);
        const double hrr = form_inner(s.H, interior(ev, RR), g);
        const double heb = form_inner(s.H, interior(ev, EB), g);
        const double ea_hv = inner_12(from_matrix(Ea), Hv, g);

        const double t1 = inner_12(S, Rv, g);
        lhs(0, v) = div_RR(v);
        rhs(0, v) = t1 - 0.5 * d_norm_R(v) - 0.5 * hrr;
        mag(0, v) = std::abs(div_RR(v)) + std::abs(t1) + 0.5 * std::abs(d_norm_R(v)) + 0.5 * std::abs(hrr);

        const double hh_phi = phi_up.dot(HH.col(v));
        lhs(1, v) = div_HH(v);
        rhs(1, v) = -0.5 * d_norm_H(v) - hh_phi - kappa * hrr + 2.0 * ea_hv + heb;
        mag(1, v) = std::abs(div_HH(v)) + 0.5 * std::abs(d_norm_H(v)) + std::abs(hh_phi) + kappa * std::abs(hrr) +
                    2.0 * std::abs(ea_hv) + std::abs(heb);

        const double es_phi = phi_up.dot(Es.col(v));
        const double strong = kappa * inner_12(Rv, S + interior(phi_up, Rt), g);
        lhs(2, v) = div_Es(v) + es_phi + 0.5 * d_tr(v);
        rhs(2, v) = strong + 0.5 * d_ED(v) - ea_hv - 0.5 * heb;
        mag(2, v) = std::abs(div_Es(v)) + std::abs(es_phi) + 0.5 * std::abs(d_tr(v)) + std::abs(strong) +
                    0.5 * std::abs(d_ED(v)) + std::abs(ea_hv) + 0.5 * std::abs(heb);
    }
    (void)RtRt;

    std::mt19937_64 rng(probe_seed);
    std::normal_distribution<double> N(0.0, 1.0);
    const char* names[3] = {"div_rr", "div_hh", "divergence"};
    double worst[3] = {0.0, 0.0, 0.0};
    for (int probe = 0; probe < 3; ++probe) {
        Vec p(n);
        for (int i = 0; i < n; ++i) p(i) = N(rng);
        for (int k = 0; k < 3; ++k) {
            const double diff = std::abs((lhs.row(k) - rhs.row(k)).dot(p));
            const double scale = std::max(1.0, (mag.row(k).cwiseProduct(p.cwiseAbs().transpose())).sum());
            worst[k] = std::max(worst[k], diff / scale);
        }
    }
    ResidualReport r;
    for (int k = 0; k < 3; ++k) r.add(names[k], worst[k], tol);
    r.set_info("kappa", kappa);
    return r;
}

}  // namespace hetflow
