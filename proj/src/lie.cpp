#include "hetflow/lie.hpp"

#include <cmath>
#include <stdexcept>

namespace hetflow {

namespace {

Vec basis(int n, int i) {
    Vec v = Vec::Zero(n);
    v(i) = 1.0;
    return v;
}

}  // namespace

LieAlgebraData make_algebra(int n, std::string name) {
    if (n < 1 || n > 6) throw std::invalid_argument("Lie algebra dimension must be in 1..6");
    LieAlgebraData alg;
    alg.n = n;
    alg.c = Tensor(n, 3);
    alg.name = std::move(name);
    return alg;
}

void set_bracket(LieAlgebraData& alg, int i, int j, const Vec& v) {
    if (i == j) throw std::invalid_argument("set_bracket: [e_i, e_i] is zero");
    for (int k = 0; k < alg.n; ++k) {
        alg.c(k, i, j) = v(k);
        alg.c(k, j, i) = -v(k);
    }
}

Vec LieAlgebraData::bracket(const Vec& x, const Vec& y) const {
    Vec out = Vec::Zero(n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out(k) += c(k, i, j) * x(i) * y(j);
    return out;
}

double LieAlgebraData::jacobi_residual() const {
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                Vec ei = basis(n, i), ej = basis(n, j), ek = basis(n, k);
                Vec cyc = bracket(bracket(ei, ej), ek) + bracket(bracket(ej, ek), ei) + bracket(bracket(ek, ei), ej);
                worst = std::max(worst, cyc.cwiseAbs().maxCoeff());
            }
    return worst;
}

bool LieAlgebraData::unimodular(double tol) const {
    for (int j = 0; j < n; ++j) {
        double tr = 0.0;
        for (int i = 0; i < n; ++i) tr += c(i, i, j);
        if (std::abs(tr) > tol) return false;
    }
    return true;
}

LieAlgebraData milnor_algebra(double l1, double l2, double l3, std::string name) {
    LieAlgebraData alg = make_algebra(3, std::move(name));
    set_bracket(alg, 1, 2, l1 * basis(3, 0));
    set_bracket(alg, 2, 0, l2 * basis(3, 1));
    set_bracket(alg, 0, 1, l3 * basis(3, 2));
    return alg;
}

LieAlgebraData catalog(std::string_view name, std::optional<double> param) {
    if (name == "r3") return make_algebra(3, "r3");
    if (name == "heisenberg") return milnor_algebra(1.0, 0.0, 0.0, "heisenberg");
    if (name == "su2") {
        if (!param) return milnor_algebra(1.0, 1.0, 1.0, "su2");
        const double k = *param;
        if (!(k > 0.0)) throw std::invalid_argument("su2: kappa must be positive");
        const double r = std::sqrt(k);
        return milnor_algebra(1.0 / (2.0 * r), 1.0 / (2.0 * r), 2.0 / r, "su2");
    }
    if (name == "sl2r") return milnor_algebra(1.0, 1.0, -1.0, "sl2r");
    if (name == "e2") return milnor_algebra(1.0, 1.0, 0.0, "e2");
    if (name == "e11") return milnor_algebra(1.0, -1.0, 0.0, "e11");
    if (name == "hyperbolic") {
        const double c = param.value_or(1.0);
        LieAlgebraData alg = make_algebra(3, "hyperbolic");
        set_bracket(alg, 2, 0, c * basis(3, 0));
        set_bracket(alg, 2, 1, c * basis(3, 1));
        return alg;
    }
    throw std::invalid_argument("unknown algebra: " + std::string(name));
}

const std::vector<std::string>& catalog_names() {
    static const std::vector<std::string> names = {"r3", "heisenberg", "su2", "sl2r", "e11", "e2", "hyperbolic"};
    return names;
}

Tensor levi_civita_invariant(const LieAlgebraData& alg, const Metric& g) {
    const int n = alg.n;
    if (g.dim() != n) throw std::invalid_argument("metric/algebra dimension mismatch");
    // c_low(x, y, z) = g([e_x, e_y], e_z)
    Tensor cl(n, 3);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            for (int z = 0; z < n; ++z) {
                double s = 0.0;
                for (int k = 0; k < n; ++k) s += alg.c(k, x, y) * g(k, z);
                cl(x, y, z) = s;
            }
    Tensor gamma(n, 3);
    const Mat& gi = g.inv();
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int k = 0; k < n; ++k) {
                double s = 0.0;
                for (int z = 0; z < n; ++z) s += gi(k, z) * 0.5 * (cl(a, b, z) - cl(b, z, a) + cl(z, a, b));
                gamma(k, a, b) = s;
            }
    return gamma;
}

Tensor invariant_connection_curvature(const LieAlgebraData& alg, const Tensor& gamma, const Metric& g) {
    const int n = alg.n;
    Tensor up(n, 4);  // (a, b, c, k)
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int k = 0; k < n; ++k) {
                    double s = 0.0;
                    for (int m = 0; m < n; ++m)
                        s += gamma(m, b, c) * gamma(k, a, m) - gamma(m, a, c) * gamma(k, b, m) -
                             alg.c(m, a, b) * gamma(k, m, c);
                    up(a, b, c, k) = s;
                }
    Tensor R(n, 4);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    double s = 0.0;
                    for (int k = 0; k < n; ++k) s += up(a, b, c, k) * g(k, d);
                    R(a, b, c, d) = s;
                }
    return R;
}

InvariantCurvature invariant_curvature(const LieAlgebraData& alg, const Metric& g) {
    InvariantCurvature out;
    out.R = invariant_connection_curvature(alg, levi_civita_invariant(alg, g), g);
    out.ric = ricci_from_riemann(out.R, g);
    out.s = trace(out.ric, g);
    return out;
}

Tensor invariant_covariant_derivative(const Tensor& T, const Tensor& gamma) {
    const int n = T.dim(), r = T.rank();
    Tensor out(n, r + 1);
    std::vector<int> idx(r + 1), src(r);
    for (std::size_t q = 0; q < out.size(); ++q) {
        out.unflatten(q, idx.data());
        const int e = idx[0];
        for (int i = 0; i < r; ++i) src[i] = idx[i + 1];
        double s = 0.0;
        for (int slot = 0; slot < r; ++slot) {
            const int keep = src[slot];
            for (int k = 0; k < n; ++k) {
                src[slot] = k;
                s -= gamma(k, e, keep) * T.at(src.data());
            }
            src[slot] = keep;
        }
        out[q] = s;
    }
    return out;
}

Tensor invariant_torsion(const LieAlgebraData& alg, const Tensor& gamma) {
    const int n = alg.n;
    Tensor T(n, 3);
    for (int k = 0; k < n; ++k)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) T(k, a, b) = gamma(k, a, b) - gamma(k, b, a) - alg.c(k, a, b);
    return T;
}

bool is_closed_invariant(const LieAlgebraData& alg, const Vec& phi, double tol) {
    for (int i = 0; i < alg.n; ++i)
        for (int j = 0; j < alg.n; ++j) {
            double s = 0.0;
            for (int k = 0; k < alg.n; ++k) s += phi(k) * alg.c(k, i, j);
            if (std::abs(s) > tol) return false;
        }
    return true;
}

InvariantGeometry::InvariantGeometry(LieAlgebraData a, const Metric& metric)
    : alg(std::move(a)), g(metric), H(metric.dim(), 3), phi(Vec::Zero(metric.dim())) {
    if (g.dim() != alg.n) throw std::invalid_argument("metric/algebra dimension mismatch");
    gamma = levi_civita_invariant(alg, g);
    R = invariant_connection_curvature(alg, gamma, g);
    ric = ricci_from_riemann(R, g);
    s = trace(ric, g);
}

void InvariantGeometry::set_dilaton_density(double f) {
    if (alg.n != 3) throw std::invalid_argument("dilaton density requires dimension 3");
    H = volume_form(g);
    H *= f;
}

void InvariantGeometry::set_three_form(const Tensor& h) {
    if (h.rank() != 3 || h.dim() != alg.n) throw std::invalid_argument("three-form shape mismatch");
    if (!is_alternating(h)) throw std::invalid_argument("three-form is not alternating");
    H = h;
}

void InvariantGeometry::set_closed_form(const Vec& p) {
    if (p.size() != alg.n) throw std::invalid_argument("one-form dimension mismatch");
    if (!is_closed_invariant(alg, p)) throw std::invalid_argument("one-form is not closed");
    phi = p;
}

GeometrySample build_sample_invariant(const InvariantGeometry& geom) {
    GeometrySample s{geom.g};
    s.jet_depth = 2;
    s.gamma = geom.gamma;
    s.R = geom.R;
    s.DR = invariant_covariant_derivative(geom.R, geom.gamma);
    s.H = geom.H;
    s.DH = invariant_covariant_derivative(geom.H, geom.gamma);
    s.DDH = invariant_covariant_derivative(s.DH, geom.gamma);
    s.phi = geom.phi;
    Tensor dphi = invariant_covariant_derivative(from_vector(geom.phi), geom.gamma);
    s.Dphi = to_matrix(dphi);
    s.DDphi = invariant_covariant_derivative(dphi, geom.gamma);
    fill_dilaton_density(s);
    return s;
}

Mat random_spd(std::mt19937_64& rng, int n, double lo, double hi) {
    std::normal_distribution<double> N(0.0, 1.0);
    std::uniform_real_distribution<double> U(lo, hi);
    Mat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = N(rng);
    Eigen::HouseholderQR<Mat> qr(a);
    Mat q = qr.householderQ();
    Vec d(n);
    for (int i = 0; i < n; ++i) d(i) = U(rng);
    Mat g = q * d.asDiagonal() * q.transpose();
    return 0.5 * (g + g.transpose());
}

}  // namespace hetflow
