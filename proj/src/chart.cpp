#include "hetflow/chart.hpp"

#include <stdexcept>

namespace hetflow {

namespace {

constexpr int kN = 3;

std::size_t pow3(int r) {
    std::size_t k = 1;
    for (int i = 0; i < r; ++i) k *= kN;
    return k;
}

/// Rank-r array of jets over the 3-dimensional chart.
struct JetTensor {
    explicit JetTensor(int r) : rank(r), v(pow3(r)) {}

    int rank;
    std::vector<Jet> v;

    template <class... I>
    Jet& operator()(I... idx) {
        std::size_t k = 0;
        ((k = k * kN + static_cast<std::size_t>(idx)), ...);
        return v[k];
    }
    template <class... I>
    const Jet& operator()(I... idx) const {
        std::size_t k = 0;
        ((k = k * kN + static_cast<std::size_t>(idx)), ...);
        return v[k];
    }

    Tensor value() const {
        Tensor t(kN, rank);
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (v[k].order() < 0) throw std::logic_error("jet evaluated beyond its exact order");
            t[k] = v[k].value();
        }
        return t;
    }
};

void unflatten(std::size_t k, int r, int* idx) {
    for (int i = r - 1; i >= 0; --i) {
        idx[i] = static_cast<int>(k % kN);
        k /= kN;
    }
}

std::size_t flatten(int r, const int* idx) {
    std::size_t k = 0;
    for (int i = 0; i < r; ++i) k = k * kN + static_cast<std::size_t>(idx[i]);
    return k;
}

JetTensor metric_jets(const PolyMetric& m) {
    JetTensor g(2);
    for (int i = 0; i < kN; ++i)
        for (int j = 0; j < kN; ++j) g(i, j) = taylor_shift(m.g[i][j], m.p);
    return g;
}

Mat value_matrix(const JetTensor& t) {
    Mat out(kN, kN);
    for (int i = 0; i < kN; ++i)
        for (int j = 0; j < kN; ++j) out(i, j) = t(i, j).value();
    return out;
}

JetTensor matmul(const JetTensor& a, const JetTensor& b) {
    JetTensor out(2);
    for (int i = 0; i < kN; ++i)
        for (int j = 0; j < kN; ++j) {
            Jet s = Jet::constant(0.0);
            for (int k = 0; k < kN; ++k) s += a(i, k) * b(k, j);
            out(i, j) = s;
        }
    return out;
}

// G^{-1} = Σ_k (-G0^{-1} N)^k G0^{-1} with N = G - G(p).
JetTensor inverse_jets(const JetTensor& g) {
    Mat g0 = value_matrix(g);
    Mat g0i = Metric(g0).inv();
    int order = Jet::kDegree;
    JetTensor M(2), G0i(2);
    for (int i = 0; i < kN; ++i)
        for (int j = 0; j < kN; ++j) {
            order = std::min(order, g(i, j).order());
            G0i(i, j) = Jet::constant(g0i(i, j));
        }
    JetTensor Nn(2);
    for (int i = 0; i < kN; ++i)
        for (int j = 0; j < kN; ++j) {
            Nn(i, j) = g(i, j);
            Nn(i, j) -= Jet::constant(g0(i, j));
        }
    M = matmul(G0i, Nn);
    for (auto& x : M.v) x *= -1.0;
    JetTensor term = G0i, sum = G0i;
    for (int k = 1; k <= Jet::kDegree; ++k) {
        term = matmul(M, term);
        for (std::size_t q = 0; q < sum.v.size(); ++q) sum.v[q] += term.v[q];
    }
    for (auto& x : sum.v) x.set_order(order);
    return sum;
}

JetTensor christoffel_jets(const JetTensor& g, const JetTensor& gi) {
    JetTensor gamma(3);
    for (int k = 0; k < kN; ++k)
        for (int i = 0; i < kN; ++i)
            for (int j = 0; j < kN; ++j) {
                Jet s = Jet::constant(0.0);
                for (int l = 0; l < kN; ++l) s += gi(k, l) * (g(j, l).d(i) + g(i, l).d(j) - g(i, j).d(l));
                gamma(k, i, j) = 0.5 * s;
            }
    return gamma;
}

// R[a][b][c][d] = g(R_{ab} ∂_c, ∂_d) for the connection with coefficients gamma(k, a, b).
JetTensor curvature_jets(const JetTensor& gamma, const JetTensor& g) {
    JetTensor up(4);  // R^k_{abc} stored (a,b,c,k)
    for (int a = 0; a < kN; ++a)
        for (int b = 0; b < kN; ++b)
            for (int c = 0; c < kN; ++c)
                for (int k = 0; k < kN; ++k) {
                    Jet s = gamma(k, b, c).d(a) - gamma(k, a, c).d(b);
                    for (int m = 0; m < kN; ++m) s += gamma(m, b, c) * gamma(k, a, m) - gamma(m, a, c) * gamma(k, b, m);
                    up(a, b, c, k) = s;
                }
    JetTensor R(4);
    for (int a = 0; a < kN; ++a)
        for (int b = 0; b < kN; ++b)
            for (int c = 0; c < kN; ++c)
                for (int d = 0; d < kN; ++d) {
                    Jet s = Jet::constant(0.0);
                    for (int k = 0; k < kN; ++k) s += up(a, b, c, k) * g(k, d);
                    R(a, b, c, d) = s;
                }
    return R;
}

// (∇T)(e, i_1..i_r) = ∂_e T(i..) - Σ_s Γ^k_{e i_s} T(..k..)
JetTensor covariant(const JetTensor& T, const JetTensor& gamma) {
    const int r = T.rank;
    JetTensor out(r + 1);
    std::vector<int> idx(r + 1), src(r);
    for (std::size_t q = 0; q < out.v.size(); ++q) {
        unflatten(q, r + 1, idx.data());
        const int e = idx[0];
        for (int i = 0; i < r; ++i) src[i] = idx[i + 1];
        Jet s = T.v[flatten(r, src.data())].d(e);
        for (int slot = 0; slot < r; ++slot) {
            const int keep = src[slot];
            for (int k = 0; k < kN; ++k) {
                src[slot] = k;
                s -= gamma(k, e, keep) * T.v[flatten(r, src.data())];
            }
            src[slot] = keep;
        }
        out.v[q] = s;
    }
    return out;
}

Jet determinant(const JetTensor& g) {
    return g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1)) - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0)) +
           g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0));
}

JetTensor three_form_jets(const JetTensor& g, const Jet& f) {
    Jet vol = f * sqrt(determinant(g));
    JetTensor H(3);
    const int perms[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {0, 2, 1}, {2, 1, 0}, {1, 0, 2}};
    for (int p = 0; p < 6; ++p) H(perms[p][0], perms[p][1], perms[p][2]) = (p < 3 ? 1.0 : -1.0) * vol;
    for (auto& x : H.v) x.set_order(vol.order());
    return H;
}

struct Core {
    JetTensor g{2}, gi{2}, gamma{3};
};

Core core_jets(const PolyMetric& m) {
    Core c;
    c.g = metric_jets(m);
    (void)Metric(value_matrix(c.g));  // SPD validation at p
    c.gi = inverse_jets(c.g);
    c.gamma = christoffel_jets(c.g, c.gi);
    return c;
}

}  // namespace

PolyMetric constant_metric(const Mat& g) {
    PolyMetric m;
    for (int i = 0; i < kN; ++i)
        for (int j = 0; j < kN; ++j) m.g[i][j] = Jet::constant(g(i, j));
    return m;
}

ChristoffelAt christoffel_at(const PolyMetric& m) {
    Core c = core_jets(m);
    ChristoffelAt out;
    out.gamma = c.gamma.value();
    out.dgamma = Tensor(kN, 4);
    out.ddgamma = Tensor(kN, 5);
    for (int e = 0; e < kN; ++e)
        for (int k = 0; k < kN; ++k)
            for (int i = 0; i < kN; ++i)
                for (int j = 0; j < kN; ++j) {
                    const Jet de = c.gamma(k, i, j).d(e);
                    out.dgamma(e, k, i, j) = de.value();
                    for (int f = 0; f < kN; ++f) out.ddgamma(e, f, k, i, j) = de.d(f).value();
                }
    return out;
}

RiemannAt riemann_at(const PolyMetric& m) {
    Core c = core_jets(m);
    JetTensor R = curvature_jets(c.gamma, c.g);
    RiemannAt out;
    out.R = R.value();
    Metric g(value_matrix(c.g));
    out.ric = ricci_from_riemann(out.R, g);
    out.s = trace(out.ric, g);
    out.DR = covariant(R, c.gamma).value();
    return out;
}

Tensor torsion_curvature_at(const PolyMetric& m, const Jet& f) {
    Core c = core_jets(m);
    JetTensor H = three_form_jets(c.g, f);
    JetTensor conn = c.gamma;
    for (int k = 0; k < kN; ++k)
        for (int a = 0; a < kN; ++a)
            for (int b = 0; b < kN; ++b)
                for (int q = 0; q < kN; ++q) conn(k, a, b) -= 0.5 * (c.gi(k, q) * H(a, b, q));
    return curvature_jets(conn, c.g).value();
}

GeometrySample build_sample(const PolyMetric& m, const Jet& f, const Jet& potential, int depth) {
    if (depth < 0 || depth > 2) throw std::invalid_argument("build_sample: depth must be 0, 1 or 2");
    Core c = core_jets(m);
    GeometrySample s{Metric(value_matrix(c.g))};
    s.jet_depth = depth;
    s.gamma = c.gamma.value();

    JetTensor R = curvature_jets(c.gamma, c.g);
    s.R = R.value();

    JetTensor H = three_form_jets(c.g, f);
    s.H = H.value();

    JetTensor phi(1);
    for (int a = 0; a < kN; ++a) phi(a) = potential.d(a);
    for (int a = 0; a < kN; ++a) s.phi(a) = phi(a).value();

    if (depth >= 1) {
        JetTensor DH = covariant(H, c.gamma);
        s.DH = DH.value();
        JetTensor Dphi = covariant(phi, c.gamma);
        Tensor dp = Dphi.value();
        for (int a = 0; a < kN; ++a)
            for (int b = 0; b < kN; ++b) s.Dphi(a, b) = dp(a, b);
        if (depth >= 2) {
            s.DR = covariant(R, c.gamma).value();
            s.DDH = covariant(DH, c.gamma).value();
            s.DDphi = covariant(Dphi, c.gamma).value();
        }
    }
    fill_dilaton_density(s);
    return s;
}

GeometrySample build_sample_poly(const PolyMetric& m, const Poly3& f, const Poly3& potential, int depth) {
    return build_sample(m, taylor_shift(f, m.p), taylor_shift(potential, m.p), depth);
}

Poly3 random_poly(std::mt19937_64& rng, double amplitude, int max_degree) {
    std::uniform_real_distribution<double> U(-amplitude, amplitude);
    Poly3 p;
    for (int k = 0; k < Jet::kTerms; ++k) {
        const auto& e = Jet::exponent(k);
        if (e[0] + e[1] + e[2] > max_degree) continue;
        p.set_coeff(e[0], e[1], e[2], U(rng));
    }
    return p;
}

PolyMetric random_poly_metric(std::mt19937_64& rng, double amplitude) {
    PolyMetric m;
    for (int i = 0; i < kN; ++i)
        for (int j = i; j < kN; ++j) {
            Poly3 p = random_poly(rng, amplitude);
            if (i == j) p.set_coeff(0, 0, 0, p.coeff(0, 0, 0) + 1.0);
            m.set(i, j, p);
        }
    return m;
}

ChartInputs random_chart_inputs(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ChartInputs in;
    in.metric = random_poly_metric(rng, 0.3);
    in.f = random_poly(rng, 0.3);
    in.f.set_coeff(0, 0, 0, in.f.coeff(0, 0, 0) + 1.0);
    in.potential = random_poly(rng, 0.3);
    return in;
}

}  // namespace hetflow
