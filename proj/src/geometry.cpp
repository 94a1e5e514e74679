#include "hetflow/geometry.hpp"

#include <stdexcept>
#include <string>

namespace hetflow {

namespace {

// T(a,b,x,y) = Σ g^{mc} [X(b,x,c) Y(a,m,y) - X(a,x,c) Y(b,m,y)]
Tensor commutator_form(const Tensor& X, const Tensor& Y, const Metric& g) {
    const int n = g.dim();
    Tensor Xu = raise_slot(X, 2, g);
    Tensor out(n, 4);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y) {
                    double s = 0.0;
                    for (int m = 0; m < n; ++m) s += Xu(b, x, m) * Y(a, m, y) - Xu(a, x, m) * Y(b, m, y);
                    out(a, b, x, y) = s;
                }
    return out;
}

Tensor slice_first(const Tensor& t, int e) {
    Tensor out(t.dim(), t.rank() - 1);
    const std::size_t block = out.size();
    for (std::size_t k = 0; k < block; ++k) out[k] = t[e * block + k];
    return out;
}

}  // namespace

GeometrySample::GeometrySample(const Metric& metric)
    : g(metric),
      gamma(metric.dim(), 3),
      R(metric.dim(), 4),
      DR(metric.dim(), 5),
      H(metric.dim(), 3),
      DH(metric.dim(), 4),
      DDH(metric.dim(), 5),
      phi(Vec::Zero(metric.dim())),
      Dphi(Mat::Zero(metric.dim(), metric.dim())),
      DDphi(metric.dim(), 3),
      df(Vec::Zero(metric.dim())),
      hess_f(Mat::Zero(metric.dim(), metric.dim())) {}

void require_depth(const GeometrySample& s, int required, const char* what) {
    if (s.jet_depth < required)
        throw std::invalid_argument(std::string(what) + ": sample jet depth " + std::to_string(s.jet_depth) +
                                    " < " + std::to_string(required));
}

void fill_dilaton_density(GeometrySample& s) {
    if (s.dim() != 3) return;
    const int n = 3;
    s.f = hodge_star(s.H, s.g)[0];
    for (int e = 0; e < n; ++e) s.df(e) = hodge_star(slice_first(s.DH, e), s.g)[0];
    for (int e1 = 0; e1 < n; ++e1)
        for (int e2 = 0; e2 < n; ++e2)
            s.hess_f(e1, e2) = hodge_star(slice_first(slice_first(s.DDH, e1), e2), s.g)[0];
}

Tensor codifferential(const Tensor& Dalpha, const Metric& g) {
    const int n = g.dim();
    Tensor out(n, Dalpha.rank() - 2);
    const std::size_t block = out.size();
    const Mat& gi = g.inv();
    for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c) {
            const double w = gi(a, c);
            if (w == 0.0) continue;
            for (std::size_t k = 0; k < block; ++k) out[k] -= w * Dalpha[(a * n + c) * block + k];
        }
    return out;
}

Tensor exterior_derivative(const Tensor& Dalpha) {
    const int n = Dalpha.dim();
    const int r = Dalpha.rank();  // p + 1
    Tensor out(n, r);
    std::vector<int> idx(r), src(r);
    for (std::size_t k = 0; k < out.size(); ++k) {
        out.unflatten(k, idx.data());
        double s = 0.0;
        for (int i = 0; i < r; ++i) {
            src[0] = idx[i];
            int pos = 1;
            for (int j = 0; j < r; ++j)
                if (j != i) src[pos++] = idx[j];
            s += ((i % 2) ? -1.0 : 1.0) * Dalpha.at(src.data());
        }
        out[k] = s;
    }
    return out;
}

Tensor h_commutator_tensor(const Tensor& H, const Metric& g) { return commutator_form(H, H, g); }

Tensor torsion_curvature(const GeometrySample& s) {
    const int n = s.dim();
    Tensor K = h_commutator_tensor(s.H, s.g);
    Tensor out(n, 4);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y)
                    out(a, b, x, y) = s.R(a, b, x, y) - 0.5 * s.DH(a, b, x, y) + 0.5 * s.DH(b, a, x, y) +
                                      0.25 * K(a, b, x, y);
    return out;
}

Tensor torsion_curvature_derivative(const GeometrySample& s) {
    require_depth(s, 2, "torsion_curvature_derivative");
    const int n = s.dim();
    Tensor out(n, 5);
    for (int e = 0; e < n; ++e) {
        Tensor DHe = slice_first(s.DH, e);
        Tensor dK = commutator_form(DHe, s.H, s.g) + commutator_form(s.H, DHe, s.g);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int x = 0; x < n; ++x)
                    for (int y = 0; y < n; ++y)
                        out(e, a, b, x, y) = s.DR(e, a, b, x, y) - 0.5 * s.DDH(e, a, b, x, y) +
                                             0.5 * s.DDH(e, b, a, x, y) + 0.25 * dK(a, b, x, y);
    }
    return out;
}

Mat torsion_ricci(const GeometrySample& s) { return ricci_from_riemann(torsion_curvature(s), s.g); }

Mat ricci(const GeometrySample& s) { return ricci_from_riemann(s.R, s.g); }

Tensor ricci_derivative(const GeometrySample& s) {
    require_depth(s, 2, "ricci_derivative");
    const int n = s.dim();
    const Mat& gi = s.g.inv();
    Tensor out(n, 3);
    for (int e = 0; e < n; ++e)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                double v = 0.0;
                for (int a = 0; a < n; ++a)
                    for (int d = 0; d < n; ++d) v += gi(a, d) * s.DR(e, a, b, c, d);
                out(e, b, c) = v;
            }
    return out;
}

double scalar_curvature(const GeometrySample& s) { return trace(ricci(s), s.g); }

Vec scalar_curvature_gradient(const GeometrySample& s) {
    Tensor DRic = ricci_derivative(s);
    const int n = s.dim();
    const Mat& gi = s.g.inv();
    Vec ds = Vec::Zero(n);
    for (int e = 0; e < n; ++e)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) ds(e) += gi(b, c) * DRic(e, b, c);
    return ds;
}

Vec sharp(const Vec& covector, const Metric& g) { return g.inv() * covector; }

}  // namespace hetflow
