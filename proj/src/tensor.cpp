#include "hetflow/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hetflow {

namespace {

std::size_t ipow(int base, int exp) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
    return r;
}

double factorial(int k) {
    double r = 1.0;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}

void require_same_shape(const Tensor& a, const Tensor& b) {
    if (a.dim() != b.dim() || a.rank() != b.rank())
        throw std::invalid_argument("tensor shape mismatch");
}

void require_dim(const Tensor& t, const Metric& g) {
    if (t.dim() != g.dim()) throw std::invalid_argument("tensor/metric dimension mismatch");
}

}  // namespace

Tensor::Tensor(int dim, int rank) : n_(dim), r_(rank), data_(ipow(dim, rank), 0.0) {
    if (dim < 1 || rank < 0) throw std::invalid_argument("bad tensor shape");
}

std::size_t Tensor::offset_of(const int* idx) const {
    std::size_t k = 0;
    for (int i = 0; i < r_; ++i) k = k * static_cast<std::size_t>(n_) + static_cast<std::size_t>(idx[i]);
    return k;
}

void Tensor::unflatten(std::size_t k, int* idx) const {
    for (int i = r_ - 1; i >= 0; --i) {
        idx[i] = static_cast<int>(k % static_cast<std::size_t>(n_));
        k /= static_cast<std::size_t>(n_);
    }
}

Tensor& Tensor::operator+=(const Tensor& o) {
    require_same_shape(*this, o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
}

Tensor& Tensor::operator-=(const Tensor& o) {
    require_same_shape(*this, o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
}

Tensor& Tensor::operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
}

double Tensor::max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
}

double Tensor::sum_sq() const {
    double s = 0.0;
    for (double x : data_) s += x * x;
    return s;
}

Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
Tensor operator*(double s, Tensor a) { return a *= s; }

double max_abs_diff(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b);
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

Tensor permuted(const Tensor& t, const std::vector<int>& perm) {
    if (static_cast<int>(perm.size()) != t.rank()) throw std::invalid_argument("permutation rank mismatch");
    Tensor out(t.dim(), t.rank());
    std::vector<int> idx(t.rank()), src(t.rank());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out.unflatten(k, idx.data());
        for (int i = 0; i < t.rank(); ++i) src[i] = idx[perm[i]];
        out[k] = t.at(src.data());
    }
    return out;
}

int permutation_sign(const std::vector<int>& perm) {
    int sign = 1;
    std::vector<bool> seen(perm.size(), false);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        if (seen[i]) continue;
        std::size_t len = 0;
        for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(perm[j])) {
            seen[j] = true;
            ++len;
        }
        if (len % 2 == 0) sign = -sign;
    }
    return sign;
}

Tensor antisymmetrize(const Tensor& t) {
    Tensor out(t.dim(), t.rank());
    std::vector<int> perm(t.rank());
    std::iota(perm.begin(), perm.end(), 0);
    do {
        Tensor p = permuted(t, perm);
        p *= permutation_sign(perm);
        out += p;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out *= 1.0 / factorial(t.rank());
    return out;
}

bool is_alternating(const Tensor& t, double tol) {
    double scale = std::max(1.0, t.max_abs());
    return max_abs_diff(t, antisymmetrize(t)) <= tol * scale;
}

Tensor outer(const Tensor& a, const Tensor& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("outer: dimension mismatch");
    Tensor out(a.dim(), a.rank() + b.rank());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i * b.size() + j] = a[i] * b[j];
    return out;
}

Tensor wedge(const Tensor& a, const Tensor& b) {
    const int p = a.rank(), q = b.rank();
    Tensor alt = antisymmetrize(outer(a, b));
    alt *= factorial(p + q) / (factorial(p) * factorial(q));
    return alt;
}

Tensor from_vector(const Vec& v) {
    Tensor t(static_cast<int>(v.size()), 1);
    for (int i = 0; i < v.size(); ++i) t(i) = v(i);
    return t;
}

Vec to_vector(const Tensor& t) {
    if (t.rank() != 1) throw std::invalid_argument("to_vector: rank must be 1");
    Vec v(t.dim());
    for (int i = 0; i < t.dim(); ++i) v(i) = t(i);
    return v;
}

Tensor from_matrix(const Mat& m) {
    Tensor t(static_cast<int>(m.rows()), 2);
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) t(i, j) = m(i, j);
    return t;
}

Mat to_matrix(const Tensor& t) {
    if (t.rank() != 2) throw std::invalid_argument("to_matrix: rank must be 2");
    Mat m(t.dim(), t.dim());
    for (int i = 0; i < t.dim(); ++i)
        for (int j = 0; j < t.dim(); ++j) m(i, j) = t(i, j);
    return m;
}

Metric::Metric(const Mat& g, double sym_tol) : g_(g) {
    if (g.rows() != g.cols() || g.rows() < 1) throw std::invalid_argument("metric must be square");
    if (!g.allFinite()) throw std::domain_error("metric has non-finite entries");
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale)
        throw std::invalid_argument("metric is not symmetric");
    g_ = 0.5 * (g + g.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(g_);
    if (es.eigenvalues().minCoeff() <= 0.0) throw std::domain_error("metric is not positive definite");
    inv_ = g_.inverse();
    inv_ = 0.5 * (inv_ + inv_.transpose());
    det_ = g_.determinant();
}

Tensor raise_slot(const Tensor& t, int slot, const Metric& g) {
    require_dim(t, g);
    Tensor out(t.dim(), t.rank());
    std::vector<int> idx(t.rank());
    const Mat& gi = g.inv();
    for (std::size_t k = 0; k < out.size(); ++k) {
        out.unflatten(k, idx.data());
        const int keep = idx[slot];
        double s = 0.0;
        for (int m = 0; m < t.dim(); ++m) {
            idx[slot] = m;
            s += gi(keep, m) * t.at(idx.data());
        }
        out[k] = s;
    }
    return out;
}

Tensor raise_all(const Tensor& t, const Metric& g) {
    Tensor out = t;
    for (int s = 0; s < t.rank(); ++s) out = raise_slot(out, s, g);
    return out;
}

double full_contract(const Tensor& a, const Tensor& b, const Metric& g) {
    require_same_shape(a, b);
    Tensor bu = raise_all(b, g);
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * bu[k];
    return s;
}

double form_inner(const Tensor& a, const Tensor& b, const Metric& g) {
    return full_contract(a, b, g) / factorial(a.rank());
}

Tensor interior(const Vec& v, const Tensor& t) {
    if (t.rank() < 1 || v.size() != t.dim()) throw std::invalid_argument("interior: shape mismatch");
    Tensor out(t.dim(), t.rank() - 1);
    const std::size_t block = out.size();
    for (int a = 0; a < t.dim(); ++a)
        for (std::size_t k = 0; k < block; ++k) out[k] += v(a) * t[a * block + k];
    return out;
}

Tensor volume_form(const Metric& g, int orientation) {
    const int n = g.dim();
    Tensor nu(n, n);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    const double vol = orientation * std::sqrt(g.det());
    do {
        nu.at(perm.data()) = vol * permutation_sign(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return nu;
}

Tensor hodge_star(const Tensor& alpha, const Metric& g, int orientation) {
    const int n = g.dim();
    if (n != 3) throw std::invalid_argument("hodge_star: only dimension 3 is supported");
    require_dim(alpha, g);
    const int p = alpha.rank();
    if (p > n) throw std::invalid_argument("hodge_star: degree exceeds dimension");
    Tensor nu = volume_form(g, orientation);
    Tensor up = raise_all(alpha, g);
    Tensor out(n, n - p);
    std::vector<int> I(p), J(n - p), full(n);
    const std::size_t nI = up.size();
    for (std::size_t kj = 0; kj < out.size(); ++kj) {
        out.unflatten(kj, J.data());
        double s = 0.0;
        for (std::size_t ki = 0; ki < nI; ++ki) {
            up.unflatten(ki, I.data());
            std::copy(I.begin(), I.end(), full.begin());
            std::copy(J.begin(), J.end(), full.begin() + p);
            s += up[ki] * nu.at(full.data());
        }
        out[kj] = s / factorial(p);
    }
    return out;
}

Mat h_circ_h(const Tensor& H, const Metric& g) {
    require_dim(H, g);
    if (H.rank() != 3) throw std::invalid_argument("h_circ_h: H must be a 3-form");
    const int n = H.dim();
    Tensor Hu = raise_slot(raise_slot(H, 1, g), 2, g);
    Mat out = Mat::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) s += H(a, i, j) * Hu(b, i, j);
            out(a, b) = 0.5 * s;
        }
    return out;
}

Mat r_circ_r(const Tensor& R, const Metric& g) {
    require_dim(R, g);
    if (R.rank() != 4) throw std::invalid_argument("r_circ_r: curvature must have rank 4");
    const int n = R.dim();
    Tensor Ru = raise_slot(raise_slot(raise_slot(R, 1, g), 2, g), 3, g);
    const std::size_t block = static_cast<std::size_t>(n) * n * n;
    Mat out = Mat::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double s = 0.0;
            for (std::size_t k = 0; k < block; ++k) s += R[a * block + k] * Ru[b * block + k];
            out(a, b) = 0.5 * s;
        }
    return out;
}

Tensor r_wedge_r(const Tensor& R, const Metric& g) {
    require_dim(R, g);
    const int n = R.dim();
    Tensor out(n, 4);
    if (n < 4) return out;
    Tensor Ru = raise_slot(raise_slot(R, 2, g), 3, g);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Tensor w(n, 2), wu(n, 2);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    w(a, b) = R(a, b, i, j);
                    wu(a, b) = Ru(a, b, i, j);
                }
            out += wedge(w, wu);
        }
    out *= 0.5;
    return out;
}

double curvature_norm_sq(const Tensor& R, const Metric& g) { return 0.25 * full_contract(R, R, g); }

Mat h_endo(const Tensor& H, const Vec& u, const Metric& g) {
    require_dim(H, g);
    Mat w = to_matrix(interior(u, H));
    // (H_u)(k, v) = g^{kc} H(u, v, c)
    return g.inv() * w.transpose();
}

Mat endo_commutator(const Mat& a, const Mat& b) { return a * b - b * a; }

Mat endo_from_form(const Mat& omega, const Metric& g) { return g.inv() * omega.transpose(); }

Mat form_from_endo(const Mat& a, const Metric& g) { return a.transpose() * g.g(); }

Mat endo_from_bilinear(const Mat& b, const Metric& g) { return g.inv() * b.transpose(); }

Mat bilinear_from_endo(const Mat& a, const Metric& g) { return a.transpose() * g.g(); }

Mat wedge_vectors(const Vec& v1, const Vec& v2, const Metric& g) {
    Vec a = g.g() * v1, b = g.g() * v2;
    return a * b.transpose() - b * a.transpose();
}

Mat ricci_from_riemann(const Tensor& R, const Metric& g) {
    require_dim(R, g);
    const int n = R.dim();
    const Mat& gi = g.inv();
    Mat ric = Mat::Zero(n, n);
    for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
            double s = 0.0;
            for (int a = 0; a < n; ++a)
                for (int d = 0; d < n; ++d) s += gi(a, d) * R(a, b, c, d);
            ric(b, c) = s;
        }
    return ric;
}

double trace(const Mat& b, const Metric& g) { return (g.inv() * b).trace(); }

Mat ric_circ_ric(const Mat& ric, const Metric& g) { return ric * g.inv() * ric.transpose(); }

double bilinear_norm_sq(const Mat& b, const Metric& g) {
    return (g.inv() * b * g.inv() * b.transpose()).trace();
}

Tensor reconstruct_riemann_3d(const Mat& ric, double s, const Metric& g) {
    if (g.dim() != 3 || ric.rows() != 3) throw std::invalid_argument("reconstruct_riemann_3d: dimension must be 3");
    const Mat& G = g.g();
    Tensor R(3, 4);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
                for (int d = 0; d < 3; ++d)
                    R(a, b, c, d) = 0.5 * s * (G(a, c) * G(b, d) - G(a, d) * G(b, c)) +
                                    (G(b, c) * ric(a, d) - G(b, d) * ric(a, c)) +
                                    (ric(b, c) * G(a, d) - ric(b, d) * G(a, c));
    return R;
}

Mat symmetric_part(const Mat& m) { return 0.5 * (m + m.transpose()); }
Mat skew_part(const Mat& m) { return 0.5 * (m - m.transpose()); }

}  // namespace hetflow
