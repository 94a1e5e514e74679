// Brute-force oracles shared by the test suites. Everything here works in a
// g-orthonormal frame with plain index loops, independently of the library kernels.
#pragma once

#include "hetflow/tensor.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <random>
#include <vector>

namespace hetflow::testing {

inline double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double rel_err(const Mat& a, const Mat& b) { return max_abs(a - b) / std::max(1.0, max_abs(b)); }

inline double rel_err(const Tensor& a, const Tensor& b) { return max_abs_diff(a, b) / std::max(1.0, b.max_abs()); }

/// Columns form a g-orthonormal frame: Eᵀ g E = I.
inline Mat orthonormal_frame(const Mat& g) {
    const Mat L = g.llt().matrixL();
    return L.transpose().inverse();
}

/// Components of t in the frame whose vectors are the columns of E.
inline Tensor to_frame(const Tensor& t, const Mat& E) {
    const int n = t.dim(), r = t.rank();
    Tensor out(n, r);
    std::vector<int> I(r), J(r);
    for (std::size_t ko = 0; ko < out.size(); ++ko) {
        out.unflatten(ko, I.data());
        double acc = 0.0;
        for (std::size_t ki = 0; ki < t.size(); ++ki) {
            t.unflatten(ki, J.data());
            double w = t[ki];
            for (int s = 0; s < r && w != 0.0; ++s) w *= E(J[s], I[s]);
            acc += w;
        }
        out[ko] = acc;
    }
    return out;
}

inline Mat to_frame(const Mat& b, const Mat& E) { return E.transpose() * b * E; }

/// Back from orthonormal components to the original frame.
inline Tensor from_frame(const Tensor& t, const Mat& E) { return to_frame(t, Mat(E.inverse())); }
inline Mat from_frame(const Mat& b, const Mat& E) { return to_frame(b, Mat(E.inverse())); }

inline Tensor random_tensor(std::mt19937_64& rng, int n, int rank, double amp = 1.0) {
    std::uniform_real_distribution<double> u(-amp, amp);
    Tensor t(n, rank);
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = u(rng);
    return t;
}

/// Random p-form with entries of order one.
inline Tensor random_form(std::mt19937_64& rng, int n, int p) {
    Tensor t = antisymmetrize(random_tensor(rng, n, p));
    double f = 1.0;
    for (int k = 2; k <= p; ++k) f *= k;
    t *= f;
    return t;
}

/// Random tensor antisymmetric in (a,b) and in (c,d), no other symmetry.
inline Tensor random_pair_skew(std::mt19937_64& rng, int n) {
    Tensor t = random_tensor(rng, n, 4);
    Tensor out(n, 4);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d)
                    out(a, b, c, d) = t(a, b, c, d) - t(b, a, c, d) - t(a, b, d, c) + t(b, a, d, c);
    return out;
}

inline Mat random_symmetric(std::mt19937_64& rng, int n, double amp = 1.0) {
    std::uniform_real_distribution<double> u(-amp, amp);
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m(i, j) = m(j, i) = u(rng);
    return m;
}

/// ½ Σ_ij Ω_ij ∧ Ω_ij with Ω_ij(a,b) = R(a,b,i,j), by a signed sum over S₄.
inline Tensor wedge_oracle_on(const Tensor& Ron) {
    const int n = Ron.dim();
    Tensor on(n, 4);
    std::vector<int> perm(4);
    int v[4];
    for (std::size_t k = 0; k < on.size(); ++k) {
        on.unflatten(k, v);
        double acc = 0.0;
        perm = {0, 1, 2, 3};
        do {
            const int sg = permutation_sign(perm);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    acc += sg * Ron(v[perm[0]], v[perm[1]], i, j) * Ron(v[perm[2]], v[perm[3]], i, j);
        } while (std::next_permutation(perm.begin(), perm.end()));
        on[k] = 0.5 * acc / 4.0;
    }
    return on;
}

inline Tensor wedge_oracle(const Tensor& R, const Mat& g) {
    const Mat E = orthonormal_frame(g);
    return from_frame(wedge_oracle_on(to_frame(R, E)), E);
}

/// ¼ Σ R_{ijkl}² in an orthonormal frame.
inline double norm_sq_oracle(const Tensor& R, const Mat& g) { return 0.25 * to_frame(R, orthonormal_frame(g)).sum_sq(); }

}  // namespace hetflow::testing
