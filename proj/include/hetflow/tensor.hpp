/**
 * @file tensor.hpp
 * @brief Dense pointwise multilinear algebra on a frame of dimension 2..6.
 *
 * Index conventions:
 *  - R[a][b][c][d] = g(R_{e_a,e_b} e_c, e_d), R_{u,v} = [∇_u,∇_v] - ∇_{[u,v]}.
 *  - A 2-form ω and a skew endomorphism A are identified by ω(x,y) = g(Ax,y),
 *    so (v1∧v2)(w) = g(v1,w)v2 - g(v2,w)v1.
 *  - Endomorphism matrices act on column vectors: A(k,x) is the e_k component of A e_x.
 *  - Derivative tensors carry the derivative slot first: DT[e][...] = (∇_{e_e} T)[...].
 */
#pragma once

#include <Eigen/Dense>

#include <cassert>
#include <cstddef>
#include <vector>

namespace hetflow {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Dense rank-r array over an n-dimensional frame, row-major.
class Tensor {
public:
    Tensor() = default;
    Tensor(int dim, int rank);

    int dim() const { return n_; }
    int rank() const { return r_; }
    std::size_t size() const { return data_.size(); }

    template <class... I>
    double& operator()(I... idx) {
        assert(static_cast<int>(sizeof...(I)) == r_);
        return data_[offset(idx...)];
    }
    template <class... I>
    double operator()(I... idx) const {
        assert(static_cast<int>(sizeof...(I)) == r_);
        return data_[offset(idx...)];
    }

    double& operator[](std::size_t k) { return data_[k]; }
    double operator[](std::size_t k) const { return data_[k]; }

    double& at(const int* idx) { return data_[offset_of(idx)]; }
    double at(const int* idx) const { return data_[offset_of(idx)]; }

    /// Decode flat position k into r indices.
    void unflatten(std::size_t k, int* idx) const;

    Tensor& operator+=(const Tensor& o);
    Tensor& operator-=(const Tensor& o);
    Tensor& operator*=(double s);

    double max_abs() const;
    double sum_sq() const;

    const std::vector<double>& data() const { return data_; }

private:
    template <class... I>
    std::size_t offset(I... idx) const {
        std::size_t k = 0;
        ((k = k * static_cast<std::size_t>(n_) + static_cast<std::size_t>(idx)), ...);
        return k;
    }
    std::size_t offset_of(const int* idx) const;

    int n_ = 0;
    int r_ = 0;
    std::vector<double> data_;
};

Tensor operator+(Tensor a, const Tensor& b);
Tensor operator-(Tensor a, const Tensor& b);
Tensor operator*(double s, Tensor a);

/// Largest absolute componentwise difference.
double max_abs_diff(const Tensor& a, const Tensor& b);

/// out[i_0..i_{r-1}] = t[i_{perm[0]}..i_{perm[r-1]}].
Tensor permuted(const Tensor& t, const std::vector<int>& perm);

/// Alt(t) = (1/r!) Σ_σ sgn(σ) t∘σ.
Tensor antisymmetrize(const Tensor& t);

bool is_alternating(const Tensor& t, double tol = 1e-12);

/// Sign of a permutation of 0..k-1.
int permutation_sign(const std::vector<int>& perm);

Tensor outer(const Tensor& a, const Tensor& b);

/// Wedge product of a p-form and a q-form (determinant normalisation).
Tensor wedge(const Tensor& a, const Tensor& b);

Tensor from_vector(const Vec& v);
Vec to_vector(const Tensor& t);
Tensor from_matrix(const Mat& m);
Mat to_matrix(const Tensor& t);

/// Riemannian metric on a frame; validated SPD at construction.
class Metric {
public:
    explicit Metric(const Mat& g, double sym_tol = 1e-12);

    int dim() const { return static_cast<int>(g_.rows()); }
    const Mat& g() const { return g_; }
    const Mat& inv() const { return inv_; }
    double det() const { return det_; }

    double operator()(int i, int j) const { return g_(i, j); }

private:
    Mat g_;
    Mat inv_;
    double det_ = 0.0;
};

/// Raise the index in one slot: out[..k..] = Σ_m g^{km} t[..m..].
Tensor raise_slot(const Tensor& t, int slot, const Metric& g);

/// Raise every slot.
Tensor raise_all(const Tensor& t, const Metric& g);

/// Full contraction Σ a_I b^I (no combinatorial factor).
double full_contract(const Tensor& a, const Tensor& b, const Metric& g);

/// Determinant inner product of p-forms: (1/p!) Σ a_I b^I.
double form_inner(const Tensor& a, const Tensor& b, const Metric& g);

/// v⌟t on the first slot; v given by frame components.
Tensor interior(const Vec& v, const Tensor& t);

/// ν_g = √det g e^1∧...∧e^n for the orientation sign given.
Tensor volume_form(const Metric& g, int orientation = 1);

/// Hodge star in dimension 3.
Tensor hodge_star(const Tensor& alpha, const Metric& g, int orientation = 1);

/// (H∘H)(v1,v2) = ½ Σ H(v1,e_i,e_j) H(v2,e_i,e_j).
Mat h_circ_h(const Tensor& H, const Metric& g);

/// (R∘R)(v1,v2) = ½ Σ R_{v1,e_i}(e_j,e_k) R_{v2,e_i}(e_j,e_k).
Mat r_circ_r(const Tensor& R, const Metric& g);

/// ⟨R∧R⟩ = ½ Σ R(e_i,e_j)∧R(e_i,e_j), evaluation on the second pair of slots.
Tensor r_wedge_r(const Tensor& R, const Metric& g);

/// |R|² = ¼ Σ R_{ijkl}² in an orthonormal frame.
double curvature_norm_sq(const Tensor& R, const Metric& g);

/// H_u(v) = H(u,v)^♯.
Mat h_endo(const Tensor& H, const Vec& u, const Metric& g);

Mat endo_commutator(const Mat& a, const Mat& b);

/// Skew endomorphism A of a 2-form ω with ω(x,y) = g(Ax,y).
Mat endo_from_form(const Mat& omega, const Metric& g);
Mat form_from_endo(const Mat& a, const Metric& g);

/// Endomorphism of a bilinear form: g(Bx, y) = b(x,y) for symmetric b.
Mat endo_from_bilinear(const Mat& b, const Metric& g);
Mat bilinear_from_endo(const Mat& a, const Metric& g);

/// 2-form v1♭∧v2♭ of two vectors.
Mat wedge_vectors(const Vec& v1, const Vec& v2, const Metric& g);

Mat ricci_from_riemann(const Tensor& R, const Metric& g);
double trace(const Mat& b, const Metric& g);

/// Ric∘Ric(v1,v2) = g(Ric v1, Ric v2).
Mat ric_circ_ric(const Mat& ric, const Metric& g);

/// |b|² = Σ b_{ij} b^{ij}.
double bilinear_norm_sq(const Mat& b, const Metric& g);

/// Dim-3 Riemann tensor from Ricci: R_{v1,v2} = (s/2)v1∧v2 + v2∧Ric(v1) + Ric(v2)∧v1.
Tensor reconstruct_riemann_3d(const Mat& ric, double s, const Metric& g);

Mat symmetric_part(const Mat& m);
Mat skew_part(const Mat& m);

}  // namespace hetflow
