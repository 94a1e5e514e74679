/**
 * @file jet.hpp
 * @brief Truncated Taylor series in three variables about a chart point.
 *
 * A Jet stores the coefficients of x^α for |α| ≤ kDegree together with the
 * degree up to which those coefficients are exact. Products keep the smaller
 * exact degree, derivatives lower it by one.
 */
#pragma once

#include <array>
#include <vector>

namespace hetflow {

class Jet {
public:
    static constexpr int kDegree = 4;
    static constexpr int kVars = 3;
    static constexpr int kTerms = 35;  // C(kDegree + 3, 3)

    Jet() { c_.fill(0.0); }

    static Jet constant(double v);
    /// The coordinate function x_i expanded about a point whose x_i equals at.
    static Jet coordinate(int i, double at);

    double value() const { return c_[0]; }
    double coeff(int a, int b, int c) const;
    void set_coeff(int a, int b, int c, double v);
    /// ∂^α at the expansion point.
    double derivative(int a, int b, int c) const;
    /// First derivative at the point.
    double grad(int i) const;

    int order() const { return order_; }
    void set_order(int k) { order_ = k; }

    Jet d(int i) const;

    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet& operator*=(const Jet& o);
    Jet& operator*=(double s);

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(Jet a, const Jet& b) { return a *= b; }
    friend Jet operator*(double s, Jet a) { return a *= s; }
    friend Jet operator*(Jet a, double s) { return a *= s; }
    friend Jet operator-(Jet a) { return a *= -1.0; }

    /// Σ_k taylor[k] r^k with r the non-constant part; taylor[k] = g^{(k)}(value)/k!.
    Jet compose(const std::array<double, kDegree + 1>& taylor) const;

    /// Exponent triple of term index k (graded order).
    static const std::array<int, 3>& exponent(int k);
    static int index(int a, int b, int c);

    const std::array<double, kTerms>& coeffs() const { return c_; }

private:
    std::array<double, kTerms> c_;
    int order_ = kDegree;
};

Jet exp(const Jet& a);
Jet sqrt(const Jet& a);
Jet reciprocal(const Jet& a);

/// Polynomial of degree ≤ kDegree given by its coefficients at the origin.
using Poly3 = Jet;

double evaluate(const Poly3& p, const std::array<double, 3>& x);
/// Taylor expansion of a polynomial about the point x (exact).
Jet taylor_shift(const Poly3& p, const std::array<double, 3>& x);

}  // namespace hetflow
