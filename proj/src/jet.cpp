#include "hetflow/jet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hetflow {

namespace {

struct Tables {
    std::array<std::array<int, 3>, Jet::kTerms> exps{};
    int lookup[Jet::kDegree + 1][Jet::kDegree + 1][Jet::kDegree + 1];
    std::array<std::array<int, Jet::kTerms>, Jet::kTerms> product{};
    std::array<std::array<int, Jet::kTerms>, Jet::kVars> deriv_src{};  // term whose ∂_i lands on k
    std::array<double, Jet::kTerms> factorials{};

    Tables() {
        int k = 0;
        for (int a = 0; a <= Jet::kDegree; ++a)
            for (int b = 0; b <= Jet::kDegree; ++b)
                for (int c = 0; c <= Jet::kDegree; ++c) lookup[a][b][c] = -1;
        for (int deg = 0; deg <= Jet::kDegree; ++deg)
            for (int a = deg; a >= 0; --a)
                for (int b = deg - a; b >= 0; --b) {
                    const int c = deg - a - b;
                    exps[k] = {a, b, c};
                    lookup[a][b][c] = k++;
                }
        for (int i = 0; i < Jet::kTerms; ++i)
            for (int j = 0; j < Jet::kTerms; ++j) {
                const int a = exps[i][0] + exps[j][0], b = exps[i][1] + exps[j][1], c = exps[i][2] + exps[j][2];
                product[i][j] = (a + b + c <= Jet::kDegree) ? lookup[a][b][c] : -1;
            }
        for (int v = 0; v < Jet::kVars; ++v)
            for (int t = 0; t < Jet::kTerms; ++t) {
                auto e = exps[t];
                e[v] += 1;
                deriv_src[v][t] = (e[0] + e[1] + e[2] <= Jet::kDegree) ? lookup[e[0]][e[1]][e[2]] : -1;
            }
        for (int t = 0; t < Jet::kTerms; ++t) {
            double f = 1.0;
            for (int v = 0; v < 3; ++v)
                for (int m = 2; m <= exps[t][v]; ++m) f *= m;
            factorials[t] = f;
        }
    }
};

const Tables& tables() {
    static const Tables t;
    return t;
}

}  // namespace

const std::array<int, 3>& Jet::exponent(int k) { return tables().exps[k]; }

int Jet::index(int a, int b, int c) {
    if (a < 0 || b < 0 || c < 0 || a + b + c > kDegree) return -1;
    return tables().lookup[a][b][c];
}

Jet Jet::constant(double v) {
    Jet j;
    j.c_[0] = v;
    return j;
}

Jet Jet::coordinate(int i, double at) {
    if (i < 0 || i >= kVars) throw std::out_of_range("Jet::coordinate: variable index");
    Jet j;
    j.c_[0] = at;
    const int e[3] = {i == 0, i == 1, i == 2};
    j.c_[index(e[0], e[1], e[2])] = 1.0;
    return j;
}

double Jet::coeff(int a, int b, int c) const {
    const int k = index(a, b, c);
    if (k < 0) throw std::out_of_range("Jet::coeff: degree exceeds truncation");
    return c_[k];
}

void Jet::set_coeff(int a, int b, int c, double v) {
    const int k = index(a, b, c);
    if (k < 0) throw std::out_of_range("Jet::set_coeff: degree exceeds truncation");
    c_[k] = v;
}

double Jet::derivative(int a, int b, int c) const {
    if (a + b + c > order_) throw std::logic_error("Jet::derivative: beyond exact order");
    const int k = index(a, b, c);
    return c_[k] * tables().factorials[k];
}

double Jet::grad(int i) const {
    const int e[3] = {i == 0, i == 1, i == 2};
    return derivative(e[0], e[1], e[2]);
}

Jet Jet::d(int i) const {
    const auto& T = tables();
    Jet out;
    for (int t = 0; t < kTerms; ++t) {
        const int src = T.deriv_src[i][t];
        if (src < 0) continue;
        out.c_[t] = c_[src] * T.exps[src][i];
    }
    out.order_ = order_ - 1;
    return out;
}

Jet& Jet::operator+=(const Jet& o) {
    for (int k = 0; k < kTerms; ++k) c_[k] += o.c_[k];
    order_ = std::min(order_, o.order_);
    return *this;
}

Jet& Jet::operator-=(const Jet& o) {
    for (int k = 0; k < kTerms; ++k) c_[k] -= o.c_[k];
    order_ = std::min(order_, o.order_);
    return *this;
}

Jet& Jet::operator*=(double s) {
    for (double& x : c_) x *= s;
    return *this;
}

Jet& Jet::operator*=(const Jet& o) {
    const auto& T = tables();
    std::array<double, kTerms> r{};
    for (int i = 0; i < kTerms; ++i) {
        if (c_[i] == 0.0) continue;
        for (int j = 0; j < kTerms; ++j) {
            const int k = T.product[i][j];
            if (k >= 0) r[k] += c_[i] * o.c_[j];
        }
    }
    c_ = r;
    order_ = std::min(order_, o.order_);
    return *this;
}

Jet Jet::compose(const std::array<double, kDegree + 1>& taylor) const {
    Jet r = *this;
    r.c_[0] = 0.0;
    Jet out = Jet::constant(taylor[0]);
    Jet power = Jet::constant(1.0);
    for (int k = 1; k <= kDegree; ++k) {
        power *= r;
        out += taylor[k] * power;
    }
    out.order_ = order_;
    return out;
}

Jet exp(const Jet& a) {
    std::array<double, Jet::kDegree + 1> t{};
    const double e = std::exp(a.value());
    double f = 1.0;
    for (int k = 0; k <= Jet::kDegree; ++k) {
        if (k > 0) f *= k;
        t[k] = e / f;
    }
    return a.compose(t);
}

Jet sqrt(const Jet& a) {
    const double v = a.value();
    if (v <= 0.0) throw std::domain_error("Jet sqrt: non-positive value");
    std::array<double, Jet::kDegree + 1> t{};
    double binom = 1.0;  // C(1/2, k)
    for (int k = 0; k <= Jet::kDegree; ++k) {
        if (k > 0) binom *= (0.5 - (k - 1)) / k;
        t[k] = std::sqrt(v) * binom / std::pow(v, k);
    }
    return a.compose(t);
}

Jet reciprocal(const Jet& a) {
    const double v = a.value();
    if (v == 0.0) throw std::domain_error("Jet reciprocal: zero value");
    std::array<double, Jet::kDegree + 1> t{};
    for (int k = 0; k <= Jet::kDegree; ++k) t[k] = ((k % 2) ? -1.0 : 1.0) / std::pow(v, k + 1);
    return a.compose(t);
}

double evaluate(const Poly3& p, const std::array<double, 3>& x) {
    double s = 0.0;
    for (int k = 0; k < Jet::kTerms; ++k) {
        const auto& e = Jet::exponent(k);
        s += p.coeffs()[k] * std::pow(x[0], e[0]) * std::pow(x[1], e[1]) * std::pow(x[2], e[2]);
    }
    return s;
}

Jet taylor_shift(const Poly3& p, const std::array<double, 3>& x) {
    Jet out = Jet::constant(0.0);
    Jet xs[3] = {Jet::coordinate(0, x[0]), Jet::coordinate(1, x[1]), Jet::coordinate(2, x[2])};
    for (int k = 0; k < Jet::kTerms; ++k) {
        const double c = p.coeffs()[k];
        if (c == 0.0) continue;
        const auto& e = Jet::exponent(k);
        Jet term = Jet::constant(c);
        for (int v = 0; v < 3; ++v)
            for (int m = 0; m < e[v]; ++m) term *= xs[v];
        out += term;
    }
    out.set_order(Jet::kDegree);
    return out;
}

}  // namespace hetflow
