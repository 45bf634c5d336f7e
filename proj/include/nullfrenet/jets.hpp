#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "nullfrenet/minkowski.hpp"

namespace nullfrenet {

/// Truncated Taylor series of a scalar function about a point: coefficient k
/// holds f^(k)/k!. Arithmetic propagates derivatives exactly (Taylor-mode
/// differentiation); binary operations truncate to the shorter operand.
class Jet {
public:
    Jet() : a_{0.0} {}
    explicit Jet(double value, int order = 0) : a_(static_cast<std::size_t>(order) + 1, 0.0) {
        a_[0] = value;
    }
    explicit Jet(std::vector<double> coeffs) : a_(std::move(coeffs)) {
        if (a_.empty()) a_.push_back(0.0);
    }

    /// Jet of the identity function t -> t0 + t, truncated at `order`.
    static Jet variable(double t0, int order) {
        Jet j(t0, order);
        if (order >= 1) j.a_[1] = 1.0;
        return j;
    }

    /// Build from raw derivative values f, f', f'', ...
    static Jet from_derivatives(const std::vector<double>& d) {
        std::vector<double> c(d.size());
        double fact = 1.0;
        for (std::size_t k = 0; k < d.size(); ++k) {
            if (k > 0) fact *= static_cast<double>(k);
            c[k] = d[k] / fact;
        }
        return Jet(std::move(c));
    }

    int order() const { return static_cast<int>(a_.size()) - 1; }
    double operator[](int k) const { return a_[static_cast<std::size_t>(k)]; }
    double& operator[](int k) { return a_[static_cast<std::size_t>(k)]; }
    double value() const { return a_[0]; }

    /// k-th derivative value (coefficient times k!).
    double derivative_value(int k) const {
        if (k > order()) throw std::out_of_range("Jet: derivative order exceeds truncation");
        double fact = 1.0;
        for (int i = 2; i <= k; ++i) fact *= static_cast<double>(i);
        return a_[static_cast<std::size_t>(k)] * fact;
    }

    /// Jet of f'; truncation order drops by one.
    Jet derivative() const {
        if (order() == 0) throw std::logic_error("Jet: cannot differentiate order-0 jet");
        std::vector<double> c(a_.size() - 1);
        for (std::size_t k = 0; k + 1 < a_.size(); ++k)
            c[k] = static_cast<double>(k + 1) * a_[k + 1];
        return Jet(std::move(c));
    }

    Jet truncated(int order) const {
        std::vector<double> c(a_.begin(), a_.begin() + std::min<std::size_t>(a_.size(), order + 1));
        c.resize(static_cast<std::size_t>(order) + 1, 0.0);
        return Jet(std::move(c));
    }

    friend Jet operator+(const Jet& x, const Jet& y) {
        const int n = std::min(x.order(), y.order());
        Jet r(0.0, n);
        for (int k = 0; k <= n; ++k) r[k] = x[k] + y[k];
        return r;
    }
    friend Jet operator-(const Jet& x, const Jet& y) {
        const int n = std::min(x.order(), y.order());
        Jet r(0.0, n);
        for (int k = 0; k <= n; ++k) r[k] = x[k] - y[k];
        return r;
    }
    friend Jet operator-(const Jet& x) {
        Jet r = x;
        for (auto& v : r.a_) v = -v;
        return r;
    }
    friend Jet operator*(double s, const Jet& x) {
        Jet r = x;
        for (auto& v : r.a_) v *= s;
        return r;
    }
    friend Jet operator*(const Jet& x, double s) { return s * x; }
    friend Jet operator+(const Jet& x, double s) {
        Jet r = x;
        r[0] += s;
        return r;
    }
    friend Jet operator+(double s, const Jet& x) { return x + s; }
    friend Jet operator-(const Jet& x, double s) { return x + (-s); }

    /// Cauchy product truncated to the shorter operand.
    friend Jet operator*(const Jet& x, const Jet& y) {
        const int n = std::min(x.order(), y.order());
        Jet r(0.0, n);
        for (int k = 0; k <= n; ++k) {
            double s = 0.0;
            for (int j = 0; j <= k; ++j) s += x[j] * y[k - j];
            r[k] = s;
        }
        return r;
    }

    Jet reciprocal() const {
        if (a_[0] == 0.0) throw std::domain_error("Jet: reciprocal of zero constant term");
        const int n = order();
        Jet r(0.0, n);
        r[0] = 1.0 / a_[0];
        for (int k = 1; k <= n; ++k) {
            double s = 0.0;
            for (int j = 1; j <= k; ++j) s += a_[static_cast<std::size_t>(j)] * r[k - j];
            r[k] = -s / a_[0];
        }
        return r;
    }

    friend Jet operator/(const Jet& x, const Jet& y) { return x * y.reciprocal(); }

    /// Real power via the standard Taylor recurrence; requires positive
    /// constant term.
    Jet pow(double p) const {
        if (!(a_[0] > 0.0)) throw std::domain_error("Jet::pow: non-positive constant term");
        const int n = order();
        Jet r(0.0, n);
        r[0] = std::pow(a_[0], p);
        for (int k = 1; k <= n; ++k) {
            double s = 0.0;
            for (int j = 1; j <= k; ++j)
                s += (p * j - (k - j)) * a_[static_cast<std::size_t>(j)] * r[k - j];
            r[k] = s / (static_cast<double>(k) * a_[0]);
        }
        return r;
    }

    Jet sqrt() const { return pow(0.5); }

    /// Composition f(g(.)); f must be expanded about g's constant term.
    static Jet compose(const Jet& f, const Jet& g) {
        const int n = std::min(f.order(), g.order());
        Jet h = g.truncated(n);
        h[0] = 0.0;  // g - g(0)
        // Horner over f's coefficients, highest first.
        Jet r(0.0, n);
        for (int k = n; k >= 0; --k) r = r * h + f[k];
        return r;
    }

private:
    std::vector<double> a_;
};

/// Spacetime-vector-valued jet: one scalar jet per component.
struct VecJet {
    std::vector<Jet> comp;  // size == dim
    int dim = 4;

    VecJet() = default;
    VecJet(int dim, int order) : comp(static_cast<std::size_t>(dim), Jet(0.0, order)), dim(dim) {}

    static VecJet constant(const FourVector& v, int order) {
        VecJet r(v.dim, order);
        for (int i = 0; i < v.dim; ++i) r.comp[i] = Jet(v[i], order);
        return r;
    }

    int order() const { return comp.empty() ? 0 : comp[0].order(); }

    FourVector value() const {
        FourVector v = FourVector::zero(dim);
        for (int i = 0; i < dim; ++i) v[i] = comp[i].value();
        return v;
    }

    FourVector derivative_value(int k) const {
        FourVector v = FourVector::zero(dim);
        for (int i = 0; i < dim; ++i) v[i] = comp[i].derivative_value(k);
        return v;
    }

    VecJet derivative() const {
        VecJet r;
        r.dim = dim;
        r.comp.reserve(comp.size());
        for (const auto& j : comp) r.comp.push_back(j.derivative());
        return r;
    }

    VecJet truncated(int order) const {
        VecJet r;
        r.dim = dim;
        for (const auto& j : comp) r.comp.push_back(j.truncated(order));
        return r;
    }

    friend VecJet operator+(const VecJet& x, const VecJet& y) {
        if (x.dim != y.dim) throw DimensionMismatch("VecJet+: mixed dimensions");
        VecJet r;
        r.dim = x.dim;
        for (int i = 0; i < x.dim; ++i) r.comp.push_back(x.comp[i] + y.comp[i]);
        return r;
    }
    friend VecJet operator-(const VecJet& x, const VecJet& y) {
        if (x.dim != y.dim) throw DimensionMismatch("VecJet-: mixed dimensions");
        VecJet r;
        r.dim = x.dim;
        for (int i = 0; i < x.dim; ++i) r.comp.push_back(x.comp[i] - y.comp[i]);
        return r;
    }
    friend VecJet operator*(const Jet& s, const VecJet& x) {
        VecJet r;
        r.dim = x.dim;
        for (const auto& j : x.comp) r.comp.push_back(s * j);
        return r;
    }
    friend VecJet operator*(double s, const VecJet& x) {
        VecJet r;
        r.dim = x.dim;
        for (const auto& j : x.comp) r.comp.push_back(s * j);
        return r;
    }
};

/// Minkowski inner product of vector jets.
inline Jet dot(const VecJet& a, const VecJet& b) {
    if (a.dim != b.dim) throw DimensionMismatch("dot(VecJet): mixed dimensions");
    Jet s = a.comp[0] * b.comp[0];
    for (int i = 1; i < a.dim; ++i) s = s - a.comp[i] * b.comp[i];
    return s;
}

/// Componentwise composition X(g(.)).
inline VecJet compose(const VecJet& x, const Jet& g) {
    VecJet r;
    r.dim = x.dim;
    for (const auto& j : x.comp) r.comp.push_back(Jet::compose(j, g));
    return r;
}

}  // namespace nullfrenet
