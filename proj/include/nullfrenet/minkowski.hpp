#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nullfrenet {

/// Raised when two objects of different spacetime dimension are combined.
struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a value fails a domain invariant (non-finite component, bad mode).
struct InvalidValue : std::runtime_error {
    explicit InvalidValue(const std::string& what) : std::runtime_error(what) {}
};

/// Spacetime vector with contravariant components in an orthonormal basis,
/// metric signature (+,-,-,-). Dimension is a runtime mode: 4 for 3+1, 3 for
/// 2+1 (component z unused and kept at zero).
struct FourVector {
    std::array<double, 4> c{0.0, 0.0, 0.0, 0.0};
    int dim = 4;

    FourVector() = default;
    FourVector(double t, double x, double y) : c{t, x, y, 0.0}, dim(3) {}
    FourVector(double t, double x, double y, double z) : c{t, x, y, z}, dim(4) {}

    static FourVector zero(int dim) {
        FourVector v;
        v.dim = dim;
        return v;
    }

    double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }

    FourVector& operator+=(const FourVector& o) {
        for (int i = 0; i < dim; ++i) c[i] += o.c[i];
        return *this;
    }
    FourVector& operator-=(const FourVector& o) {
        for (int i = 0; i < dim; ++i) c[i] -= o.c[i];
        return *this;
    }
    FourVector& operator*=(double s) {
        for (int i = 0; i < dim; ++i) c[i] *= s;
        return *this;
    }

    bool finite() const {
        for (int i = 0; i < dim; ++i)
            if (!std::isfinite(c[i])) return false;
        return true;
    }
};

inline void check_same_dim(const FourVector& a, const FourVector& b, const char* op) {
    if (a.dim != b.dim)
        throw DimensionMismatch(std::string(op) + ": dimensions " + std::to_string(a.dim) +
                                " vs " + std::to_string(b.dim));
}

inline FourVector operator+(FourVector a, const FourVector& b) {
    check_same_dim(a, b, "operator+");
    a += b;
    return a;
}
inline FourVector operator-(FourVector a, const FourVector& b) {
    check_same_dim(a, b, "operator-");
    a -= b;
    return a;
}
inline FourVector operator*(double s, FourVector v) {
    v *= s;
    return v;
}
inline FourVector operator*(FourVector v, double s) {
    v *= s;
    return v;
}
inline FourVector operator-(FourVector v) {
    v *= -1.0;
    return v;
}

/// Minkowski inner product a.b = a^0 b^0 - sum_i a^i b^i.
inline double dot(const FourVector& a, const FourVector& b) {
    check_same_dim(a, b, "dot");
    double s = a.c[0] * b.c[0];
    for (int i = 1; i < a.dim; ++i) s -= a.c[i] * b.c[i];
    return s;
}

/// Lower an index: v_mu = eta_{mu nu} v^nu. Components flip sign on the
/// spatial slots.
inline FourVector lower(FourVector v) {
    for (int i = 1; i < v.dim; ++i) v.c[i] = -v.c[i];
    return v;
}

/// Raise an index; identical operation to lower for this metric.
inline FourVector raise(FourVector v) { return lower(v); }

/// Antisymmetric rank-2 tensor M^{mu nu} = -M^{nu mu}, stored as the strict
/// upper triangle. Index pairs in storage order:
///   dim 4: (0,1) (0,2) (0,3) (1,2) (1,3) (2,3)
///   dim 3: (0,1) (0,2) (1,2)
struct BiVector {
    std::array<double, 6> m{};
    int dim = 4;

    static BiVector zero(int dim) {
        BiVector b;
        b.dim = dim;
        return b;
    }

    int pair_count() const { return dim == 4 ? 6 : 3; }

    static int index(int mu, int nu, int dim) {
        if (dim == 4) {
            static constexpr int idx[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
            return idx[mu][nu];
        }
        static constexpr int idx3[3][3] = {{-1, 0, 1}, {0, -1, 2}, {1, 2, -1}};
        return idx3[mu][nu];
    }

    /// Component M^{mu nu} with antisymmetry applied.
    double operator()(int mu, int nu) const {
        if (mu == nu) return 0.0;
        double v = m[static_cast<std::size_t>(index(mu, nu, dim))];
        return mu < nu ? v : -v;
    }

    void set(int mu, int nu, double v) {
        if (mu == nu) {
            if (v != 0.0) throw InvalidValue("BiVector: diagonal entry must vanish");
            return;
        }
        m[static_cast<std::size_t>(index(mu, nu, dim))] = (mu < nu) ? v : -v;
    }

    BiVector& operator+=(const BiVector& o) {
        for (int i = 0; i < pair_count(); ++i) m[i] += o.m[i];
        return *this;
    }
    BiVector& operator*=(double s) {
        for (int i = 0; i < pair_count(); ++i) m[i] *= s;
        return *this;
    }
};

inline BiVector operator+(BiVector a, const BiVector& b) {
    if (a.dim != b.dim) throw DimensionMismatch("BiVector+: mixed dimensions");
    a += b;
    return a;
}
inline BiVector operator*(double s, BiVector b) {
    b *= s;
    return b;
}

/// Antisymmetrized tensor product with weight 1/2:
///   wedge(a,b)^{mu nu} = (a^mu b^nu - a^nu b^mu) / 2.
/// The 1/2 is a fixed convention applied consistently wherever angular
/// momenta are assembled; only convention-independent invariants are exposed
/// downstream.
inline BiVector wedge(const FourVector& a, const FourVector& b) {
    check_same_dim(a, b, "wedge");
    BiVector r = BiVector::zero(a.dim);
    for (int mu = 0; mu < a.dim; ++mu)
        for (int nu = mu + 1; nu < a.dim; ++nu)
            r.set(mu, nu, 0.5 * (a.c[mu] * b.c[nu] - a.c[nu] * b.c[mu]));
    return r;
}

namespace detail {

/// Parity of (i,j,k) as a permutation of (0,1,2); 0 if any index repeats.
inline int perm_sign3(int i, int j, int k) {
    if (i == j || j == k || i == k) return 0;
    int s = 1;
    if (i > j) { std::swap(i, j); s = -s; }
    if (j > k) { std::swap(j, k); s = -s; }
    if (i > j) { std::swap(i, j); s = -s; }
    return s;
}

inline int perm_sign4(int i, int j, int k, int l) {
    int a[4] = {i, j, k, l};
    int s = 1;
    for (int p = 0; p < 4; ++p)
        for (int q = p + 1; q < 4; ++q) {
            if (a[p] == a[q]) return 0;
            if (a[p] > a[q]) s = -s;
        }
    return s;
}

}  // namespace detail

/// Levi-Civita component eps_{i j k} (all indices down) in 2+1, fixed so that
/// eps_{mu nu rho} e+^mu e-^nu e1^rho = +1 for the standard frame; this forces
/// eps_{012} = -1.
inline double epsilon3_lower(int i, int j, int k) {
    return -static_cast<double>(detail::perm_sign3(i, j, k));
}

/// Levi-Civita component eps_{i j k l} (all indices down) in 3+1, fixed so
/// that eps_{mu nu rho sigma} e+^mu e-^nu e1^rho e2^sigma = +1 for the
/// standard frame; this forces eps_{0123} = -1.
inline double epsilon4_lower(int i, int j, int k, int l) {
    return -static_cast<double>(detail::perm_sign4(i, j, k, l));
}

/// 2+1 contraction eps_{mu rho sigma} P^rho X^sigma. The free index is raised
/// with eta before returning, so the result is an ordinary contravariant
/// FourVector.
inline FourVector levi_civita_contract3(const FourVector& p, const FourVector& x) {
    check_same_dim(p, x, "levi_civita_contract3");
    if (p.dim != 3) throw DimensionMismatch("levi_civita_contract3: requires 2+1 mode");
    FourVector w = FourVector::zero(3);  // lower-index accumulator
    for (int mu = 0; mu < 3; ++mu) {
        double s = 0.0;
        for (int r = 0; r < 3; ++r)
            for (int t = 0; t < 3; ++t) s += epsilon3_lower(mu, r, t) * p.c[r] * x.c[t];
        w.c[mu] = s;
    }
    return raise(w);
}

/// 3+1 contraction eps_{mu nu rho sigma} P^nu M^{rho sigma}, free index raised
/// with eta before returning.
inline FourVector levi_civita_contract4(const FourVector& p, const BiVector& bm) {
    if (p.dim != 4 || bm.dim != 4)
        throw DimensionMismatch("levi_civita_contract4: requires 3+1 mode");
    FourVector w = FourVector::zero(4);  // lower-index accumulator
    for (int mu = 0; mu < 4; ++mu) {
        double s = 0.0;
        for (int nu = 0; nu < 4; ++nu)
            for (int r = 0; r < 4; ++r)
                for (int t = 0; t < 4; ++t)
                    s += epsilon4_lower(mu, nu, r, t) * p.c[nu] * bm(r, t);
        w.c[mu] = s;
    }
    return raise(w);
}

inline void require_finite(const FourVector& v, const char* where) {
    if (!v.finite()) throw InvalidValue(std::string(where) + ": non-finite component");
}

}  // namespace nullfrenet
