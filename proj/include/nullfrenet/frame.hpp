#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nullfrenet/minkowski.hpp"

namespace nullfrenet {

struct FrameRestoreError : std::runtime_error {
    explicit FrameRestoreError(const std::string& what) : std::runtime_error(what) {}
};

/// Null Frenet-Serret frame {e+, e-, e1, e2} (e2 absent in 2+1 mode).
/// Gram relations: e+.e+ = e-.e- = 0, e+.e- = 1, e1.e1 = e2.e2 = -1,
/// all remaining pairs orthogonal.
struct NullFrame {
    FourVector e_plus, e_minus, e1, e2;
    int dim = 4;

    /// Standard frame: e+ = (1,1,0,0)/sqrt(2), e- = (1,-1,0,0)/sqrt(2),
    /// e1 = (0,0,1,0), e2 = (0,0,0,1). Satisfies the Gram table exactly.
    static NullFrame standard(int dim) {
        NullFrame f;
        f.dim = dim;
        const double s = 1.0 / std::sqrt(2.0);
        if (dim == 4) {
            f.e_plus = FourVector(s, s, 0.0, 0.0);
            f.e_minus = FourVector(s, -s, 0.0, 0.0);
            f.e1 = FourVector(0.0, 0.0, 1.0, 0.0);
            f.e2 = FourVector(0.0, 0.0, 0.0, 1.0);
        } else if (dim == 3) {
            f.e_plus = FourVector(s, s, 0.0);
            f.e_minus = FourVector(s, -s, 0.0);
            f.e1 = FourVector(0.0, 0.0, 1.0);
            f.e2 = FourVector::zero(3);
        } else {
            throw InvalidValue("NullFrame: dimension must be 3 or 4");
        }
        return f;
    }
};

/// Largest deviation from the Gram table over all independent vector pairs.
/// Helix frames contain hyperbolic modes and grow exponentially along the
/// curve; each deviation is therefore measured relative to the Euclidean
/// magnitude of the pair where that exceeds unity, which keeps the residual
/// meaningful at any scale.
inline double gram_residual(const NullFrame& f) {
    auto emag = [](const FourVector& v) {
        double s = 0.0;
        for (int i = 0; i < v.dim; ++i) s += v[i] * v[i];
        return std::sqrt(s);
    };
    double r = 0.0;
    auto acc = [&](const FourVector& a, const FourVector& b, double want) {
        const double dev = std::abs(dot(a, b) - want);
        r = std::max(r, dev / std::max(1.0, emag(a) * emag(b)));
    };
    acc(f.e_plus, f.e_plus, 0.0);
    acc(f.e_minus, f.e_minus, 0.0);
    acc(f.e_plus, f.e_minus, 1.0);
    acc(f.e1, f.e1, -1.0);
    acc(f.e_plus, f.e1, 0.0);
    acc(f.e_minus, f.e1, 0.0);
    if (f.dim == 4) {
        acc(f.e2, f.e2, -1.0);
        acc(f.e_plus, f.e2, 0.0);
        acc(f.e_minus, f.e2, 0.0);
        acc(f.e1, f.e2, 0.0);
    }
    return r;
}

/// Orientation contraction of the frame against the Levi-Civita tensor;
/// +1 for a frame matching the fixed orientation convention.
inline double frame_orientation(const NullFrame& f) {
    if (f.dim == 4) {
        double s = 0.0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                for (int c = 0; c < 4; ++c)
                    for (int d = 0; d < 4; ++d)
                        s += epsilon4_lower(a, b, c, d) * f.e_plus[a] * f.e_minus[b] * f.e1[c] * f.e2[d];
        return s;
    }
    double s = 0.0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) s += epsilon3_lower(a, b, c) * f.e_plus[a] * f.e_minus[b] * f.e1[c];
    return s;
}

/// Project a drifted frame back onto the exact Gram constraints.
///
/// Fixed procedure, anchored on e+:
///   1. replace e+ by the nearby exactly-null vector in span{e+, e-}
///      (continuous root of the nullity quadratic),
///   2. strip the null components from e1, enforce e1.e+ = 0 and e1^2 = -1,
///   3. same for e2, additionally orthogonal to e1,
///   4. solve e- from e-.e+ = 1, e-.e1 = 0, e-.e2 = 0, e-^2 = 0; with e+
///      exactly null the remaining condition is linear and the solution is
///      continuous in the input.
///
/// Rejects frames whose Gram residual exceeds 0.1. The returned frame
/// satisfies the Gram table to roundoff (~1e-15) and is a fixed point of the
/// procedure.
inline NullFrame restore_frame(const NullFrame& in) {
    const double res_in = gram_residual(in);
    if (!(res_in < 0.1)) throw FrameRestoreError("restore_frame: input residual >= 0.1");

    NullFrame f = in;

    // 1. nullify e+ inside span{e+, e-}: (e+ + s e-)^2 = 0, root near s = 0.
    {
        const double a = dot(in.e_minus, in.e_minus);
        const double b = dot(in.e_plus, in.e_minus);
        const double cc = dot(in.e_plus, in.e_plus);
        // a s^2 + 2 b s + cc = 0 with b ~ 1, a, cc small. For exponentially
        // grown frames the null pair is Euclidean-nearly-parallel and the
        // quadratic degenerates; restoration cannot improve such frames.
        const double disc = b * b - a * cc;
        if (!(disc > 0.5 * b * b))
            throw FrameRestoreError("restore_frame: null pair too ill-conditioned to project");
        const double denom = b + std::sqrt(disc);  // b > 0 for a near-standard frame
        if (std::abs(denom) < 1e-12) throw FrameRestoreError("restore_frame: singular nullity solve");
        const double s = -cc / denom;
        f.e_plus = in.e_plus + s * in.e_minus;
    }

    // Strip the null-plane content of v using the approximate e-, then make
    // v.e+ = 0 exact; e+^2 = 0 makes the e- subtraction exact.
    auto strip_null = [&f, &in](const FourVector& v) {
        const double epm = dot(f.e_plus, in.e_minus);
        if (std::abs(epm) < 1e-12) throw FrameRestoreError("restore_frame: singular e+.e-");
        FourVector w = v - (dot(v, f.e_plus) / epm) * in.e_minus;
        w -= (dot(v, in.e_minus) / epm) * f.e_plus;
        return w;
    };
    auto unit_spacelike = [](const FourVector& v, const char* name) {
        const double n2 = -dot(v, v);
        if (!(n2 > 0.0)) throw FrameRestoreError(std::string("restore_frame: ") + name + " not spacelike");
        return (1.0 / std::sqrt(n2)) * v;
    };

    // 2. e1
    f.e1 = unit_spacelike(strip_null(in.e1), "e1");

    // 3. e2, additionally orthogonal to e1
    if (f.dim == 4) {
        FourVector w = strip_null(in.e2);
        w += dot(w, f.e1) * f.e1;  // (w + g e1).e1 = 0 with g = w.e1, since e1^2 = -1
        f.e2 = unit_spacelike(w, "e2");
    }

    // 4. e- = x w + y e+ + z1 e1 + z2 e2 with w the input e-.
    {
        const FourVector& w = in.e_minus;
        const double wp = dot(w, f.e_plus);
        if (std::abs(wp) < 1e-12) throw FrameRestoreError("restore_frame: singular e- solve");
        const double x = 1.0 / wp;
        const double w1 = dot(w, f.e1);
        const double w2 = (f.dim == 4) ? dot(w, f.e2) : 0.0;
        const double z1 = x * w1;
        const double z2 = x * w2;
        const double y = -x * (dot(w, w) + w1 * w1 + w2 * w2) / (2.0 * wp);
        FourVector em = x * w + y * f.e_plus + z1 * f.e1;
        if (f.dim == 4) em += z2 * f.e2;
        f.e_minus = em;
    }

    return f;
}

}  // namespace nullfrenet
