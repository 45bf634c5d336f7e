#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nullfrenet/minkowski.hpp"
#include "nullfrenet/models_spec.hpp"
#include "nullfrenet/profile.hpp"
#include "nullfrenet/reconstruct.hpp"

namespace nullfrenet {

/// Conserved quantities of a model solution at one curve point.
/// spin holds the Pauli-Lubanski vector in 3+1 (normalized by sqrt|M^2| when
/// that is resolvable, see spin_normalized) and the spin pseudo-vector J in
/// 2+1. casimir2 is |M^2| S^2 in 3+1 and S = J.P in 2+1; both are computed
/// in a normalization-independent way.
struct ChargeSet {
    FourVector p;
    BiVector m;
    double mass2 = 0.0;
    FourVector spin;
    double casimir2 = 0.0;
    bool spin_normalized = true;
    int dim = 4;
};

/// Constants of integration of the curvature ODEs as fixed by the Casimirs.
struct FirstIntegralConstants {
    double gamma3 = 0.0, e3 = 0.0;
    double gamma4 = 0.0, e4 = 0.0;
};

namespace detail {

/// eps_{mu rho sigma} M^{rho sigma}, free index raised (2+1).
inline FourVector contract3_bivector(const BiVector& m) {
    if (m.dim != 3) throw DimensionMismatch("contract3_bivector: requires 2+1 mode");
    FourVector w = FourVector::zero(3);
    for (int mu = 0; mu < 3; ++mu) {
        double s = 0.0;
        for (int r = 0; r < 3; ++r)
            for (int t = 0; t < 3; ++t) s += epsilon3_lower(mu, r, t) * m(r, t);
        w[mu] = s;
    }
    return raise(w);
}

/// Fill the spin and second-Casimir entries from P and M.
inline void fill_spin(ChargeSet& c) {
    if (c.dim == 4) {
        const FourVector w = levi_civita_contract4(c.p, c.m);
        // |M^2| S^2 = (W.W)/4 independently of the 1/sqrt|M^2| normalization.
        c.casimir2 = 0.25 * dot(w, w);
        if (std::abs(c.mass2) > 1e-12) {
            c.spin = (0.5 / std::sqrt(std::abs(c.mass2))) * w;
            c.spin_normalized = true;
        } else {
            c.spin = 0.5 * w;
            c.spin_normalized = false;
        }
    } else {
        c.spin = contract3_bivector(c.m);
        c.casimir2 = dot(c.spin, c.p);
        c.spin_normalized = true;
    }
}

}  // namespace detail

/// Charges of the pseudo-arclength model (solutions have constant kappa1 and
/// kappa2 = 0):
///   P = alpha (e- - kappa1 e+),
///   M = P ^ X + alpha e+ ^ e1,  M^2 = -2 alpha^2 kappa1.
inline ChargeSet charges_arclength(double alpha, const CurveState& st, double k1) {
    ChargeSet c;
    c.dim = st.x.dim;
    c.p = alpha * (st.frame.e_minus - k1 * st.frame.e_plus);
    c.m = wedge(c.p, st.x) + alpha * wedge(st.frame.e_plus, st.frame.e1);
    c.mass2 = dot(c.p, c.p);
    detail::fill_spin(c);
    return c;
}

/// Charges of the 2+1 linear_k1 model, plus the constants (gamma3, E3) of
/// the first integral as identified from the Casimirs:
///   gamma3 = -(S + alpha^2) / (2 beta),
///   E3 = (alpha (S + alpha^2) - beta M^2) / (2 beta^2).
inline ChargeSet charges_k1_3d(double alpha, double beta, const CurveState& st, double k1,
                               double k1p, double k1pp, FirstIntegralConstants* derived = nullptr) {
    if (beta == 0.0) throw InvalidValue("charges_k1_3d: beta must be nonzero");
    if (st.x.dim != 3) throw DimensionMismatch("charges_k1_3d: requires 2+1 mode");
    ChargeSet c;
    c.dim = 3;
    const double a_coef = -beta * k1pp + beta * k1 * k1 - alpha * k1;
    const double b_coef = alpha - beta * k1;
    c.p = a_coef * st.frame.e_plus + (beta * k1p) * st.frame.e1 + b_coef * st.frame.e_minus;
    c.m = wedge(c.p, st.x) + 2.0 * beta * wedge(st.frame.e_minus, st.frame.e1) +
          (alpha + beta * k1) * wedge(st.frame.e_plus, st.frame.e1);
    c.mass2 = dot(c.p, c.p);
    detail::fill_spin(c);
    if (derived) {
        const double s_plus_a2 = c.casimir2 + alpha * alpha;
        derived->gamma3 = -s_plus_a2 / (2.0 * beta);
        derived->e3 = (alpha * s_plus_a2 - beta * c.mass2) / (2.0 * beta * beta);
    }
    return c;
}

/// Charges of the 3+1 linear_k1 model, plus gamma4 read off the first
/// integral and E4 from the identification 2 beta E4 = -M^2 - 2 alpha gamma4.
inline ChargeSet charges_k1_4d(double alpha, double beta, const CurveState& st, double k1,
                               double k1p, double k1pp, double k2, double k2p,
                               FirstIntegralConstants* derived = nullptr) {
    if (beta == 0.0) throw InvalidValue("charges_k1_4d: beta must be nonzero");
    if (st.x.dim != 4) throw DimensionMismatch("charges_k1_4d: requires 3+1 mode");
    ChargeSet c;
    c.dim = 4;
    const double a_coef = -beta * k1pp + beta * k1 * k1 - alpha * k1;
    const double b_coef = alpha - beta * k1;
    c.p = a_coef * st.frame.e_plus + b_coef * st.frame.e_minus + (beta * k1p) * st.frame.e1 +
          (2.0 * beta * k2p) * st.frame.e2;
    c.m = wedge(c.p, st.x) + 2.0 * beta * wedge(st.frame.e_minus, st.frame.e1) +
          (alpha + beta * k1) * wedge(st.frame.e_plus, st.frame.e1) +
          2.0 * beta * k2 * wedge(st.frame.e_plus, st.frame.e2);
    c.mass2 = dot(c.p, c.p);
    detail::fill_spin(c);
    if (derived) {
        derived->gamma4 = beta * k1pp - 1.5 * beta * k1 * k1 - beta * k2 * k2 + alpha * k1;
        derived->e4 = (-c.mass2 - 2.0 * alpha * derived->gamma4) / (2.0 * beta);
    }
    return c;
}

/// Charges at a trajectory state for the given model, reading the curvature
/// data from the profile. All charges are evaluated from the transported
/// frame-and-curvature state, never by re-differentiating X, so conservation
/// checks isolate integrator error from extraction error.
inline ChargeSet charges_at(const ModelSpec& model, const Trajectory& traj, std::size_t i,
                            FirstIntegralConstants* derived = nullptr) {
    const CurveState& st = traj.states.at(i);
    const CurvatureProfile& prof = *traj.profile;
    const double s = st.sigma;
    switch (model.kind) {
        case ModelKind::pseudo_arclength:
            return charges_arclength(model.alpha, st, prof.kappa1(s, 0));
        case ModelKind::linear_k1: {
            const double k1 = prof.kappa1(s, 0), k1p = prof.kappa1(s, 1), k1pp = prof.kappa1(s, 2);
            if (model.dim == 3) return charges_k1_3d(model.alpha, model.beta, st, k1, k1p, k1pp, derived);
            return charges_k1_4d(model.alpha, model.beta, st, k1, k1p, k1pp, prof.kappa2(s, 0),
                                 prof.kappa2(s, 1), derived);
        }
        case ModelKind::linear_k2:
            throw InvalidValue("charges_at: no conserved-charge formulas for the linear_k2 model");
    }
    throw InvalidValue("charges_at: unknown model");
}

struct ChargeDrift {
    std::string name;
    double initial = 0.0;
    double max_abs_drift = 0.0;
    double relative = 0.0;
    bool flagged = false;
};

struct DriftReport {
    std::vector<ChargeDrift> entries;
    bool any_flagged = false;
    std::size_t samples = 0;
    /// Relative drift is measured against max(1, |group|_inf at sigma = 0)
    /// per charge group (P, M, scalars); flag threshold 1e-6.
    double flag_threshold = 1e-6;
};

/// Per-charge conservation monitoring along a trajectory.
inline DriftReport drift_report(const Trajectory& traj, const ModelSpec& model, std::size_t stride = 1) {
    if (traj.states.empty()) throw InvalidValue("drift_report: empty trajectory");
    if (stride == 0) stride = 1;
    DriftReport rep;
    const ChargeSet q0 = charges_at(model, traj, 0);
    const int dim = q0.dim;

    std::vector<std::string> names;
    std::vector<double> init;
    auto flatten = [&](const ChargeSet& q, std::vector<double>& out) {
        for (int i = 0; i < dim; ++i) out.push_back(q.p[i]);
        for (int i = 0; i < q.m.pair_count(); ++i) out.push_back(q.m.m[i]);
        out.push_back(q.mass2);
        out.push_back(q.casimir2);
    };
    {
        const char* axes = "txyz";
        for (int i = 0; i < dim; ++i) names.push_back(std::string("P_") + axes[i]);
        for (int mu = 0; mu < dim; ++mu)
            for (int nu = mu + 1; nu < dim; ++nu)
                names.push_back("M_" + std::string(1, axes[mu]) + std::string(1, axes[nu]));
        names.emplace_back("mass2");
        names.emplace_back("casimir2");
        flatten(q0, init);
    }

    std::vector<double> drift(init.size(), 0.0);
    for (std::size_t i = 0; i < traj.states.size(); i += stride) {
        std::vector<double> cur;
        flatten(charges_at(model, traj, i), cur);
        for (std::size_t k = 0; k < cur.size(); ++k)
            drift[k] = std::max(drift[k], std::abs(cur[k] - init[k]));
        ++rep.samples;
    }

    // group scales
    double p_scale = 1.0, m_scale = 1.0;
    for (int i = 0; i < dim; ++i) p_scale = std::max(p_scale, std::abs(init[i]));
    for (int i = 0; i < q0.m.pair_count(); ++i)
        m_scale = std::max(m_scale, std::abs(init[dim + i]));

    for (std::size_t k = 0; k < drift.size(); ++k) {
        ChargeDrift e;
        e.name = names[k];
        e.initial = init[k];
        e.max_abs_drift = drift[k];
        double scale = 1.0;
        if (k < static_cast<std::size_t>(dim)) scale = p_scale;
        else if (k < static_cast<std::size_t>(dim + q0.m.pair_count())) scale = m_scale;
        else scale = std::max(1.0, std::abs(init[k]));
        e.relative = drift[k] / scale;
        e.flagged = e.relative > rep.flag_threshold;
        rep.any_flagged = rep.any_flagged || e.flagged;
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

}  // namespace nullfrenet
