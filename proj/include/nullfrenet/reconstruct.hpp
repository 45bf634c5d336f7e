#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "nullfrenet/curve.hpp"
#include "nullfrenet/frame.hpp"
#include "nullfrenet/ode.hpp"
#include "nullfrenet/profile.hpp"

namespace nullfrenet {

/// Curve point: position plus adapted frame at pseudo-arclength sigma.
struct CurveState {
    double sigma = 0.0;
    FourVector x;
    NullFrame frame;

    static CurveState standard(int dim) {
        CurveState s;
        s.x = FourVector::zero(dim);
        s.frame = NullFrame::standard(dim);
        return s;
    }
};

/// Frenet-Serret connection matrix A for the frame ordered (e+, e1, e-, e2):
/// row i gives the expansion of the i-th vector's sigma-derivative.
/// A is an infinitesimal isometry of the null-frame Gram form:
/// A^T G + G A = 0.
inline Eigen::MatrixXd fs_matrix(const CurvaturePair& kappa, int dim) {
    const int n = (dim == 4) ? 4 : 3;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    a(0, 1) = 1.0;                    // e+' = e1
    a(1, 0) = kappa.kappa1;           // e1' = kappa1 e+ + e-
    a(1, 2) = 1.0;
    a(2, 1) = kappa.kappa1;           // e-' = kappa1 e1 (+ kappa2 e2)
    if (dim == 4) {
        a(2, 3) = kappa.kappa2;
        a(3, 0) = kappa.kappa2;       // e2' = kappa2 e+
    }
    return a;
}

/// Gram matrix of the null frame in the (e+, e1, e-, e2) ordering.
inline Eigen::MatrixXd frame_gram_matrix(int dim) {
    const int n = (dim == 4) ? 4 : 3;
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
    g(0, 2) = g(2, 0) = 1.0;
    g(1, 1) = -1.0;
    if (dim == 4) g(3, 3) = -1.0;
    return g;
}

enum class TrajectoryStatus { ok, blow_up };

/// Frame transport result: states at uniform sigma steps plus the curvature
/// values and Gram drift observed along the way.
struct Trajectory {
    std::vector<CurveState> states;
    std::vector<double> kappa1, kappa2;
    std::vector<double> gram;
    double h = 0.0;
    int renorm_every = 0;
    int dim = 4;
    double max_gram_residual = 0.0;
    TrajectoryStatus status = TrajectoryStatus::ok;
    std::string message;
    std::shared_ptr<const CurvatureProfile> profile;
};

namespace detail {

inline void pack_state(const CurveState& s, std::vector<double>& y) {
    const int dim = s.x.dim;
    const int rows = (dim == 4) ? 5 : 4;
    y.resize(static_cast<std::size_t>(rows * dim));
    const FourVector* vs[5] = {&s.x, &s.frame.e_plus, &s.frame.e1, &s.frame.e_minus, &s.frame.e2};
    for (int r = 0; r < rows; ++r)
        for (int i = 0; i < dim; ++i) y[static_cast<std::size_t>(r * dim + i)] = (*vs[r])[i];
}

inline CurveState unpack_state(const std::vector<double>& y, double sigma, int dim) {
    const int rows = (dim == 4) ? 5 : 4;
    CurveState s;
    s.sigma = sigma;
    s.x = FourVector::zero(dim);
    s.frame.dim = dim;
    s.frame.e_plus = FourVector::zero(dim);
    s.frame.e1 = FourVector::zero(dim);
    s.frame.e_minus = FourVector::zero(dim);
    s.frame.e2 = FourVector::zero(dim);
    FourVector* vs[5] = {&s.x, &s.frame.e_plus, &s.frame.e1, &s.frame.e_minus, &s.frame.e2};
    for (int r = 0; r < rows; ++r)
        for (int i = 0; i < dim; ++i) (*vs[r])[i] = y[static_cast<std::size_t>(r * dim + i)];
    return s;
}

}  // namespace detail

/// Synthesize a null curve from a curvature profile by transporting
/// (X, e+, e1, e-, e2) with the shared RK4 kernel; X' = e+ closes the system.
/// Every `renorm_every` steps the frame is projected back onto the exact Gram
/// constraints (0 disables restoration, useful for measuring raw drift). The
/// recorded Gram residuals are measured before each restoration.
inline Trajectory integrate(const CurvatureProfile& profile, const CurveState& init, double sigma_max,
                            double h, int renorm_every = 100) {
    if (!(h > 0.0)) throw InvalidValue("integrate: step size must be positive");
    const int dim = profile.dim;
    if (init.x.dim != dim || init.frame.dim != dim)
        throw DimensionMismatch("integrate: profile/state dimension mismatch");
    if (gram_residual(init.frame) > 1e-12)
        throw InvalidValue("integrate: initial frame violates Gram relations beyond 1e-12");

    const auto steps = static_cast<std::size_t>(std::llround(sigma_max / h));
    Trajectory traj;
    traj.h = h;
    traj.renorm_every = renorm_every;
    traj.dim = dim;
    traj.profile = std::make_shared<CurvatureProfile>(profile);

    auto rhs = [&profile, dim](double s, const std::vector<double>& y, std::vector<double>& dy) {
        const double k1 = profile.kappa1(s, 0);
        const double k2 = (dim == 4) ? profile.kappa2(s, 0) : 0.0;
        dy.assign(y.size(), 0.0);
        // rows: X, e+, e1, e-, (e2)
        for (int i = 0; i < dim; ++i) {
            const double ep = y[static_cast<std::size_t>(dim + i)];
            const double e1 = y[static_cast<std::size_t>(2 * dim + i)];
            const double em = y[static_cast<std::size_t>(3 * dim + i)];
            const double e2 = (dim == 4) ? y[static_cast<std::size_t>(4 * dim + i)] : 0.0;
            dy[static_cast<std::size_t>(i)] = ep;
            dy[static_cast<std::size_t>(dim + i)] = e1;
            dy[static_cast<std::size_t>(2 * dim + i)] = k1 * ep + em;
            dy[static_cast<std::size_t>(3 * dim + i)] = k1 * e1 + k2 * e2;
            if (dim == 4) dy[static_cast<std::size_t>(4 * dim + i)] = k2 * ep;
        }
    };

    std::vector<double> y;
    detail::pack_state(init, y);

    auto record = [&](double sigma) {
        CurveState s = detail::unpack_state(y, sigma, dim);
        const double g = gram_residual(s.frame);
        traj.states.push_back(s);
        traj.gram.push_back(g);
        traj.kappa1.push_back(profile.kappa1(sigma, 0));
        traj.kappa2.push_back(dim == 4 ? profile.kappa2(sigma, 0) : 0.0);
        traj.max_gram_residual = std::max(traj.max_gram_residual, g);
    };

    record(init.sigma);
    for (std::size_t k = 0; k < steps; ++k) {
        const double sigma = init.sigma + static_cast<double>(k) * h;
        rk4_step(y, sigma, h, rhs);
        bool finite = true;
        for (double v : y)
            if (!std::isfinite(v)) finite = false;
        if (!finite) {
            traj.status = TrajectoryStatus::blow_up;
            traj.message = "non-finite state; last good sigma = " +
                           std::to_string(traj.states.back().sigma);
            return traj;
        }
        record(init.sigma + static_cast<double>(k + 1) * h);
        if (renorm_every > 0 && (k + 1) % static_cast<std::size_t>(renorm_every) == 0) {
            // Project back onto the constraints when the projection is
            // well-conditioned and actually improves the residual; frames
            // grown too large for the null-pair solve are left alone (their
            // relative drift is already at the precision floor).
            CurveState s = traj.states.back();
            try {
                const NullFrame cand = restore_frame(s.frame);
                if (gram_residual(cand) <= gram_residual(s.frame)) {
                    s.frame = cand;
                    detail::pack_state(s, y);
                    traj.states.back() = s;
                }
            } catch (const FrameRestoreError&) {
            }
        }
    }
    return traj;
}

/// Present a reconstructed trajectory as a CurveSource. The curve is
/// sigma-parametrized by construction; jets at the recorded grid nodes are
/// generated from the stored frame through the Frenet-Serret recursion with
/// the profile's curvature jets. Evaluation off the grid is refused.
inline CurveSource from_trajectory(const Trajectory& traj) {
    if (traj.states.empty()) throw InvalidValue("from_trajectory: empty trajectory");
    if (!traj.profile) throw InvalidValue("from_trajectory: trajectory carries no profile");
    const int dim = traj.dim;
    auto states = std::make_shared<std::vector<CurveState>>(traj.states);
    auto prof = traj.profile;
    const double s0 = traj.states.front().sigma;
    const double s1 = traj.states.back().sigma;
    const double h = traj.h;
    auto ev = [states, prof, dim, s0, h](double lam, int order) {
        const double ih = (lam - s0) / h;
        const auto idx = static_cast<std::ptrdiff_t>(std::llround(ih));
        if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(states->size()) ||
            std::abs(ih - static_cast<double>(idx)) > 1e-6)
            throw std::domain_error("trajectory curve: evaluation restricted to grid nodes");
        const CurveState& st = (*states)[static_cast<std::size_t>(idx)];
        const Jet k1 = prof->kappa1.jet(st.sigma, std::max(order - 1, 0));
        const Jet k2 = (dim == 4) ? prof->kappa2.jet(st.sigma, std::max(order - 1, 0)) : Jet(0.0, std::max(order - 1, 0));
        const FrameJets fj = frame_jets(st.frame, k1, k2, std::max(order - 1, 0));
        VecJet x(dim, order);
        for (int i = 0; i < dim; ++i) {
            x.comp[i][0] = st.x[i];
            for (int k = 0; k < order; ++k)
                x.comp[i][k + 1] = fj.e_plus.comp[i][k] / static_cast<double>(k + 1);
        }
        return x;
    };
    const int max_order =
        std::min({64, prof->kappa1.max_order() + 1, dim == 4 ? prof->kappa2.max_order() + 1 : 64});
    CurveSource src(dim, s0, s1, max_order, true, SourceKind::trajectory, std::move(ev));
    src.known_profile = prof;
    return src;
}

}  // namespace nullfrenet
