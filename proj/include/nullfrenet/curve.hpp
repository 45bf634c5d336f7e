#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "nullfrenet/frame.hpp"
#include "nullfrenet/jets.hpp"
#include "nullfrenet/minkowski.hpp"
#include "nullfrenet/profile.hpp"
#include "nullfrenet/spline.hpp"

namespace nullfrenet {

/// Raised where the pseudo-arclength density is undefined (acceleration not
/// spacelike); carries the offending parameter value.
struct DegenerateCurve : std::runtime_error {
    double lambda;
    DegenerateCurve(const std::string& what, double l)
        : std::runtime_error(what + " at lambda=" + std::to_string(l)), lambda(l) {}
};

/// Raised when frame extraction fails (null condition violated, curvature
/// radicand negative, Gram residual out of tolerance).
struct ExtractionFailure : std::runtime_error {
    double lambda;
    ExtractionFailure(const std::string& what, double l)
        : std::runtime_error(what + " at lambda=" + std::to_string(l)), lambda(l) {}
};

enum class SourceKind { analytic, sampled, trajectory };

struct ExtractionTolerances {
    double tol_null = 1e-10;      // |Xdot.Xdot| bound
    double tol_frame = 1e-9;      // Gram residual bound on extracted frames
    double tol_k2 = 1e-6;         // below this kappa2, e2 is completed by orientation
    double tol_radicand = 1e-12;  // kappa2 radicand clamp window

    /// Spline derivatives of sampled data are noisy; tolerances widen there.
    static ExtractionTolerances for_kind(SourceKind k) {
        ExtractionTolerances t;
        if (k == SourceKind::sampled) {
            t.tol_null = 1e-3;
            t.tol_frame = 1e-3;
            t.tol_radicand = 1e-6;
        }
        return t;
    }
};

/// A null curve presented through a jet evaluator: jets(lambda, order) returns
/// the Taylor expansion of X about lambda, truncated at `order`. Immutable
/// after construction and shareable across threads.
class CurveSource {
public:
    using JetEvaluator = std::function<VecJet(double, int)>;

    CurveSource() = default;
    CurveSource(int dim, double lambda0, double lambda1, int max_order, bool sigma_parametrized,
                SourceKind kind, JetEvaluator ev)
        : dim_(dim),
          lambda0_(lambda0),
          lambda1_(lambda1),
          max_order_(max_order),
          sigma_parametrized_(sigma_parametrized),
          kind_(kind),
          ev_(std::move(ev)) {
        if (dim != 3 && dim != 4) throw InvalidValue("CurveSource: dimension must be 3 or 4");
        if (!(lambda1 > lambda0)) throw InvalidValue("CurveSource: empty parameter domain");
    }

    VecJet jets(double lambda, int order) const {
        if (order > max_order_)
            throw std::out_of_range("CurveSource: insufficient derivative order (have " +
                                    std::to_string(max_order_) + ", need " + std::to_string(order) + ")");
        const double slack = 1e-9 * (lambda1_ - lambda0_) + 1e-12;
        if (lambda < lambda0_ - slack || lambda > lambda1_ + slack)
            throw std::domain_error("CurveSource: lambda outside [" + std::to_string(lambda0_) + ", " +
                                    std::to_string(lambda1_) + "]");
        return ev_(lambda, order);
    }

    int dim() const { return dim_; }
    double lambda0() const { return lambda0_; }
    double lambda1() const { return lambda1_; }
    int max_order() const { return max_order_; }
    bool sigma_parametrized() const { return sigma_parametrized_; }
    SourceKind kind() const { return kind_; }

    /// Curvature profile of the curve when known by construction (builtins,
    /// reconstructed trajectories); empty otherwise.
    std::shared_ptr<const CurvatureProfile> known_profile;

private:
    int dim_ = 4;
    double lambda0_ = 0.0, lambda1_ = 1.0;
    int max_order_ = 0;
    bool sigma_parametrized_ = false;
    SourceKind kind_ = SourceKind::analytic;
    JetEvaluator ev_;
};

namespace detail {

inline double euclid_sq(const FourVector& v) {
    double s = 0.0;
    for (int i = 0; i < v.dim; ++i) s += v[i] * v[i];
    return s;
}

inline void check_null_tangent(const VecJet& x, double lambda, double tol_null) {
    const VecJet xd = x.derivative();
    const double n = dot(xd, xd).value();
    const double scale = std::max(1.0, euclid_sq(xd.value()));
    if (std::abs(n) > tol_null * scale)
        throw ExtractionFailure("curve tangent not null (Xdot.Xdot = " + std::to_string(n) + ")", lambda);
}

}  // namespace detail

/// Pseudo-arclength density d sigma / d lambda = (-Xddot.Xddot)^{1/4}.
inline double pseudo_arclength_density(const CurveSource& src, double lambda,
                                       const ExtractionTolerances& tol = {}) {
    VecJet x = src.jets(lambda, 2);
    detail::check_null_tangent(x, lambda, tol.tol_null);
    const VecJet xdd = x.derivative().derivative();
    const double w = -dot(xdd, xdd).value();
    if (!(w > 0.0)) throw DegenerateCurve("pseudo-arclength density undefined (Xddot.Xddot >= 0)", lambda);
    return std::pow(w, 0.25);
}

/// Derivatives of X with respect to pseudo-arclength at the point lambda,
/// orders 1..order (order <= 4). Exact chain rule: d/dsigma = (1/v) d/dlambda
/// propagated through truncated Taylor arithmetic; requires lambda-derivatives
/// of order order+1 from the source.
inline std::vector<FourVector> sigma_derivatives(const CurveSource& src, double lambda, int order,
                                                 const ExtractionTolerances& tol = {}) {
    if (order < 1 || order > 4) throw std::out_of_range("sigma_derivatives: order must be 1..4");
    VecJet x = src.jets(lambda, order + 1);
    detail::check_null_tangent(x, lambda, tol.tol_null);
    const VecJet xdd = x.derivative().derivative();
    const Jet w = -dot(xdd, xdd);
    if (!(w.value() > 0.0))
        throw DegenerateCurve("sigma_derivatives: pseudo-arclength density undefined", lambda);
    const Jet vinv = w.pow(-0.25);
    std::vector<FourVector> out;
    out.reserve(static_cast<std::size_t>(order));
    VecJet cur = x;
    for (int k = 1; k <= order; ++k) {
        cur = vinv * cur.derivative();
        out.push_back(cur.value());
    }
    return out;
}

struct CurvaturePair {
    double kappa1 = 0.0;
    double kappa2 = 0.0;
};

struct ExtractResult {
    NullFrame frame;
    CurvaturePair kappa;
    double density = 0.0;
    double gram_residual = 0.0;
};

namespace detail {

/// Complete e2 as the unit spacelike vector orthogonal to {e+, e-, e1}, signed
/// so that the frame orientation contraction is +1. Used where kappa2 is too
/// small to divide by.
inline FourVector complete_e2(const NullFrame& partial) {
    const FourVector &ep = partial.e_plus, &em = partial.e_minus, &e1 = partial.e1;
    FourVector best = FourVector::zero(4);
    double best_norm = -1.0;
    for (int i = 0; i < 4; ++i) {
        FourVector w = FourVector::zero(4);
        w[i] = 1.0;
        FourVector p = w - dot(w, em) * ep - dot(w, ep) * em + dot(w, e1) * e1;
        const double n2 = -dot(p, p);
        if (n2 > best_norm) {
            best_norm = n2;
            best = p;
        }
    }
    if (!(best_norm > 0.0)) throw FrameRestoreError("complete_e2: no spacelike complement found");
    best *= 1.0 / std::sqrt(best_norm);
    NullFrame f = partial;
    f.e2 = best;
    if (frame_orientation(f) < 0.0) best *= -1.0;
    return best;
}

}  // namespace detail

/// Frenet-Serret data of the curve at parameter value lambda: frame,
/// curvatures, density. The returned frame satisfies the Gram relations to
/// tol_frame or the call fails.
inline ExtractResult extract_at_lambda(const CurveSource& src, double lambda,
                                       const ExtractionTolerances& tol = {}) {
    const int dim = src.dim();
    const int order = (dim == 4) ? 4 : 3;
    const auto d = sigma_derivatives(src, lambda, order, tol);
    ExtractResult r;
    r.density = pseudo_arclength_density(src, lambda, tol);
    r.frame.dim = dim;
    r.frame.e_plus = d[0];
    r.frame.e1 = d[1];
    const double x3sq = dot(d[2], d[2]);
    r.kappa.kappa1 = 0.5 * x3sq;
    r.frame.e_minus = d[2] - r.kappa.kappa1 * d[0];
    if (dim == 4) {
        const double rad = -dot(d[3], d[3]) - x3sq * x3sq;
        const double scale = std::max(1.0, detail::euclid_sq(d[3]));
        if (rad < -tol.tol_radicand * scale)
            throw ExtractionFailure("kappa2 radicand negative (" + std::to_string(rad) +
                                        "); curve not generic",
                                    lambda);
        r.kappa.kappa2 = (rad > tol.tol_radicand * scale) ? std::sqrt(rad) : 0.0;
        if (r.kappa.kappa2 > tol.tol_k2) {
            const double k1prime = dot(d[3], d[2]);
            const FourVector eminus_prime = d[3] - k1prime * d[0] - r.kappa.kappa1 * d[1];
            r.frame.e2 = (1.0 / r.kappa.kappa2) * (eminus_prime - r.kappa.kappa1 * d[1]);
        } else {
            r.frame.e2 = detail::complete_e2(r.frame);
        }
    }
    r.gram_residual = gram_residual(r.frame);
    if (r.gram_residual > tol.tol_frame)
        throw ExtractionFailure("extracted frame Gram residual " + std::to_string(r.gram_residual) +
                                    " exceeds tolerance",
                                lambda);
    return r;
}

/// Monotone map between the curve parameter lambda and pseudo-arclength
/// sigma (anchored at sigma(lambda0) = 0). Built by adaptive Gauss-Kronrod
/// quadrature of the density over checkpoint cells; the inverse is solved by
/// bisection-seeded Newton on the forward map.
class Reparametrization {
public:
    Reparametrization(const CurveSource& src, int checkpoints = 256, ExtractionTolerances tol = {})
        : src_(src), tol_(tol) {
        if (checkpoints < 2) throw std::invalid_argument("Reparametrization: need >= 2 checkpoints");
        const double l0 = src.lambda0(), l1 = src.lambda1();
        lambda_.resize(static_cast<std::size_t>(checkpoints) + 1);
        sigma_.resize(lambda_.size());
        lambda_[0] = l0;
        sigma_[0] = 0.0;
        for (std::size_t i = 1; i < lambda_.size(); ++i) {
            lambda_[i] = l0 + (l1 - l0) * static_cast<double>(i) / checkpoints;
            sigma_[i] = sigma_[i - 1] + integrate(lambda_[i - 1], lambda_[i]);
            if (!(sigma_[i] > sigma_[i - 1]))
                throw DegenerateCurve("Reparametrization: density not strictly positive", lambda_[i]);
        }
    }

    double sigma_of(double lambda) const {
        const auto i = cell_for_lambda(lambda);
        return sigma_[i] + integrate(lambda_[i], lambda);
    }

    double lambda_of(double sigma) const {
        if (sigma < -1e-12 || sigma > total_sigma() * (1.0 + 1e-12))
            throw std::domain_error("Reparametrization: sigma outside [0, total]");
        // Bracket by checkpoint, then Newton (sigma' = density > 0).
        auto it = std::upper_bound(sigma_.begin(), sigma_.end(), sigma);
        std::size_t i = (it == sigma_.begin()) ? 0 : static_cast<std::size_t>(it - sigma_.begin()) - 1;
        if (i + 1 >= sigma_.size()) i = sigma_.size() - 2;
        double lam = lambda_[i] +
                     (lambda_[i + 1] - lambda_[i]) * (sigma - sigma_[i]) / (sigma_[i + 1] - sigma_[i]);
        const double span = src_.lambda1() - src_.lambda0();
        for (int iter = 0; iter < 25; ++iter) {
            const double f = sigma_[i] + integrate(lambda_[i], lam) - sigma;
            const double v = pseudo_arclength_density(src_, lam, tol_);
            const double step = f / v;
            lam -= step;
            lam = std::clamp(lam, src_.lambda0(), src_.lambda1());
            if (std::abs(step) < 1e-13 * span) break;
        }
        return lam;
    }

    double total_sigma() const { return sigma_.back(); }

private:
    std::size_t cell_for_lambda(double lambda) const {
        auto it = std::upper_bound(lambda_.begin(), lambda_.end(), lambda);
        if (it == lambda_.begin()) return 0;
        std::size_t i = static_cast<std::size_t>(it - lambda_.begin()) - 1;
        return std::min(i, lambda_.size() - 2);
    }

    // Fixed-order Gauss on checkpoint cells: cells are short and the density
    // is smooth there, so 31 nodes reach roundoff without adaptive recursion.
    double integrate(double a, double b) const {
        if (a == b) return 0.0;
        auto f = [this](double l) { return pseudo_arclength_density(src_, l, tol_); };
        return boost::math::quadrature::gauss<double, 31>::integrate(f, a, b);
    }

    CurveSource src_;
    ExtractionTolerances tol_;
    std::vector<double> lambda_, sigma_;
};

inline Reparametrization reparametrize(const CurveSource& src, int checkpoints = 256,
                                       const ExtractionTolerances& tol = {}) {
    return Reparametrization(src, checkpoints, tol);
}

/// Frame and curvatures at pseudo-arclength sigma. For sigma-parametrized
/// sources sigma is the parameter itself; otherwise a Reparametrization must
/// be supplied (or is built on the fly).
inline ExtractResult frame_at(const CurveSource& src, double sigma, const ExtractionTolerances& tol = {},
                              const Reparametrization* map = nullptr) {
    double lambda;
    if (src.sigma_parametrized()) {
        lambda = src.lambda0() + sigma;
    } else if (map != nullptr) {
        lambda = map->lambda_of(sigma);
    } else {
        lambda = Reparametrization(src, 256, tol).lambda_of(sigma);
    }
    return extract_at_lambda(src, lambda, tol);
}

// ---------------------------------------------------------------------------
// Frame transport jets
// ---------------------------------------------------------------------------

struct FrameJets {
    VecJet e_plus, e1, e_minus, e2;
    int dim = 4;
};

/// Taylor expansion of the frame vectors along the curve, generated by the
/// Frenet-Serret recursion from the frame at one point and curvature jets:
///   e+' = e1, e1' = kappa1 e+ + e-, e-' = kappa1 e1 + kappa2 e2,
///   e2' = kappa2 e+.
inline FrameJets frame_jets(const NullFrame& f, const Jet& kappa1, const Jet& kappa2, int order) {
    const int dim = f.dim;
    const int n = order;
    auto coeffs = [&](int) { return std::vector<FourVector>(static_cast<std::size_t>(n) + 1, FourVector::zero(dim)); };
    std::vector<FourVector> ap = coeffs(0), a1 = coeffs(0), am = coeffs(0), a2 = coeffs(0);
    ap[0] = f.e_plus;
    a1[0] = f.e1;
    am[0] = f.e_minus;
    if (dim == 4) a2[0] = f.e2;

    auto conv = [&](const Jet& kj, const std::vector<FourVector>& a, int k) {
        FourVector s = FourVector::zero(dim);
        for (int j = 0; j <= k && j <= kj.order(); ++j) s += kj[j] * a[static_cast<std::size_t>(k - j)];
        return s;
    };
    for (int k = 0; k < n; ++k) {
        const double inv = 1.0 / static_cast<double>(k + 1);
        ap[k + 1] = inv * a1[k];
        a1[k + 1] = inv * (conv(kappa1, ap, k) + am[k]);
        FourVector dm = conv(kappa1, a1, k);
        if (dim == 4) dm += conv(kappa2, a2, k);
        am[k + 1] = inv * dm;
        if (dim == 4) a2[k + 1] = inv * conv(kappa2, ap, k);
    }

    auto pack = [&](const std::vector<FourVector>& a) {
        VecJet v(dim, n);
        for (int i = 0; i < dim; ++i)
            for (int k = 0; k <= n; ++k) v.comp[i][k] = a[static_cast<std::size_t>(k)][i];
        return v;
    };
    FrameJets out;
    out.dim = dim;
    out.e_plus = pack(ap);
    out.e1 = pack(a1);
    out.e_minus = pack(am);
    if (dim == 4) out.e2 = pack(a2);
    return out;
}

// ---------------------------------------------------------------------------
// Builtin curves
// ---------------------------------------------------------------------------

/// The null cubic X(s) = s e+ + s^2/2 e1 + s^3/6 e-, the zero-curvature
/// solution of the frame system through the standard frame. Exactly
/// sigma-parametrized with density 1.
inline CurveSource make_null_cubic(int dim, double sigma_max) {
    const NullFrame f = NullFrame::standard(dim);
    auto ev = [f, dim](double lam, int order) {
        VecJet x(dim, order);
        const FourVector x0 = lam * f.e_plus + (lam * lam / 2.0) * f.e1 + (lam * lam * lam / 6.0) * f.e_minus;
        const FourVector x1 = f.e_plus + lam * f.e1 + (lam * lam / 2.0) * f.e_minus;
        const FourVector x2 = f.e1 + lam * f.e_minus;
        for (int i = 0; i < dim; ++i) {
            x.comp[i][0] = x0[i];
            if (order >= 1) x.comp[i][1] = x1[i];
            if (order >= 2) x.comp[i][2] = x2[i] / 2.0;
            if (order >= 3) x.comp[i][3] = f.e_minus[i] / 6.0;
        }
        return x;
    };
    CurveSource src(dim, 0.0, sigma_max, 64, true, SourceKind::analytic, std::move(ev));
    src.known_profile = std::make_shared<CurvatureProfile>(CurvatureProfile::constants(dim, 0.0, 0.0, sigma_max));
    return src;
}

/// Null helix with constant curvatures: the frame system has constant
/// coefficients, so the augmented state (X, e+, e1, e-, e2) evolves by a
/// matrix exponential. Jets of any order are exact (powers of the generator).
inline CurveSource make_helix(int dim, double kappa1, double kappa2, double sigma_max) {
    if (dim == 3 && kappa2 != 0.0) throw InvalidValue("make_helix: kappa2 must vanish in 2+1 mode");
    const int n = (dim == 4) ? 5 : 4;  // rows: X, e+, e1, e-, (e2)
    Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(n, n);
    gen(0, 1) = 1.0;
    gen(1, 2) = 1.0;
    gen(2, 1) = kappa1;
    gen(2, 3) = 1.0;
    gen(3, 2) = kappa1;
    if (dim == 4) {
        gen(3, 4) = kappa2;
        gen(4, 1) = kappa2;
    }
    const NullFrame f = NullFrame::standard(dim);
    Eigen::MatrixXd s0 = Eigen::MatrixXd::Zero(n, dim);
    for (int i = 0; i < dim; ++i) {
        s0(1, i) = f.e_plus[i];
        s0(2, i) = f.e1[i];
        s0(3, i) = f.e_minus[i];
        if (dim == 4) s0(4, i) = f.e2[i];
    }
    auto ev = [gen, s0, dim](double lam, int order) {
        Eigen::MatrixXd state = (lam * gen).exp() * s0;
        VecJet x(dim, order);
        Eigen::MatrixXd p = state;
        double fact = 1.0;
        for (int k = 0; k <= order; ++k) {
            if (k > 0) {
                fact *= static_cast<double>(k);
                p = gen * p;
                for (int i = 0; i < dim; ++i) x.comp[i][k] = p(0, i) / fact;
            } else {
                for (int i = 0; i < dim; ++i) x.comp[i][0] = state(0, i);
            }
        }
        return x;
    };
    CurveSource src(dim, 0.0, sigma_max, 64, true, SourceKind::analytic, std::move(ev));
    src.known_profile =
        std::make_shared<CurvatureProfile>(CurvatureProfile::constants(dim, kappa1, kappa2, sigma_max));
    return src;
}

/// Curve from uniformly spaced samples, fitted per component by an
/// interpolating quintic spline. Derivatives above order 5 are unavailable;
/// high-order spline derivatives amplify sample noise, so extraction runs
/// with the loosened sampled-mode tolerances.
inline CurveSource make_sampled_curve(int dim, const std::vector<double>& lambdas,
                                      const std::vector<FourVector>& points) {
    if (lambdas.size() != points.size()) throw InvalidValue("make_sampled_curve: size mismatch");
    if (lambdas.size() < 6) throw InvalidValue("make_sampled_curve: need at least 6 samples");
    const double h = lambdas[1] - lambdas[0];
    if (!(h > 0.0)) throw InvalidValue("make_sampled_curve: lambdas not increasing");
    for (std::size_t i = 1; i < lambdas.size(); ++i) {
        if (std::abs(lambdas[i] - lambdas[0] - static_cast<double>(i) * h) > 1e-9 * std::abs(h) * static_cast<double>(lambdas.size()))
            throw InvalidValue("make_sampled_curve: samples must be uniformly spaced");
    }
    auto splines = std::make_shared<std::vector<QuinticSpline>>();
    for (int i = 0; i < dim; ++i) {
        std::vector<double> comp(points.size());
        for (std::size_t k = 0; k < points.size(); ++k) {
            if (points[k].dim != dim) throw DimensionMismatch("make_sampled_curve: mixed dimensions");
            require_finite(points[k], "make_sampled_curve");
            comp[k] = points[k][i];
        }
        splines->emplace_back(lambdas[0], h, comp);
    }
    auto ev = [splines, dim](double lam, int order) {
        VecJet x(dim, order);
        for (int i = 0; i < dim; ++i) {
            std::vector<double> d(static_cast<std::size_t>(order) + 1);
            for (int k = 0; k <= order; ++k) d[static_cast<std::size_t>(k)] = (*splines)[static_cast<std::size_t>(i)](lam, k);
            Jet j = Jet::from_derivatives(d);
            x.comp[i] = j;
        }
        return x;
    };
    return CurveSource(dim, lambdas.front(), lambdas.back(), 5, false, SourceKind::sampled, std::move(ev));
}

}  // namespace nullfrenet
