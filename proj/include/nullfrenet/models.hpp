#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nullfrenet/jets.hpp"
#include "nullfrenet/models_spec.hpp"
#include "nullfrenet/ode.hpp"
#include "nullfrenet/profile.hpp"

namespace nullfrenet {

struct EomResidual {
    double eps_minus_eq = 0.0;  // Euler-Lagrange component paired with eps_minus
    double eps_2_eq = 0.0;      // component paired with eps_2 (3+1 only)
};

/// Left-hand sides of the Euler-Lagrange equations of the chosen model at
/// sigma; both vanish along solutions.
///
///   pseudo-arclength:  alpha kappa1',  alpha kappa2
///   linear_k1:  beta k1''' - (3 beta/2)(k1^2)' - beta (k2^2)' + alpha k1',
///               2 beta k2'' - beta k1 k2 + alpha k2
///   linear_k2:  lambda2 (k2''' - 2 k1 k2' + k1' k2),
///               lambda2 (2 k1'' + k2^2)
inline EomResidual eom_residual(const ModelSpec& model, const CurvatureProfile& prof, double sigma) {
    model.validate();
    EomResidual r;
    const bool has_k2 = (model.dim == 4);
    switch (model.kind) {
        case ModelKind::pseudo_arclength: {
            r.eps_minus_eq = model.alpha * prof.kappa1(sigma, 1);
            r.eps_2_eq = has_k2 ? model.alpha * prof.kappa2(sigma, 0) : 0.0;
            break;
        }
        case ModelKind::linear_k1: {
            const double k1 = prof.kappa1(sigma, 0), k1p = prof.kappa1(sigma, 1),
                         k1ppp = prof.kappa1(sigma, 3);
            r.eps_minus_eq = model.beta * k1ppp - 3.0 * model.beta * k1 * k1p + model.alpha * k1p;
            if (has_k2) {
                const double k2 = prof.kappa2(sigma, 0), k2p = prof.kappa2(sigma, 1),
                             k2pp = prof.kappa2(sigma, 2);
                r.eps_minus_eq -= 2.0 * model.beta * k2 * k2p;
                r.eps_2_eq = 2.0 * model.beta * k2pp - model.beta * k1 * k2 + model.alpha * k2;
            }
            break;
        }
        case ModelKind::linear_k2: {
            const double k1 = prof.kappa1(sigma, 0), k1p = prof.kappa1(sigma, 1),
                         k1pp = prof.kappa1(sigma, 2);
            const double k2 = prof.kappa2(sigma, 0), k2p = prof.kappa2(sigma, 1),
                         k2ppp = prof.kappa2(sigma, 3);
            r.eps_minus_eq = model.lambda2 * (k2ppp - 2.0 * k1 * k2p + k1p * k2);
            r.eps_2_eq = model.lambda2 * (2.0 * k1pp + k2 * k2);
            break;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// First integrals and potentials of the linear-in-kappa1 model
// ---------------------------------------------------------------------------

/// 2+1 first integral of the linear_k1 model; vanishes along solutions:
///   (1/2) b k1'^2 - (b/2) k1^3 + (1/2) a k1^2 - gamma3 k1 - E3.
inline double first_integral_k1_3d(const ScalarProfile& kappa1, double alpha, double beta,
                                   double gamma3, double e3, double sigma) {
    const double k = kappa1(sigma, 0), kp = kappa1(sigma, 1);
    return 0.5 * beta * kp * kp - 0.5 * beta * k * k * k + 0.5 * alpha * k * k - gamma3 * k - e3;
}

/// 3+1 first integral (once-integrated eps_minus equation):
///   b k1'' - (3b/2) k1^2 - b k2^2 + a k1 - gamma4.
inline double first_integral_k1_4d(const CurvatureProfile& prof, double alpha, double beta,
                                   double gamma4, double sigma) {
    const double k1 = prof.kappa1(sigma, 0), k1pp = prof.kappa1(sigma, 2);
    const double k2 = prof.kappa2(sigma, 0);
    return beta * k1pp - 1.5 * beta * k1 * k1 - beta * k2 * k2 + alpha * k1 - gamma4;
}

/// Potential of the fictitious two-dimensional particle:
///   V = -(b/2) k1^3 + (a/2) k1^2 - (gamma4 + b k2^2) k1 + a k2^2.
inline double potential_k1_4d(double k1, double k2, double alpha, double beta, double gamma4) {
    return -0.5 * beta * k1 * k1 * k1 + 0.5 * alpha * k1 * k1 - (gamma4 + beta * k2 * k2) * k1 +
           alpha * k2 * k2;
}

/// Conserved energy of the 3+1 linear_k1 model; vanishes along solutions
/// when E4 matches: (1/2) b k1'^2 + 2 b k2'^2 + V - E4.
inline double energy_k1_4d(const CurvatureProfile& prof, double alpha, double beta, double gamma4,
                           double e4, double sigma) {
    const double k1 = prof.kappa1(sigma, 0), k1p = prof.kappa1(sigma, 1);
    const double k2 = prof.kappa2(sigma, 0), k2p = prof.kappa2(sigma, 1);
    return 0.5 * beta * k1p * k1p + 2.0 * beta * k2p * k2p +
           potential_k1_4d(k1, k2, alpha, beta, gamma4) - e4;
}

// ---------------------------------------------------------------------------
// Taylor recursions for solver-produced profiles (exact derivatives through
// the ODE structure; evaluation off-grid by Taylor step from the nearest node)
// ---------------------------------------------------------------------------

namespace detail {

/// kappa1 jet from (k, k') under k'' = 1.5 k^2 - (a/b) k + g/b.
inline Jet k1_3d_taylor(double k, double kp, double a_over_b, double g_over_b, int order) {
    Jet c(0.0, order);
    c[0] = k;
    if (order >= 1) c[1] = kp;
    for (int m = 0; m + 2 <= order; ++m) {
        // coefficient m of 1.5 c^2 - (a/b) c + g/b, using c_0..c_m
        double sq = 0.0;
        for (int j = 0; j <= m; ++j) sq += c[j] * c[m - j];
        double rhs = 1.5 * sq - a_over_b * c[m] + ((m == 0) ? g_over_b : 0.0);
        c[m + 2] = rhs / ((m + 1.0) * (m + 2.0));
    }
    return c;
}

/// Coupled (kappa1, kappa2) jets under
///   k1'' = (g4 + 1.5 b k1^2 + b k2^2 - a k1)/b,
///   k2'' = (b k1 k2 - a k2) / (2 b).
inline std::pair<Jet, Jet> k1_4d_taylor(double k1, double k1p, double k2, double k2p, double alpha,
                                        double beta, double gamma4, int order) {
    Jet c(0.0, order), d(0.0, order);
    c[0] = k1;
    d[0] = k2;
    if (order >= 1) {
        c[1] = k1p;
        d[1] = k2p;
    }
    for (int m = 0; m + 2 <= order; ++m) {
        double c2 = 0.0, d2 = 0.0, cd = 0.0;
        for (int j = 0; j <= m; ++j) {
            c2 += c[j] * c[m - j];
            d2 += d[j] * d[m - j];
            cd += c[j] * d[m - j];
        }
        const double rhs1 =
            (((m == 0) ? gamma4 : 0.0) + 1.5 * beta * c2 + beta * d2 - alpha * c[m]) / beta;
        const double rhs2 = (beta * cd - alpha * d[m]) / (2.0 * beta);
        c[m + 2] = rhs1 / ((m + 1.0) * (m + 2.0));
        d[m + 2] = rhs2 / ((m + 1.0) * (m + 2.0));
    }
    return {c, d};
}

/// Coupled (kappa2, kappa1) jets under k2''' = 2 k1 k2' - k1' k2 and
/// k1'' = -k2^2 / 2.
inline std::pair<Jet, Jet> k2_taylor(double k2, double k2p, double k2pp, double k1, double k1p,
                                     int order) {
    Jet e(0.0, order), c(0.0, order);
    e[0] = k2;
    c[0] = k1;
    if (order >= 1) {
        e[1] = k2p;
        c[1] = k1p;
    }
    if (order >= 2) e[2] = 0.5 * k2pp;
    for (int m = 0; m + 2 <= order || m + 3 <= order; ++m) {
        // k1 recursion needs e through m; e recursion needs c, e through m.
        if (m + 2 <= order) {
            double e2 = 0.0;
            for (int j = 0; j <= m; ++j) e2 += e[j] * e[m - j];
            c[m + 2] = -0.5 * e2 / ((m + 1.0) * (m + 2.0));
        }
        if (m + 3 <= order) {
            // coefficient m of 2 k1 k2' - k1' k2
            double t1 = 0.0, t2 = 0.0;
            for (int j = 0; j <= m; ++j) {
                t1 += c[j] * (m - j + 1.0) * e[m - j + 1];
                t2 += (j + 1.0) * c[j + 1] * e[m - j];
            }
            e[m + 3] = (2.0 * t1 - t2) / ((m + 1.0) * (m + 2.0) * (m + 3.0));
        }
    }
    return {e, c};
}

/// Evaluate the order-th derivative of a Taylor jet at offset delta from its
/// expansion point.
inline double taylor_eval(const Jet& c, double delta, int order) {
    double acc = 0.0;
    for (int k = c.order(); k >= order; --k) {
        double fact = 1.0;
        for (int i = 0; i < order; ++i) fact *= static_cast<double>(k - i);
        acc = acc * delta + c[k] * fact;
    }
    return acc;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// solve_k1_3d: quadrature-form integration with turning-point handling
// ---------------------------------------------------------------------------

template <class Rhs>
void rk4_step_scalar(double& y, double h, Rhs&& rhs) {
    const double k1 = rhs(y);
    const double k2 = rhs(y + 0.5 * h * k1);
    const double k3 = rhs(y + 0.5 * h * k2);
    const double k4 = rhs(y + h * k3);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Cubic radicand of the 2+1 first integral in monic form,
///   R(k) = k^3 - (a/b) k^2 + (2 g/b) k + 2 E/b,  kappa1' = +- sqrt(R).
struct RadicandK1 {
    double alpha, beta, gamma3, e3;

    double operator()(double k) const {
        return k * k * k - (alpha / beta) * k * k + (2.0 * gamma3 / beta) * k + 2.0 * e3 / beta;
    }
    double deriv(double k) const {
        return 3.0 * k * k - 2.0 * (alpha / beta) * k + 2.0 * gamma3 / beta;
    }
    double deriv2(double k) const { return 6.0 * k - 2.0 * alpha / beta; }

    double scale(double k) const {
        const double a = std::abs(alpha / beta), g = std::abs(2.0 * gamma3 / beta),
                     e = std::abs(2.0 * e3 / beta), ak = std::abs(k);
        return 1.0 + ak * ak * ak + a * ak * ak + g * ak + e;
    }

    /// Real roots in ascending order (monic cubic, trigonometric/Cardano).
    std::vector<double> real_roots() const {
        const double a = -(alpha / beta), b = 2.0 * gamma3 / beta, c = 2.0 * e3 / beta;
        const double p = b - a * a / 3.0;
        const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
        const double shift = -a / 3.0;
        std::vector<double> roots;
        const double disc = -4.0 * p * p * p - 27.0 * q * q;
        if (disc > 0.0) {
            const double m = 2.0 * std::sqrt(-p / 3.0);
            const double theta = std::acos(std::clamp(3.0 * q / (p * m), -1.0, 1.0)) / 3.0;
            for (int k = 0; k < 3; ++k)
                roots.push_back(shift + m * std::cos(theta - 2.0 * M_PI * k / 3.0));
            std::sort(roots.begin(), roots.end());
        } else {
            const double u = std::cbrt(-q / 2.0 + std::sqrt(std::max(0.0, q * q / 4.0 + p * p * p / 27.0)));
            const double v = (u != 0.0) ? -p / (3.0 * u) : std::cbrt(-q);
            roots.push_back(shift + u + v);
        }
        return roots;
    }
};

struct K1Solution3d {
    double h = 0.0;
    double alpha = 0.0, beta = 0.0, gamma3 = 0.0, e3 = 0.0;
    std::vector<double> sigma, kappa1, kappa1_prime;
    std::vector<double> turning_sigmas;
    bool separatrix_detected = false;
    double period_ode = std::numeric_limits<double>::quiet_NaN();
    double period_quadrature = std::numeric_limits<double>::quiet_NaN();

    /// Curvature profile backed by the solution grid; derivatives of any
    /// order follow from the ODE Taylor recursion at the nearest node.
    CurvatureProfile profile(int dim = 3) const {
        auto sig = std::make_shared<std::vector<double>>(sigma);
        auto k = std::make_shared<std::vector<double>>(kappa1);
        auto kp = std::make_shared<std::vector<double>>(kappa1_prime);
        const double ab = alpha / beta, gb = gamma3 / beta;
        const double hh = h;
        CurvatureProfile p;
        p.dim = dim;
        p.sigma_max = sigma.back();
        p.kappa1 = ScalarProfile::callback(
            [sig, k, kp, ab, gb, hh](double s, int order) {
                const auto n = static_cast<std::ptrdiff_t>(std::llround(s / hh));
                const auto i = std::clamp<std::ptrdiff_t>(n, 0, static_cast<std::ptrdiff_t>(k->size()) - 1);
                const Jet c = detail::k1_3d_taylor((*k)[i], (*kp)[i], ab, gb, std::max(order + 4, 10));
                return detail::taylor_eval(c, s - (*sig)[i], order);
            },
            16);
        p.kappa2 = ScalarProfile::constant(0.0);
        return p;
    }
};

/// Integrate the 2+1 linear_k1 curvature equation in its quadrature form
/// kappa1' = sign * sqrt(R(kappa1)) with explicit turning-point handling:
/// near a simple root of R the exact local solution
/// kappa1 = k* + R'(k*)/4 (sigma-sigma*)^2 (+ quartic correction) carries the
/// state across and the sign branch flips. A double root is a separatrix:
/// it is reported and the evolution continues asymptotically. For bounded
/// wells the period is also computed independently by quadrature between the
/// turning points (theta substitution removing the endpoint singularity).
inline K1Solution3d solve_k1_3d(double alpha, double beta, double gamma3, double e3, double k1_0,
                                int sign0, double sigma_max, double h, double eps_turn = 1e-12) {
    if (beta == 0.0) throw InvalidValue("solve_k1_3d: beta must be nonzero");
    if (!(h > 0.0) || !(sigma_max > 0.0)) throw InvalidValue("solve_k1_3d: bad grid");
    if (sign0 != 1 && sign0 != -1) throw InvalidValue("solve_k1_3d: sign must be +-1");
    const RadicandK1 rad{alpha, beta, gamma3, e3};
    if (rad(k1_0) < -eps_turn * rad.scale(k1_0))
        throw InvalidValue("solve_k1_3d: initial kappa1 outside the classically allowed region");

    K1Solution3d sol;
    sol.h = h;
    sol.alpha = alpha;
    sol.beta = beta;
    sol.gamma3 = gamma3;
    sol.e3 = e3;

    const auto steps = static_cast<std::size_t>(std::llround(sigma_max / h));
    double k = k1_0;
    double sgn = sign0;

    // Local turning model bookkeeping: when active, (k_star, sigma_star).
    bool local = false;
    double k_star = 0.0, sigma_star = 0.0, rp_star = 0.0, rpp_star = 0.0;

    auto local_eval = [&](double s) {
        const double u = s - sigma_star;
        return k_star + 0.25 * rp_star * u * u + rp_star * rpp_star / 96.0 * u * u * u * u;
    };
    auto local_eval_prime = [&](double s) {
        const double u = s - sigma_star;
        return 0.5 * rp_star * u + rp_star * rpp_star / 24.0 * u * u * u;
    };

    auto record = [&](double s, double kk, double kkp) {
        sol.sigma.push_back(s);
        sol.kappa1.push_back(kk);
        sol.kappa1_prime.push_back(kkp);
    };

    record(0.0, k, sgn * std::sqrt(std::max(0.0, rad(k))));

    const double window = 3.0 * h;
    for (std::size_t i = 0; i < steps; ++i) {
        const double s_now = static_cast<double>(i) * h;
        const double s_next = static_cast<double>(i + 1) * h;

        if (local && s_next - sigma_star > window) {
            // leave the local model, resume direct integration
            k = local_eval(s_next);
            local = false;
            record(s_next, k, local_eval_prime(s_next));
            continue;
        }
        if (local) {
            k = local_eval(s_next);
            record(s_next, k, local_eval_prime(s_next));
            continue;
        }

        const double r = rad(k);
        const double rp = rad.deriv(k);
        const bool toward_root = sgn * rp < 0.0;
        const double u_rem = toward_root ? 2.0 * std::sqrt(std::max(r, 0.0)) / std::abs(rp)
                                         : std::numeric_limits<double>::infinity();
        const bool small_r = r < eps_turn * rad.scale(k);

        if ((toward_root && u_rem < window) || small_r) {
            // Find the root we are approaching.
            double ks = k;
            for (int it = 0; it < 60; ++it) {
                const double f = rad(ks), fp = rad.deriv(ks);
                if (std::abs(fp) < 1e-14 * rad.scale(ks)) break;
                const double step = f / fp;
                ks -= step;
                if (std::abs(step) < 1e-15 * (1.0 + std::abs(ks))) break;
            }
            if (std::abs(rad.deriv(ks)) < 1e-8 * rad.scale(ks)) {
                // double root: separatrix, no branch switch
                sol.separatrix_detected = true;
                rk4_step_scalar(k, h, [&](double kk) { return sgn * std::sqrt(std::max(0.0, rad(kk))); });
                record(s_next, k, sgn * std::sqrt(std::max(0.0, rad(k))));
                continue;
            }
            k_star = ks;
            rp_star = rad.deriv(ks);
            rpp_star = rad.deriv2(ks);
            // sigma of the turning point from the local model, approached
            // from below: k = k* + rp/4 u^2 (+ quartic), u < 0.
            double u = -2.0 * std::sqrt(std::max(0.0, (k - k_star) / rp_star));
            for (int it = 0; it < 8; ++it) {
                const double g = k_star + 0.25 * rp_star * u * u +
                                 rp_star * rpp_star / 96.0 * u * u * u * u - k;
                const double gp = 0.5 * rp_star * u + rp_star * rpp_star / 24.0 * u * u * u;
                if (std::abs(gp) < 1e-300) break;
                u -= g / gp;
            }
            if (u > 0.0) u = 0.0;
            sigma_star = s_now - u;
            sol.turning_sigmas.push_back(sigma_star);
            sgn = -sgn;
            local = true;
            k = local_eval(s_next);
            record(s_next, k, local_eval_prime(s_next));
            continue;
        }

        rk4_step_scalar(k, h, [&](double kk) { return sgn * std::sqrt(std::max(0.0, rad(kk))); });
        record(s_next, k, sgn * std::sqrt(std::max(0.0, rad(k))));
        if (!std::isfinite(k)) throw std::runtime_error("solve_k1_3d: state blow-up");
    }

    // Period from the ODE turning points.
    if (sol.turning_sigmas.size() >= 2) {
        const double span = sol.turning_sigmas.back() - sol.turning_sigmas.front();
        sol.period_ode = 2.0 * span / static_cast<double>(sol.turning_sigmas.size() - 1);
    }

    // Period by quadrature over the bounded well, when the orbit is bounded.
    const auto roots = rad.real_roots();
    if (roots.size() == 3 && k1_0 >= roots[0] - 1e-12 && k1_0 <= roots[1] + 1e-12 &&
        roots[2] > roots[1] + 1e-10) {
        const double m = 0.5 * (roots[0] + roots[1]);
        const double s = 0.5 * (roots[1] - roots[0]);
        auto f = [&](double th) { return 1.0 / std::sqrt(roots[2] - m - s * std::cos(th)); };
        sol.period_quadrature = 2.0 * boost::math::quadrature::gauss<double, 61>::integrate(f, 0.0, M_PI);
    }
    return sol;
}

// ---------------------------------------------------------------------------
// solve_k1_4d: two-dimensional fictitious particle
// ---------------------------------------------------------------------------

struct K1Solution4d {
    double h = 0.0;
    double alpha = 0.0, beta = 0.0, gamma4 = 0.0;
    double e4 = 0.0;  // measured at sigma = 0
    std::vector<double> sigma, kappa1, kappa1_prime, kappa2, kappa2_prime;
    double max_energy_drift = 0.0;
    bool blew_up = false;

    CurvatureProfile profile() const {
        auto sig = std::make_shared<std::vector<double>>(sigma);
        auto k1 = std::make_shared<std::vector<double>>(kappa1);
        auto k1p = std::make_shared<std::vector<double>>(kappa1_prime);
        auto k2 = std::make_shared<std::vector<double>>(kappa2);
        auto k2p = std::make_shared<std::vector<double>>(kappa2_prime);
        const double a = alpha, b = beta, g4 = gamma4, hh = h;
        auto node_of = [hh, sig](double s) {
            const auto n = static_cast<std::ptrdiff_t>(std::llround(s / hh));
            return std::clamp<std::ptrdiff_t>(n, 0, static_cast<std::ptrdiff_t>(sig->size()) - 1);
        };
        CurvatureProfile p;
        p.dim = 4;
        p.sigma_max = sigma.back();
        p.kappa1 = ScalarProfile::callback(
            [=](double s, int order) {
                const auto i = node_of(s);
                const auto jets = detail::k1_4d_taylor((*k1)[i], (*k1p)[i], (*k2)[i], (*k2p)[i], a,
                                                       b, g4, std::max(order + 4, 10));
                return detail::taylor_eval(jets.first, s - (*sig)[i], order);
            },
            16);
        p.kappa2 = ScalarProfile::callback(
            [=](double s, int order) {
                const auto i = node_of(s);
                const auto jets = detail::k1_4d_taylor((*k1)[i], (*k1p)[i], (*k2)[i], (*k2p)[i], a,
                                                       b, g4, std::max(order + 4, 10));
                return detail::taylor_eval(jets.second, s - (*sig)[i], order);
            },
            16);
        return p;
    }
};

/// Integrate the coupled second-order system of the 3+1 linear_k1 model:
///   k1'' = (gamma4 + (3b/2) k1^2 + b k2^2 - a k1)/b,
///   k2'' = (b k1 k2 - a k2)/(2b),
/// monitoring the conserved energy (max drift reported).
inline K1Solution4d solve_k1_4d(double alpha, double beta, double gamma4,
                                std::array<double, 4> init,  // k1, k1', k2, k2'
                                double sigma_max, double h) {
    if (beta == 0.0) throw InvalidValue("solve_k1_4d: beta must be nonzero");
    K1Solution4d sol;
    sol.h = h;
    sol.alpha = alpha;
    sol.beta = beta;
    sol.gamma4 = gamma4;

    auto rhs = [&](double, const std::vector<double>& y, std::vector<double>& dy) {
        dy.resize(4);
        dy[0] = y[1];
        dy[1] = (gamma4 + 1.5 * beta * y[0] * y[0] + beta * y[2] * y[2] - alpha * y[0]) / beta;
        dy[2] = y[3];
        dy[3] = (beta * y[0] * y[2] - alpha * y[2]) / (2.0 * beta);
    };
    auto energy = [&](const std::vector<double>& y) {
        return 0.5 * beta * y[1] * y[1] + 2.0 * beta * y[3] * y[3] +
               potential_k1_4d(y[0], y[2], alpha, beta, gamma4);
    };

    std::vector<double> y = {init[0], init[1], init[2], init[3]};
    sol.e4 = energy(y);
    const auto steps = static_cast<std::size_t>(std::llround(sigma_max / h));
    auto record = [&](double s) {
        sol.sigma.push_back(s);
        sol.kappa1.push_back(y[0]);
        sol.kappa1_prime.push_back(y[1]);
        sol.kappa2.push_back(y[2]);
        sol.kappa2_prime.push_back(y[3]);
        sol.max_energy_drift = std::max(sol.max_energy_drift, std::abs(energy(y) - sol.e4));
    };
    record(0.0);
    for (std::size_t i = 0; i < steps; ++i) {
        rk4_step(y, static_cast<double>(i) * h, h, rhs);
        for (double v : y)
            if (!std::isfinite(v)) {
                sol.blew_up = true;
                return sol;
            }
        record(static_cast<double>(i + 1) * h);
    }
    return sol;
}

// ---------------------------------------------------------------------------
// solve_k2: linear-in-kappa2 model (lambda2 cancels from the equations)
// ---------------------------------------------------------------------------

struct K2Solution {
    double h = 0.0;
    std::vector<double> sigma, kappa1, kappa1_prime, kappa2, kappa2_prime, kappa2_second;
    bool blew_up = false;
    /// Max residual of kappa1 = kappa2^2 (C - int k2'''/k2^3), the paper-form
    /// decoupling with its integration constant fixed from the initial data;
    /// NaN when kappa2(0) is too small to normalize. The homogeneous piece
    /// C kappa2^2 is part of the general solution of the underlying linear
    /// relation, so only this constant-fixed residual is asserted.
    double decoupling_residual = std::numeric_limits<double>::quiet_NaN();

    CurvatureProfile profile() const {
        auto sig = std::make_shared<std::vector<double>>(sigma);
        auto k1 = std::make_shared<std::vector<double>>(kappa1);
        auto k1p = std::make_shared<std::vector<double>>(kappa1_prime);
        auto k2 = std::make_shared<std::vector<double>>(kappa2);
        auto k2p = std::make_shared<std::vector<double>>(kappa2_prime);
        auto k2pp = std::make_shared<std::vector<double>>(kappa2_second);
        const double hh = h;
        auto node_of = [hh, sig](double s) {
            const auto n = static_cast<std::ptrdiff_t>(std::llround(s / hh));
            return std::clamp<std::ptrdiff_t>(n, 0, static_cast<std::ptrdiff_t>(sig->size()) - 1);
        };
        CurvatureProfile p;
        p.dim = 4;
        p.sigma_max = sigma.back();
        p.kappa1 = ScalarProfile::callback(
            [=](double s, int order) {
                const auto i = node_of(s);
                const auto jets = detail::k2_taylor((*k2)[i], (*k2p)[i], (*k2pp)[i], (*k1)[i],
                                                    (*k1p)[i], std::max(order + 4, 10));
                return detail::taylor_eval(jets.second, s - (*sig)[i], order);
            },
            16);
        p.kappa2 = ScalarProfile::callback(
            [=](double s, int order) {
                const auto i = node_of(s);
                const auto jets = detail::k2_taylor((*k2)[i], (*k2p)[i], (*k2pp)[i], (*k1)[i],
                                                    (*k1p)[i], std::max(order + 4, 10));
                return detail::taylor_eval(jets.first, s - (*sig)[i], order);
            },
            16);
        return p;
    }
};

/// Integrate the five-dimensional state (k2, k2', k2'', k1, k1') of the
/// linear_k2 model:
///   k2''' = 2 k1 k2' - k1' k2,   k1'' = -k2^2/2.
/// The overall coupling lambda2 cancels. The fifth-order scalar form is
/// avoided: it hides an arbitrary integration constant, while this state
/// formulation is initial-value complete.
inline K2Solution solve_k2(std::array<double, 5> init,  // k2, k2', k2'', k1, k1'
                           double sigma_max, double h) {
    K2Solution sol;
    sol.h = h;
    auto rhs = [](double, const std::vector<double>& y, std::vector<double>& dy) {
        dy.resize(5);
        dy[0] = y[1];
        dy[1] = y[2];
        dy[2] = 2.0 * y[3] * y[1] - y[4] * y[0];
        dy[3] = y[4];
        dy[4] = -0.5 * y[0] * y[0];
    };
    std::vector<double> y(init.begin(), init.end());
    const auto steps = static_cast<std::size_t>(std::llround(sigma_max / h));
    auto record = [&](double s) {
        sol.sigma.push_back(s);
        sol.kappa2.push_back(y[0]);
        sol.kappa2_prime.push_back(y[1]);
        sol.kappa2_second.push_back(y[2]);
        sol.kappa1.push_back(y[3]);
        sol.kappa1_prime.push_back(y[4]);
    };
    record(0.0);
    for (std::size_t i = 0; i < steps; ++i) {
        rk4_step(y, static_cast<double>(i) * h, h, rhs);
        for (double v : y)
            if (!std::isfinite(v)) {
                sol.blew_up = true;
                return sol;
            }
        record(static_cast<double>(i + 1) * h);
    }

    // Decoupling residual, where kappa2 stays resolvable.
    const double k2tol = 1e-6;
    if (std::abs(sol.kappa2.front()) > k2tol) {
        const double c0 = sol.kappa1.front() / (sol.kappa2.front() * sol.kappa2.front());
        double integral = 0.0;
        double max_res = 0.0;
        bool valid = true;
        for (std::size_t i = 0; i + 1 < sol.sigma.size(); ++i) {
            auto integrand = [&](std::size_t j) {
                const double k2v = sol.kappa2[j];
                const double k2ppp = 2.0 * sol.kappa1[j] * sol.kappa2_prime[j] -
                                     sol.kappa1_prime[j] * sol.kappa2[j];
                return k2ppp / (k2v * k2v * k2v);
            };
            if (std::abs(sol.kappa2[i + 1]) < k2tol) {
                valid = (i > 0);
                break;
            }
            integral += 0.5 * h * (integrand(i) + integrand(i + 1));
            const double k2v = sol.kappa2[i + 1];
            const double res = sol.kappa1[i + 1] - k2v * k2v * (c0 - integral);
            max_res = std::max(max_res, std::abs(res));
        }
        if (valid) sol.decoupling_residual = max_res;
    }
    return sol;
}

}  // namespace nullfrenet
