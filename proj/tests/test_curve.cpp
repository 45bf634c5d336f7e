#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "nullfrenet/curve.hpp"
#include "nullfrenet/jets.hpp"

using namespace nullfrenet;

namespace {

// Monotone reparametrization g(u) = l0 + span*(u + c*sin(w*u + phi))/norm as a
// jet; used to exercise reparametrization invariance.
struct Warp {
    double l0, span, c, w, phi, umax;

    double raw(double u, int order) const {
        if (order == 0) return u + c * std::sin(w * u + phi);
        double s;
        switch (order % 4) {
            case 1: s = std::cos(w * u + phi); break;
            case 2: s = -std::sin(w * u + phi); break;
            case 3: s = -std::cos(w * u + phi); break;
            default: s = std::sin(w * u + phi); break;
        }
        double r = c * s;
        for (int m = 0; m < order; ++m) r *= w;
        if (order == 1) r += 1.0;
        return r;
    }

    Jet jet(double u, int order) const {
        std::vector<double> d(static_cast<std::size_t>(order) + 1);
        for (int k = 0; k <= order; ++k) d[static_cast<std::size_t>(k)] = value_deriv(u, k);
        return Jet::from_derivatives(d);
    }

    double value_deriv(double u, int order) const {
        const double n0 = raw(0.0, 0), n1 = raw(umax, 0);
        const double scale = span / (n1 - n0);
        if (order == 0) return l0 + scale * (raw(u, 0) - n0);
        return scale * raw(u, order);
    }
};

CurveSource compose_source(const CurveSource& src, const Warp& g, double u0, double u1) {
    auto ev = [src, g](double u, int order) {
        const Jet gj = g.jet(u, order);
        const VecJet xj = src.jets(gj.value(), order);
        return compose(xj, gj);
    };
    return CurveSource(src.dim(), u0, u1, src.max_order(), false, SourceKind::analytic, std::move(ev));
}

// Finite-difference stencil oracle: weights for the m-th derivative from a
// symmetric (2r+1)-point stencil, solved from the Vandermonde moment system.
std::vector<double> fd_weights(int m, int r, double step) {
    const int n = 2 * r + 1;
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (int row = 0; row < n; ++row)
        for (int colv = 0; colv < n; ++colv) {
            const double x = (colv - r) * step;
            a(row, colv) = std::pow(x, row);
        }
    double fact = 1.0;
    for (int i = 2; i <= m; ++i) fact *= i;
    b(m) = fact;
    Eigen::VectorXd w = a.fullPivLu().solve(b);
    return {w.data(), w.data() + n};
}

double frame_distance(const NullFrame& a, const NullFrame& b) {
    double m = 0.0;
    const FourVector* va[4] = {&a.e_plus, &a.e1, &a.e_minus, &a.e2};
    const FourVector* vb[4] = {&b.e_plus, &b.e1, &b.e_minus, &b.e2};
    const int nv = (a.dim == 4) ? 4 : 3;
    for (int k = 0; k < nv; ++k)
        for (int i = 0; i < a.dim; ++i) m = std::max(m, std::abs((*va[k])[i] - (*vb[k])[i]));
    return m;
}

}  // namespace

TEST_CASE("jet arithmetic propagates derivatives") {
    // f(t) = (1.5 + t)^(1/4) / (1 + t^2) about t0 = 0.5, against Richardson FD.
    const Jet t = Jet::variable(0.5, 6);
    const Jet f = (t + 1.5).pow(0.25) * (Jet(1.0, 6) + t * t).reciprocal();
    auto fval = [](double x) { return std::pow(1.5 + x, 0.25) / (1.0 + x * x); };
    const double d = 1e-2;
    const double coarse = (fval(0.5 + d) - fval(0.5 - d)) / (2 * d);
    const double fine = (fval(0.5 + d / 2) - fval(0.5 - d / 2)) / d;
    REQUIRE(f.derivative_value(1) == Catch::Approx((4 * fine - coarse) / 3.0).epsilon(1e-8));

    // Composition: p(sin(u)) with p(x) = 1 + 2x - x^3.
    const double u0 = 0.3;
    const double x0 = std::sin(u0);
    const Jet g = Jet::from_derivatives({x0, std::cos(u0), -std::sin(u0), -std::cos(u0)});
    auto pval = [](double x) { return 1.0 + 2.0 * x - x * x * x; };
    const Jet pj = Jet::from_derivatives({pval(x0), 2.0 - 3.0 * x0 * x0, -6.0 * x0, -6.0});
    const Jet pg = Jet::compose(pj, g);
    const double dd = 1e-4;
    const double comp_fd = (pval(std::sin(u0 + dd)) - pval(std::sin(u0 - dd))) / (2 * dd);
    REQUIRE(pg.derivative_value(1) == Catch::Approx(comp_fd).epsilon(1e-6));
}

TEST_CASE("pseudo-arclength density: null cubic has density one") {
    for (int dim : {3, 4}) {
        const CurveSource cubic = make_null_cubic(dim, 5.0);
        for (double lam : {0.1, 1.0, 2.5, 4.9})
            REQUIRE(pseudo_arclength_density(cubic, lam) == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("pseudo-arclength density: degenerate on a straight null ray") {
    const NullFrame f = NullFrame::standard(4);
    auto ev = [f](double lam, int order) {
        VecJet x(4, order);
        for (int i = 0; i < 4; ++i) {
            x.comp[i][0] = lam * f.e_plus[i];
            if (order >= 1) x.comp[i][1] = f.e_plus[i];
        }
        return x;
    };
    const CurveSource ray(4, 0.0, 5.0, 8, false, SourceKind::analytic, ev);
    REQUIRE_THROWS_AS(pseudo_arclength_density(ray, 1.0), DegenerateCurve);
}

TEST_CASE("reparametrize: null cubic gives sigma(lambda) = lambda") {
    const CurveSource cubic = make_null_cubic(4, 5.0);
    const Reparametrization map = reparametrize(cubic, 64);
    for (double lam : {0.5, 1.7, 3.3, 5.0})
        REQUIRE(map.sigma_of(lam) == Catch::Approx(lam).margin(1e-11));
}

TEST_CASE("reparametrize: total sigma is invariant under traversal speed") {
    const CurveSource helix = make_helix(4, -0.5, 0.3, 4.0);
    const Reparametrization direct = reparametrize(helix, 64);

    Warp doubles{0.0, 4.0, 0.0, 1.0, 0.0, 2.0};  // g(u) = 2u on [0,2]
    const CurveSource fast = compose_source(helix, doubles, 0.0, 2.0);
    const Reparametrization mapped = reparametrize(fast, 64);
    REQUIRE(mapped.total_sigma() == Catch::Approx(direct.total_sigma()).margin(1e-10));

    Warp wiggle{0.0, 4.0, 0.35, 2.1, 0.4, 1.0};
    const CurveSource warped = compose_source(helix, wiggle, 0.0, 1.0);
    REQUIRE(reparametrize(warped, 64).total_sigma() ==
            Catch::Approx(direct.total_sigma()).margin(1e-10));
}

TEST_CASE("reparametrize: sigma strictly increasing, round trip tight") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> uk(-2.0, 2.0), uc(0.05, 0.3), uw(0.5, 2.5), uph(0.0, 6.0);
    for (int n = 0; n < 100; ++n) {
        const int dim = (n % 3 == 0) ? 3 : 4;
        const double k1 = uk(rng);
        const double k2 = (dim == 4) ? std::abs(uk(rng)) * 0.5 : 0.0;
        const CurveSource helix = make_helix(dim, k1, k2, 3.0);
        Warp warp{0.0, 3.0, uc(rng), uw(rng), uph(rng), 1.0};
        const CurveSource src = compose_source(helix, warp, 0.0, 1.0);
        const Reparametrization map = reparametrize(src, 48);

        double prev = -1.0;
        bool increasing = true;
        for (int i = 0; i <= 20; ++i) {
            const double s = map.sigma_of(i / 20.0);
            if (!(s > prev)) increasing = false;
            prev = s;
        }
        REQUIRE(increasing);

        std::uniform_real_distribution<double> ul(0.0, 1.0);
        const double lam = ul(rng);
        REQUIRE(std::abs(map.lambda_of(map.sigma_of(lam)) - lam) <= 1e-10);
    }
}

TEST_CASE("sigma_derivatives: sigma-parametrized curve reduces to plain derivatives") {
    const CurveSource cubic = make_null_cubic(4, 5.0);
    const double lam = 1.3;
    const auto d = sigma_derivatives(cubic, lam, 4);
    const VecJet x = cubic.jets(lam, 5);
    for (int k = 1; k <= 4; ++k) {
        const FourVector want = x.derivative_value(k);
        for (int i = 0; i < 4; ++i) REQUIRE(d[k - 1][i] == Catch::Approx(want[i]).margin(1e-12));
    }
    // X''' = e- exactly for the null cubic.
    const NullFrame f = NullFrame::standard(4);
    for (int i = 0; i < 4; ++i) REQUIRE(d[2][i] == Catch::Approx(f.e_minus[i]).margin(1e-13));
}

TEST_CASE("sigma_derivatives: chain rule matches finite differences of the reparametrized curve") {
    const CurveSource helix = make_helix(4, -0.8, 0.6, 6.0);
    Warp warp{0.0, 6.0, 0.2, 1.3, 0.7, 1.0};
    const CurveSource src = compose_source(helix, warp, 0.0, 1.0);
    const Reparametrization map = reparametrize(src, 128);

    const double u0 = 0.47;
    const double s0 = map.sigma_of(u0);
    const auto got = sigma_derivatives(src, u0, 4);

    // Oracle: sample X on an exact sigma grid through the map and apply
    // order-6 symmetric stencils.
    const double step = 0.05;
    const int r = 4;
    for (int m = 1; m <= 4; ++m) {
        const auto w = fd_weights(m, r, step);
        FourVector acc = FourVector::zero(4);
        for (int j = -r; j <= r; ++j) {
            const double lam = map.lambda_of(s0 + j * step);
            acc += w[static_cast<std::size_t>(j + r)] * src.jets(lam, 0).value();
        }
        double scale = 1.0;
        for (int i = 0; i < 4; ++i) scale = std::max(scale, std::abs(got[m - 1][i]));
        for (int i = 0; i < 4; ++i)
            REQUIRE(std::abs(acc[i] - got[m - 1][i]) <= 1e-6 * scale);
    }
}

TEST_CASE("frame_at: null cubic has vanishing curvatures and exact frame") {
    for (int dim : {3, 4}) {
        const CurveSource cubic = make_null_cubic(dim, 5.0);
        const auto r = frame_at(cubic, 2.0);
        REQUIRE(r.kappa.kappa1 == Catch::Approx(0.0).margin(1e-12));
        REQUIRE(r.kappa.kappa2 == Catch::Approx(0.0).margin(1e-12));
        REQUIRE(r.gram_residual < 1e-11);
    }
}

TEST_CASE("frame_at: extraction recovers helix curvatures") {
    // kappa2 != 0 switches on a hyperbolic mode, so the frame magnitude and
    // with it the roundoff floor grow along the curve; bound accordingly.
    for (double k1 : {-0.5, 1.2}) {
        for (double k2 : {0.0, 0.8, 2.0}) {
            const CurveSource helix = make_helix(4, k1, k2, 6.0);
            for (double s : {0.7, 3.1, 5.5}) {
                const auto d = sigma_derivatives(helix, s, 3);
                double m2 = 0.0;
                for (int i = 0; i < 4; ++i) m2 += d[2][i] * d[2][i];
                const double floor = std::max(1e-10, 100.0 * 1e-16 * m2);

                const auto r = frame_at(helix, s);
                REQUIRE(r.kappa.kappa1 == Catch::Approx(k1).margin(floor));
                REQUIRE(r.kappa.kappa2 == Catch::Approx(k2).margin(std::sqrt(std::max(m2, 1.0)) * 1e-11 + floor));
                REQUIRE(r.gram_residual < 1e-12);
                REQUIRE(r.density == Catch::Approx(1.0).margin(1e-10 * std::sqrt(std::max(1.0, m2))));
            }
        }
    }
    // Strict case at small sigma where the frame is O(1).
    const auto tight = frame_at(make_helix(4, -0.5, 0.8, 2.0), 1.0);
    REQUIRE(tight.kappa.kappa1 == Catch::Approx(-0.5).margin(1e-10));
    REQUIRE(tight.kappa.kappa2 == Catch::Approx(0.8).margin(1e-10));
}

TEST_CASE("frame_at: 2+1 mode forces kappa2 = 0 and carries no e2") {
    const CurveSource helix = make_helix(3, -1.1, 0.0, 5.0);
    const auto r = frame_at(helix, 2.2);
    REQUIRE(r.kappa.kappa2 == 0.0);
    REQUIRE(r.frame.dim == 3);
    REQUIRE(r.kappa.kappa1 == Catch::Approx(-1.1).margin(1e-9));
}

TEST_CASE("frame_at: reparametrization invariance") {
    const CurveSource helix = make_helix(4, -0.7, 0.9, 5.0);
    Warp warp{0.0, 5.0, 0.25, 1.7, 0.2, 1.0};
    const CurveSource src = compose_source(helix, warp, 0.0, 1.0);
    const Reparametrization map = reparametrize(src, 128);

    for (double s : {1.0, 2.5, 4.0}) {
        const auto direct = frame_at(helix, s);
        const auto warped = frame_at(src, s, {}, &map);
        REQUIRE(std::abs(direct.kappa.kappa1 - warped.kappa.kappa1) < 1e-8);
        REQUIRE(std::abs(direct.kappa.kappa2 - warped.kappa.kappa2) < 1e-8);
        REQUIRE(frame_distance(direct.frame, warped.frame) < 1e-8);
    }
}

TEST_CASE("frame_at: kappa1 equals half the third-derivative norm by construction") {
    const CurveSource helix = make_helix(4, 1.4, 0.5, 5.0);
    const double s = 2.0;
    const auto r = frame_at(helix, s);
    const auto d = sigma_derivatives(helix, s, 3);
    REQUIRE(r.kappa.kappa1 == 0.5 * dot(d[2], d[2]));
}

TEST_CASE("sampled curve: quintic spline extraction within loosened tolerance") {
    const CurveSource helix = make_helix(4, -0.6, 0.5, 5.0);
    std::vector<double> lambdas;
    std::vector<FourVector> pts;
    const int n = 501;
    for (int i = 0; i < n; ++i) {
        const double lam = 5.0 * i / (n - 1);
        lambdas.push_back(lam);
        pts.push_back(helix.jets(lam, 0).value());
    }
    const CurveSource sampled = make_sampled_curve(4, lambdas, pts);
    const auto tol = ExtractionTolerances::for_kind(SourceKind::sampled);
    const auto r = extract_at_lambda(sampled, 2.5, tol);
    REQUIRE(r.kappa.kappa1 == Catch::Approx(-0.6).margin(1e-3));
    REQUIRE(r.kappa.kappa2 == Catch::Approx(0.5).margin(1e-3));
}

TEST_CASE("extraction errors: non-null tangent rejected") {
    auto ev = [](double lam, int order) {
        VecJet x(4, order);
        // timelike straight line
        x.comp[0] = Jet::variable(lam, order);
        return x;
    };
    const CurveSource timelike(4, 0.0, 5.0, 8, false, SourceKind::analytic, ev);
    REQUIRE_THROWS_AS(sigma_derivatives(timelike, 1.0, 3), ExtractionFailure);
}
