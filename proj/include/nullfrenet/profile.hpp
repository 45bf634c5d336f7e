#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nullfrenet/jets.hpp"
#include "nullfrenet/spline.hpp"

namespace nullfrenet {

/// Scalar function of sigma with derivative access: f(sigma, order) returns
/// the order-th derivative. Concrete kinds: constant, polynomial, arbitrary
/// callback, or uniform samples (cubic interpolation, finite-difference
/// derivatives of stencil order 4, one-sided at the ends).
class ScalarProfile {
public:
    using Fn = std::function<double(double, int)>;

    ScalarProfile() : max_order_(1000) {
        fn_ = [](double, int) { return 0.0; };
    }

    static ScalarProfile constant(double v) {
        ScalarProfile p;
        p.fn_ = [v](double, int order) { return order == 0 ? v : 0.0; };
        return p;
    }

    /// Polynomial in sigma, coeffs[k] multiplies sigma^k.
    static ScalarProfile polynomial(std::vector<double> coeffs) {
        ScalarProfile p;
        p.fn_ = [c = std::move(coeffs)](double s, int order) {
            double r = 0.0;
            for (std::size_t k = c.size(); k-- > 0;) {
                if (static_cast<int>(k) < order) break;
                double term = c[k];
                for (int m = 0; m < order; ++m) term *= static_cast<double>(k - m);
                int pw = static_cast<int>(k) - order;
                for (int m = 0; m < pw; ++m) term *= s;
                r += term;
            }
            return r;
        };
        return p;
    }

    static ScalarProfile callback(Fn f, int max_order) {
        ScalarProfile p;
        p.fn_ = std::move(f);
        p.max_order_ = max_order;
        return p;
    }

    /// Uniform samples on s0 + k*ds. Value from a cubic spline; derivative
    /// grids built by repeated 4th-order finite differences, each spline
    /// interpolated. Orders above 3 are refused.
    static ScalarProfile sampled(double s0, double ds, const std::vector<double>& values) {
        if (values.size() < 5) throw std::invalid_argument("ScalarProfile::sampled: need >= 5 samples");
        auto splines = std::make_shared<std::vector<CubicSpline>>();
        std::vector<double> grid = values;
        splines->emplace_back(s0, ds, grid);
        for (int m = 1; m <= 3; ++m) {
            grid = fd_derivative(grid, ds);
            splines->emplace_back(s0, ds, grid);
        }
        ScalarProfile p;
        p.max_order_ = 3;
        p.fn_ = [splines](double s, int order) {
            if (order > 3) throw std::out_of_range("sampled profile: derivative order > 3 unavailable");
            return (*splines)[static_cast<std::size_t>(order)](s, 0);
        };
        return p;
    }

    double operator()(double s, int order = 0) const {
        if (order > max_order_)
            throw std::out_of_range("ScalarProfile: requested derivative order unavailable");
        return fn_(s, order);
    }

    /// Taylor jet of this function at s, truncated at `order`.
    Jet jet(double s, int order) const {
        std::vector<double> d(static_cast<std::size_t>(order) + 1);
        for (int k = 0; k <= order; ++k) d[static_cast<std::size_t>(k)] = (*this)(s, k);
        return Jet::from_derivatives(d);
    }

    int max_order() const { return max_order_; }

private:
    static std::vector<double> fd_derivative(const std::vector<double>& f, double h) {
        const std::size_t n = f.size();
        std::vector<double> d(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (i >= 2 && i + 2 < n) {
                d[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * h);
            } else if (i == 0) {
                d[i] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
            } else if (i == 1) {
                d[i] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h);
            } else if (i + 2 == n) {
                d[i] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) / (12.0 * h);
            } else {
                d[i] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) / (12.0 * h);
            }
        }
        return d;
    }

    Fn fn_;
    int max_order_ = 1000;
};

/// The two curvatures kappa1(sigma), kappa2(sigma) on [0, sigma_max].
/// kappa2 is identically zero in 2+1 mode.
struct CurvatureProfile {
    ScalarProfile kappa1;
    ScalarProfile kappa2;
    int dim = 4;
    double sigma_max = 1.0;

    static CurvatureProfile constants(int dim, double k1, double k2, double sigma_max) {
        if (dim == 3 && k2 != 0.0) throw InvalidValue("CurvatureProfile: kappa2 must vanish in 2+1 mode");
        CurvatureProfile p;
        p.kappa1 = ScalarProfile::constant(k1);
        p.kappa2 = ScalarProfile::constant(k2);
        p.dim = dim;
        p.sigma_max = sigma_max;
        return p;
    }
};

}  // namespace nullfrenet
