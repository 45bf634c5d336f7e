#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace nullfrenet {

/// Natural cubic spline on a uniform grid.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(double x0, double dx, std::vector<double> y) : x0_(x0), dx_(dx), y_(std::move(y)) {
        const std::size_t n = y_.size();
        if (n < 3) throw std::invalid_argument("CubicSpline: need at least 3 samples");
        // Solve for second derivatives m_i, natural ends (m_0 = m_{n-1} = 0).
        m_.assign(n, 0.0);
        std::vector<double> diag(n, 2.0), rhs(n, 0.0), off(n, 0.5);
        for (std::size_t i = 1; i + 1 < n; ++i)
            rhs[i] = 3.0 * (y_[i + 1] - 2.0 * y_[i] + y_[i - 1]) / (dx_ * dx_);
        // Thomas algorithm on the interior block.
        for (std::size_t i = 2; i + 1 < n; ++i) {
            const double w = off[i] / diag[i - 1];
            diag[i] -= w * off[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            const double upper = (i + 2 < n) ? off[i] * m_[i + 1] : 0.0;
            m_[i] = (rhs[i] - upper) / diag[i];
            if (i == 1) break;
        }
    }

    double operator()(double x, int order = 0) const {
        const std::size_t n = y_.size();
        double u = (x - x0_) / dx_;
        auto i = static_cast<std::ptrdiff_t>(std::floor(u));
        if (i < 0) i = 0;
        if (i > static_cast<std::ptrdiff_t>(n) - 2) i = static_cast<std::ptrdiff_t>(n) - 2;
        const double t = u - static_cast<double>(i);
        const double a = y_[i], b = y_[i + 1];
        const double ma = m_[i], mb = m_[i + 1];
        const double h2 = dx_ * dx_;
        // Hermite-free cubic form: S = a(1-t) + b t + h^2/6 [((1-t)^3-(1-t)) ma + (t^3-t) mb]
        switch (order) {
            case 0:
                return a * (1 - t) + b * t +
                       h2 / 6.0 * (((1 - t) * (1 - t) * (1 - t) - (1 - t)) * ma + (t * t * t - t) * mb);
            case 1:
                return (b - a) / dx_ +
                       dx_ / 6.0 * ((-3.0 * (1 - t) * (1 - t) + 1.0) * ma + (3.0 * t * t - 1.0) * mb);
            case 2:
                return (1 - t) * ma + t * mb;
            case 3:
                return (mb - ma) / dx_;
            default:
                return 0.0;
        }
    }

private:
    double x0_ = 0.0, dx_ = 1.0;
    std::vector<double> y_, m_;
};

namespace detail {

/// Uniform quintic cardinal B-spline b5 on support (0,6], derivative `m` <= 5.
/// Discontinuous derivative orders take their left-limit value at knots.
inline double quintic_basis(double t, int m) {
    if (t <= 0.0 || t > 6.0) return 0.0;
    static constexpr double binom[7] = {1, 6, 15, 20, 15, 6, 1};
    double fact = 1.0;  // 5! / (5-m)!
    for (int i = 0; i < m; ++i) fact *= static_cast<double>(5 - i);
    const int p = 5 - m;
    double s = 0.0;
    double sign = 1.0;
    for (int k = 0; k <= 6; ++k, sign = -sign) {
        const double u = t - static_cast<double>(k);
        if (u <= 0.0) break;
        double up = 1.0;
        for (int q = 0; q < p; ++q) up *= u;
        s += sign * binom[k] * up;
    }
    return fact * s / 120.0;
}

}  // namespace detail

/// Interpolating quintic B-spline on a uniform grid with natural end
/// conditions (third and fourth derivatives vanish at both ends). Provides
/// derivatives through order 5; orders 4 and 5 of interpolated data amplify
/// sample noise, so downstream tolerances are loosened in sampled mode.
class QuinticSpline {
public:
    QuinticSpline() = default;
    QuinticSpline(double x0, double dx, const std::vector<double>& y) : x0_(x0), dx_(dx) {
        const auto n = static_cast<std::ptrdiff_t>(y.size());
        if (n < 6) throw std::invalid_argument("QuinticSpline: need at least 6 samples");
        const std::ptrdiff_t nc = n + 4;  // coefficients c_{-2} .. c_{n+1}
        Eigen::SparseMatrix<double> A(nc, nc);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nc);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(5 * nc));
        auto col = [](std::ptrdiff_t j) { return j + 2; };  // c_j -> column index

        // Row 0: S'''(x_0) = 0, row 1: S''''(x_0) = 0.
        const double d3[5] = {-0.5, 1.0, 0.0, -1.0, 0.5};
        const double d4[5] = {1.0, -4.0, 6.0, -4.0, 1.0};
        for (int k = 0; k < 5; ++k) {
            trip.emplace_back(0, col(-2 + k), d3[k]);
            trip.emplace_back(1, col(-2 + k), d4[k]);
        }
        // Interpolation rows.
        const double w[5] = {1.0, 26.0, 66.0, 26.0, 1.0};
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            for (int k = 0; k < 5; ++k) trip.emplace_back(2 + i, col(i - 2 + k), w[k]);
            rhs[2 + i] = 120.0 * y[static_cast<std::size_t>(i)];
        }
        // Last two rows: end conditions at x_{n-1}.
        for (int k = 0; k < 5; ++k) {
            trip.emplace_back(n + 2, col(n - 3 + k), d4[k]);
            trip.emplace_back(n + 3, col(n - 3 + k), d3[k]);
        }
        A.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(A);
        if (lu.info() != Eigen::Success) throw std::runtime_error("QuinticSpline: singular system");
        Eigen::VectorXd c = lu.solve(rhs);
        c_.assign(c.data(), c.data() + nc);
        n_ = n;
    }

    double operator()(double x, int order = 0) const {
        if (order < 0 || order > 5) throw std::out_of_range("QuinticSpline: derivative order must be 0..5");
        const double u = (x - x0_) / dx_;
        double s = 0.0;
        const auto jlo = static_cast<std::ptrdiff_t>(std::ceil(u - 3.0));
        for (std::ptrdiff_t j = jlo; j < jlo + 6; ++j) {
            if (j < -2 || j > n_ + 1) continue;
            s += c_[static_cast<std::size_t>(j + 2)] * detail::quintic_basis(u - static_cast<double>(j) + 3.0, order);
        }
        double scale = 1.0;
        for (int m = 0; m < order; ++m) scale /= dx_;
        return s * scale;
    }

private:
    double x0_ = 0.0, dx_ = 1.0;
    std::ptrdiff_t n_ = 0;
    std::vector<double> c_;
};

}  // namespace nullfrenet
