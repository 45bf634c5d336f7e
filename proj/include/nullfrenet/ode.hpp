#pragma once

#include <cstddef>
#include <vector>

namespace nullfrenet {

/// Classical fixed-step 4th-order Runge-Kutta step. `rhs(t, y, dy)` fills dy.
/// Shared by the frame transport and every curvature-ODE solver so that
/// convergence measurements are uniform across modules.
template <class Rhs>
void rk4_step(std::vector<double>& y, double t, double h, Rhs&& rhs) {
    const std::size_t n = y.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    rhs(t, y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    rhs(t + 0.5 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    rhs(t + 0.5 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    rhs(t + h, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace nullfrenet
