#pragma once

// Test-only reference computations. Everything here is independent of the
// closed forms it is used to check: brute-force quadrature, RK4 integration
// of the moment and oscillator ODEs, and the discrete ensemble-averaged
// measurement recursion.

#include <array>
#include <cmath>
#include <cstddef>

#include "qpath/constants.hpp"
#include "qpath/gaussian_state.hpp"

namespace oracles {

// Second moments (sx2, sp2, sxp) under the continuous measurement master
// equation, integrated by RK4:
//   d sx2/dt = 2 sxp / m,  d sp2/dt = hbar^2 / (2 D),  d sxp/dt = sp2 / m.
inline std::array<double, 3> integrate_moments(double sx2_0, double sp2_0, double sxp_0,
                                               double diffusion, double t,
                                               const qpath::Constants& c,
                                               std::size_t steps = 20000) {
    std::array<double, 3> y{sx2_0, sp2_0, sxp_0};
    const double h = t / double(steps);
    const double kick = c.hbar * c.hbar / (2.0 * diffusion);
    auto deriv = [&](const std::array<double, 3>& v) {
        return std::array<double, 3>{2.0 * v[2] / c.mass, kick, v[1] / c.mass};
    };
    for (std::size_t i = 0; i < steps; ++i) {
        const auto k1 = deriv(y);
        std::array<double, 3> y2;
        for (int j = 0; j < 3; ++j) y2[j] = y[j] + 0.5 * h * k1[j];
        const auto k2 = deriv(y2);
        for (int j = 0; j < 3; ++j) y2[j] = y[j] + 0.5 * h * k2[j];
        const auto k3 = deriv(y2);
        for (int j = 0; j < 3; ++j) y2[j] = y[j] + h * k3[j];
        const auto k4 = deriv(y2);
        for (int j = 0; j < 3; ++j)
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    return y;
}

inline std::array<double, 3> integrate_moments(const qpath::GaussianState& s0, double diffusion,
                                               double t, const qpath::Constants& c,
                                               std::size_t steps = 20000) {
    return integrate_moments(qpath::position_variance(s0), qpath::momentum_variance(s0, c),
                             qpath::position_momentum_covariance(s0, c), diffusion, t, c, steps);
}

// <|x|> of the density (pi delta)^{-1/2} exp(-(x-a)^2/delta) by composite
// Simpson, split at the kink of |x| so each piece is smooth.
inline double quad_abs_x(double a, double delta, std::size_t panels = 4000) {
    auto f = [&](double x) {
        return std::abs(x) / std::sqrt(M_PI * delta) * std::exp(-(x - a) * (x - a) / delta);
    };
    auto simpson = [&](double lo, double hi) {
        const double h = (hi - lo) / double(2 * panels);
        double sum = f(lo) + f(hi);
        for (std::size_t i = 1; i < 2 * panels; ++i)
            sum += f(lo + double(i) * h) * (i % 2 ? 4.0 : 2.0);
        return sum * h / 3.0;
    };
    const double s = std::sqrt(delta / 2.0);
    const double reach = 12.0 * s + 2.0 * std::abs(a);
    return simpson(-reach, 0.0) + simpson(0.0, reach);
}

// y'' + y'/t_c + y/(2 t_c^2) = 0 by RK4 on (y, y').
inline double oscillator_rk4(double y0, double ydot0, double t_c, double t,
                             std::size_t steps = 100000) {
    double y = y0, v = ydot0;
    const double h = t / double(steps);
    auto acc = [&](double yy, double vv) { return -vv / t_c - yy / (2.0 * t_c * t_c); };
    for (std::size_t i = 0; i < steps; ++i) {
        const double k1y = v, k1v = acc(y, v);
        const double k2y = v + 0.5 * h * k1v, k2v = acc(y + 0.5 * h * k1y, v + 0.5 * h * k1v);
        const double k3y = v + 0.5 * h * k2v, k3v = acc(y + 0.5 * h * k2y, v + 0.5 * h * k2v);
        const double k4y = v + h * k3v, k4v = acc(y + h * k3y, v + h * k3v);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    return y;
}

// Exact ensemble-averaged second moments of the discrete chain: free
// evolution over tau followed by a measurement that adds hbar^2/(2 sigma)
// to the momentum variance and leaves the other moments unchanged.
inline std::array<double, 3> discrete_moment_recursion(double sx2, double sp2, double sxp,
                                                       double tau, double sigma,
                                                       std::size_t n_steps,
                                                       const qpath::Constants& c) {
    const double m = c.mass;
    for (std::size_t r = 0; r < n_steps; ++r) {
        sx2 += 2.0 * sxp * tau / m + sp2 * tau * tau / (m * m);
        sxp += sp2 * tau / m;
        sp2 += c.hbar * c.hbar / (2.0 * sigma);
    }
    return {sx2, sp2, sxp};
}

}  // namespace oracles
