#pragma once

// Closed-form moment evolution when measurement outcomes are discarded:
// width growth with the cubic diffusion term, drift of the packet centre,
// and the analytic per-interval path length used by the dimension sweeps.

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qpath/constants.hpp"
#include "qpath/errors.hpp"
#include "qpath/gaussian_state.hpp"

namespace qpath {

// Continuous-limit measurement strength D = sigma * tau. Small D is strong
// measurement; D = infinity means "no measurement" and is represented
// explicitly so that the 1/D diffusion term vanishes exactly.
struct ContinuousLimit {
    double diffusion = 1.0;

    static ContinuousLimit infinite() {
        return ContinuousLimit{std::numeric_limits<double>::infinity()};
    }
    bool is_infinite() const { return std::isinf(diffusion); }
    // 1/D, exactly zero in the no-measurement variant.
    double inverse() const { return is_infinite() ? 0.0 : 1.0 / diffusion; }
};

inline void validate(const ContinuousLimit& d) {
    if (std::isnan(d.diffusion) || !(d.diffusion > 0.0))
        throw ConfigError("measurement strength D must be > 0 (or infinite)");
}

// Width parameter at time t:
//
//   Delta(t) = Delta0 + 2 hbar eps0 t / m
//            + hbar^2 (1 + eps0^2) t^2 / (m^2 Delta0)
//            + hbar^2 t^3 / (3 m^2 D)
//
// At D = infinity this coincides with the free-evolution width for all t.
inline double delta_of_t(const GaussianState& state0, double t, const ContinuousLimit& d,
                         const Constants& c) {
    if (!(t >= 0.0)) throw std::invalid_argument("delta_of_t: t must be >= 0");
    const double u = c.hbar * t / c.mass;
    const double one_eps2 = 1.0 + state0.eps * state0.eps;
    return state0.delta + 2.0 * state0.eps * u + one_eps2 * u * u / state0.delta +
           c.hbar * c.hbar * t * t * t / (3.0 * c.mass * c.mass) * d.inverse();
}

// Packet centre a(t) = a0 + b0 t / m; independent of D, and <p> is conserved.
inline double mean_position(const GaussianState& state0, double t, const Constants& c) {
    if (!(t >= 0.0)) throw std::invalid_argument("mean_position: t must be >= 0");
    return state0.a + state0.b_mom * t / c.mass;
}

// Closed-form second moments under the master equation.
inline double sigma_x2_of_t(const GaussianState& state0, double t, const ContinuousLimit& d,
                            const Constants& c) {
    return delta_of_t(state0, t, d, c) / 2.0;
}

inline double sigma_p2_of_t(const GaussianState& state0, double t, const ContinuousLimit& d,
                            const Constants& c) {
    if (!(t >= 0.0)) throw std::invalid_argument("sigma_p2_of_t: t must be >= 0");
    return momentum_variance(state0, c) + c.hbar * c.hbar * t / 2.0 * d.inverse();
}

inline double sigma_xp_of_t(const GaussianState& state0, double t, const ContinuousLimit& d,
                            const Constants& c) {
    if (!(t >= 0.0)) throw std::invalid_argument("sigma_xp_of_t: t must be >= 0");
    return position_momentum_covariance(state0, c) + momentum_variance(state0, c) * t / c.mass +
           c.hbar * c.hbar * t * t / (4.0 * c.mass) * d.inverse();
}

// <|x|>(t) for a packet initially centred at the origin with zero mean
// momentum and position uncertainty dx = sqrt(Delta0/2):
//
//   <|x|> = (dx/sqrt(pi)) [ 2 + 2 hbar eps0 t/(m dx^2)
//                             + hbar^2 (1+eps0^2) t^2/(2 m^2 dx^4)
//                             + hbar^2 t^3/(3 D m^2 dx^2) ]^{1/2}
inline double abs_x_of_t(double dx, double t, double eps0, const ContinuousLimit& d,
                         const Constants& c) {
    if (!(dx > 0.0)) throw std::invalid_argument("abs_x_of_t: dx must be > 0");
    if (!(t >= 0.0)) throw std::invalid_argument("abs_x_of_t: t must be >= 0");
    const double m = c.mass;
    const double h = c.hbar;
    const double dx2 = dx * dx;
    const double bracket = 2.0 + 2.0 * h * eps0 * t / (m * dx2) +
                           h * h * (1.0 + eps0 * eps0) * t * t / (2.0 * m * m * dx2 * dx2) +
                           h * h * t * t * t / (3.0 * m * m * dx2) * d.inverse();
    return dx / std::sqrt(M_PI) * std::sqrt(bracket);
}

// Mean per-interval displacement <|x(t)|> for a packet that starts centred
// at the origin with mean momentum p_av and width dx = sqrt(Delta0/2).
// Reduces exactly to abs_x_of_t when p_av = 0.
inline double analytic_segment_length(double dx, double t, double eps0, double p_av,
                                      const ContinuousLimit& d, const Constants& c) {
    GaussianState s0;
    s0.a = 0.0;
    s0.b_mom = p_av;
    s0.delta = 2.0 * dx * dx;
    s0.eps = eps0;
    return expectation_abs_x(mean_position(s0, t, c), delta_of_t(s0, t, d, c));
}

// Total averaged path length over duration T when positions are recorded at
// intervals t: (T/t) times the per-interval displacement.
inline double analytic_path_length(double dx, double t, double T, double eps0,
                                   const ContinuousLimit& d, const Constants& c,
                                   double p_av = 0.0) {
    if (!(t > 0.0)) throw std::invalid_argument("analytic_path_length: t must be > 0");
    if (t > T) throw std::invalid_argument("analytic_path_length: need t <= T");
    return (T / t) * analytic_segment_length(dx, t, eps0, p_av, d, c);
}

}  // namespace qpath
