#pragma once

// Closed-form dynamics of a pure Gaussian wave packet under free evolution
// and impulsive Gaussian position measurements. All operations are pure
// functions of value types.

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "qpath/constants.hpp"
#include "qpath/errors.hpp"

namespace qpath {

// Pure Gaussian wave packet
//
//   psi(x) ~ exp( -(1 - i*eps) / (2*delta) * (x - a)^2 + i * b_mom * x / hbar )
//
// a      mean position
// b_mom  mean momentum
// delta  squared-width parameter (position variance is delta/2)
// eps    chirp parameter (position-momentum covariance is hbar*eps/2)
//
// The global phase is not tracked; every observable computed here is
// phase-independent.
struct GaussianState {
    double a = 0.0;
    double b_mom = 0.0;
    double delta = 1.0;
    double eps = 0.0;
};

// Gaussian meter: variance parameter sigma of the pointer state, and the
// interval tau between consecutive measurements.
struct MeterConfig {
    double sigma = 1.0;
    double tau = 0.1;
};

inline void validate(const GaussianState& s) {
    if (!std::isfinite(s.a) || !std::isfinite(s.b_mom) || !std::isfinite(s.delta) ||
        !std::isfinite(s.eps))
        throw NumericRangeError("Gaussian state has non-finite parameters");
    if (!(s.delta > 0.0)) throw NumericRangeError("Gaussian state requires delta > 0");
}

inline void validate(const MeterConfig& m) {
    if (!(m.sigma > 0.0) || !std::isfinite(m.sigma))
        throw ConfigError("meter sigma must be finite and > 0");
    if (!(m.tau > 0.0) || !std::isfinite(m.tau))
        throw ConfigError("meter tau must be finite and > 0");
}

// Second moments of the packet.
inline double position_variance(const GaussianState& s) { return s.delta / 2.0; }

inline double momentum_variance(const GaussianState& s, const Constants& c) {
    return c.hbar * c.hbar * (1.0 + s.eps * s.eps) / (2.0 * s.delta);
}

inline double position_momentum_covariance(const GaussianState& s, const Constants& c) {
    return c.hbar * s.eps / 2.0;
}

// sx^2 * sp^2 - sxp^2; equals hbar^2/4 for any pure Gaussian.
inline double uncertainty_product(const GaussianState& s, const Constants& c) {
    const double sxp = position_momentum_covariance(s, c);
    return position_variance(s) * momentum_variance(s, c) - sxp * sxp;
}

// Free evolution for time tau. The packet centre drifts with b_mom/m while
// delta and eps follow the exact spreading maps; the generalized uncertainty
// saturation is preserved.
inline GaussianState free_evolve(const GaussianState& s, double tau, const Constants& c) {
    if (!(tau >= 0.0)) throw std::invalid_argument("free_evolve: tau must be >= 0");
    const double u = c.hbar * tau / c.mass;
    const double one_eps2 = 1.0 + s.eps * s.eps;
    GaussianState out;
    out.a = s.a + s.b_mom * tau / c.mass;
    out.b_mom = s.b_mom;
    out.delta = s.delta + one_eps2 * u * u / s.delta + 2.0 * s.eps * u;
    out.eps = s.eps + one_eps2 * u / s.delta;
    validate(out);
    return out;
}

// Parameters of the exact Gaussian density of measurement outcomes for a
// packet in state `pre` (already evolved to the measurement time).
struct OutcomePdf {
    double mean = 0.0;
    double variance = 1.0;

    double density(double x) const {
        const double z = x - mean;
        return std::exp(-z * z / (2.0 * variance)) / std::sqrt(2.0 * M_PI * variance);
    }
};

// Outcome density: the convolution of the packet position density
// (variance delta/2) with the meter pointer density (variance sigma/2).
inline OutcomePdf outcome_pdf(const GaussianState& pre, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("outcome_pdf: sigma must be > 0");
    return OutcomePdf{pre.a, (pre.delta + sigma) / 2.0};
}

// Draw one outcome from the outcome density using a caller-supplied stream.
template <class URBG>
double sample_outcome(const GaussianState& pre, double sigma, URBG& stream) {
    const OutcomePdf pdf = outcome_pdf(pre, sigma);
    std::normal_distribution<double> draw(pdf.mean, std::sqrt(pdf.variance));
    return draw(stream);
}

// Contraction factor of a measurement on a packet of width parameter delta.
inline double contraction_factor(double delta, double sigma) {
    return 1.0 + delta / sigma;
}

// Conditional state after recording outcome `xbar`. The packet centre moves
// a fraction (C-1)/C towards the outcome, the momentum takes a chirp-
// proportional kick, and both width parameters contract by C = 1 + delta/sigma.
inline GaussianState collapse_update(const GaussianState& pre, double xbar, double sigma,
                                     const Constants& c) {
    if (!(sigma > 0.0)) throw std::invalid_argument("collapse_update: sigma must be > 0");
    if (!std::isfinite(xbar)) throw NumericRangeError("collapse_update: non-finite outcome");
    const double C = contraction_factor(pre.delta, sigma);
    const double pull = (C - 1.0) / C * (xbar - pre.a);
    GaussianState out;
    out.a = pre.a + pull;
    out.b_mom = pre.b_mom + c.hbar * (pre.eps / pre.delta) * pull;
    out.delta = pre.delta / C;
    out.eps = pre.eps / C;
    validate(out);
    return out;
}

// <|x|> of a Gaussian position density with mean a and width parameter delta
// (density (pi*delta)^{-1/2} exp(-(x-a)^2/delta)):
//
//   <|x|> = |a| erf(|a|/sqrt(delta)) + sqrt(delta/pi) exp(-a^2/delta)
inline double expectation_abs_x(double a, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("expectation_abs_x: delta must be > 0");
    const double z = std::abs(a) / std::sqrt(delta);
    return std::abs(a) * std::erf(z) + std::sqrt(delta / M_PI) * std::exp(-z * z);
}

}  // namespace qpath
