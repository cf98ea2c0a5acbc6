#pragma once

// Brute-force position-grid wavefunction engine: exact free propagation in
// momentum space, Gaussian meter application, phase-space displacement, and
// quadrature moments. Serves as the independent oracle for the closed-form
// Gaussian maps; runs at test scale only.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qpath/constants.hpp"
#include "qpath/errors.hpp"
#include "qpath/gaussian_state.hpp"

namespace qpath {

namespace detail {

// Iterative radix-2 FFT, in place; size must be a power of two. Forward
// convention X_k = sum_n x_n exp(-2 pi i k n / N); inverse divides by N.
// Twiddles come from one std::polar table so moduli stay at 1 and the
// round trip preserves norm to near machine precision.
inline void fft_radix2(std::vector<std::complex<double>>& x, bool inverse) {
    const std::size_t n = x.size();
    if (n < 2 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    std::vector<std::complex<double>> twiddle(n / 2);
    for (std::size_t j = 0; j < n / 2; ++j)
        twiddle[j] = std::polar(1.0, sign * 2.0 * M_PI * double(j) / double(n));
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = x[i + k];
                const auto v = x[i + k + len / 2] * twiddle[k * stride];
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
            }
        }
    }
    if (inverse)
        for (auto& v : x) v /= double(n);
}

// Signed FFT index: j for j < N/2, j - N otherwise.
inline double fft_index(std::size_t j, std::size_t n) {
    return j < n / 2 ? double(j) : double(j) - double(n);
}

}  // namespace detail

// Uniform grid specification. Nodes are integer multiples of the spacing so
// that x = 0 falls exactly on a node whenever it lies inside the grid (the
// |x| quadrature relies on this).
struct GridSpec {
    double center = 0.0;
    double half_width = 24.0;
    std::size_t n_points = 4096;

    double spacing() const { return 2.0 * half_width / double(n_points); }
    double origin() const {
        const double h = spacing();
        return (std::round(center / h) - double(n_points) / 2.0) * h;
    }
};

// Builds a grid that resolves momenta up to p_max and holds tails out to
// n_sigmas position deviations around the centre.
inline GridSpec make_grid_spec(double center, double sigma_x_max, double p_max,
                               const Constants& c, double n_sigmas = 12.0,
                               std::size_t max_points = std::size_t(1) << 17) {
    GridSpec spec;
    spec.center = center;
    spec.half_width = n_sigmas * sigma_x_max + std::abs(center) * 0.05 + 1.0;
    const double h_max = M_PI * c.hbar / (2.0 * p_max);  // half the Nyquist spacing
    std::size_t n = 256;
    while (n < max_points && 2.0 * spec.half_width / double(n) > h_max) n <<= 1;
    spec.n_points = n;
    return spec;
}

struct GridWavefunction {
    double x0 = 0.0;       // position of node 0
    double dx_grid = 1.0;  // spacing
    std::vector<std::complex<double>> amplitudes;

    std::size_t size() const { return amplitudes.size(); }
    double x_at(std::size_t n) const { return x0 + double(n) * dx_grid; }
    double x_end() const { return x_at(size() - 1); }

    double norm_squared() const {
        double s = 0.0;
        for (const auto& v : amplitudes) s += std::norm(v);
        return s * dx_grid;
    }
};

struct Observables {
    double mean_x = 0.0;
    double mean_p = 0.0;
    double var_x = 0.0;
    double var_p = 0.0;
    double cov_xp = 0.0;
    double abs_x = 0.0;
};

// Gaussian parameters read off grid moments.
inline GaussianState to_gaussian_state(const Observables& o, const Constants& c) {
    GaussianState s;
    s.a = o.mean_x;
    s.b_mom = o.mean_p;
    s.delta = 2.0 * o.var_x;
    s.eps = 2.0 * o.cov_xp / c.hbar;
    return s;
}

// Asserts the support fits the grid: edge amplitudes below 1e-8 of the peak.
inline void check_boundary(const GridWavefunction& psi) {
    double peak = 0.0;
    for (const auto& v : psi.amplitudes) peak = std::max(peak, std::abs(v));
    const double edge = std::max(std::abs(psi.amplitudes.front()), std::abs(psi.amplitudes.back()));
    if (!(edge < 1e-8 * peak))
        throw NumericRangeError("grid too narrow: boundary amplitude above 1e-8 of peak");
}

inline void check_normalized(const GridWavefunction& psi, double tol = 1e-10) {
    if (std::abs(psi.norm_squared() - 1.0) > tol)
        throw NumericRangeError("grid wavefunction is not normalized");
}

// Discretizes a Gaussian packet. The grid must cover at least +-8 sqrt(delta/2)
// around the centre; default specs use 12 deviations.
inline GridWavefunction init_gaussian(const GaussianState& s, const GridSpec& spec,
                                      const Constants& c) {
    validate(s);
    GridWavefunction psi;
    psi.dx_grid = spec.spacing();
    psi.x0 = spec.origin();
    psi.amplitudes.resize(spec.n_points);
    const double reach = 8.0 * std::sqrt(s.delta / 2.0);
    if (psi.x0 > s.a - reach || psi.x_end() < s.a + reach)
        throw std::invalid_argument("init_gaussian: grid does not cover 8 deviations");
    const std::complex<double> width_term(1.0, -s.eps);
    for (std::size_t n = 0; n < psi.size(); ++n) {
        const double x = psi.x_at(n);
        const double dxa = x - s.a;
        const std::complex<double> expo =
            -width_term * (dxa * dxa) / (2.0 * s.delta) +
            std::complex<double>(0.0, s.b_mom * x / c.hbar);
        psi.amplitudes[n] = std::exp(expo);
    }
    const double norm = std::sqrt(psi.norm_squared());
    for (auto& v : psi.amplitudes) v /= norm;
    check_boundary(psi);
    return psi;
}

// Exact free propagation via the momentum-space phase exp(-i p^2 t / (2 m hbar)).
inline GridWavefunction propagate_free(const GridWavefunction& psi, double t,
                                       const Constants& c) {
    if (!(t >= 0.0)) throw std::invalid_argument("propagate_free: t must be >= 0");
    GridWavefunction out = psi;
    auto& amp = out.amplitudes;
    detail::fft_radix2(amp, false);
    const std::size_t n = amp.size();
    const double dk = 2.0 * M_PI / (double(n) * out.dx_grid);
    for (std::size_t j = 0; j < n; ++j) {
        const double p = c.hbar * dk * detail::fft_index(j, n);
        amp[j] *= std::polar(1.0, -p * p * t / (2.0 * c.mass * c.hbar));
    }
    detail::fft_radix2(amp, true);
    if (std::abs(out.norm_squared() - 1.0) > 1e-12)
        throw NumericRangeError("propagate_free: norm drifted beyond 1e-12");
    check_boundary(out);
    return out;
}

struct MeterApplication {
    GridWavefunction psi;
    double likelihood = 0.0;  // outcome density at xbar
};

// Applies the meter operator (pi sigma)^{-1/4} exp(-(xbar - x)^2 / (2 sigma))
// and renormalizes; the discarded norm is the outcome likelihood.
inline MeterApplication apply_meter(const GridWavefunction& psi, double outcome, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("apply_meter: sigma must be > 0");
    MeterApplication result;
    result.psi = psi;
    const double prefactor = std::pow(M_PI * sigma, -0.25);
    for (std::size_t n = 0; n < result.psi.size(); ++n) {
        const double d = outcome - result.psi.x_at(n);
        result.psi.amplitudes[n] *= prefactor * std::exp(-d * d / (2.0 * sigma));
    }
    result.likelihood = result.psi.norm_squared();
    if (!(result.likelihood > 1e-280))
        throw NumericRangeError("apply_meter: outcome far outside packet support");
    const double norm = std::sqrt(result.likelihood);
    for (auto& v : result.psi.amplitudes) v /= norm;
    return result;
}

// Phase-space displacement: shifts the packet by `shift` in position and
// kicks it by `kick` in momentum (widths unchanged, global phase dropped).
inline GridWavefunction displace(const GridWavefunction& psi, double shift, double kick,
                                 const Constants& c) {
    GridWavefunction out = psi;
    auto& amp = out.amplitudes;
    detail::fft_radix2(amp, false);
    const std::size_t n = amp.size();
    const double dk = 2.0 * M_PI / (double(n) * out.dx_grid);
    for (std::size_t j = 0; j < n; ++j) {
        const double p = c.hbar * dk * detail::fft_index(j, n);
        amp[j] *= std::polar(1.0, -p * shift / c.hbar);
    }
    detail::fft_radix2(amp, true);
    for (std::size_t m = 0; m < out.size(); ++m)
        out.amplitudes[m] *= std::polar(1.0, kick * out.x_at(m) / c.hbar);
    check_boundary(out);
    return out;
}

// Moments by quadrature. Position moments use the trapezoid rule (the
// integrands vanish at the boundary); <|x|> carries the Euler-Maclaurin
// correction h^2/6 |psi(0)|^2 for the integrand kink at the origin node.
// Momentum moments are spectral.
inline Observables observables(const GridWavefunction& psi, const Constants& c) {
    check_normalized(psi);
    Observables o;
    const double h = psi.dx_grid;
    const std::size_t n = psi.size();

    double w_sum = 0.0, x_sum = 0.0, xx_sum = 0.0, ax_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = std::norm(psi.amplitudes[i]) * h;
        const double x = psi.x_at(i);
        w_sum += w;
        x_sum += w * x;
        xx_sum += w * x * x;
        ax_sum += w * std::abs(x);
    }
    o.mean_x = x_sum / w_sum;
    o.var_x = xx_sum / w_sum - o.mean_x * o.mean_x;
    if (psi.x0 <= 0.0 && psi.x_end() >= 0.0) {
        // Euler-Maclaurin corrections for the |x| kink sitting on the origin
        // node: + h^2/6 rho(0) - h^4/120 rho''(0), with rho'' from a central
        // difference. Leaves an O(h^6) quadrature residual.
        const auto j0 = std::size_t(std::llround(-psi.x0 / h));
        if (j0 < n && std::abs(psi.x_at(j0)) < 1e-9 * h) {
            const double rho0 = std::norm(psi.amplitudes[j0]);
            ax_sum += h * h / 6.0 * rho0;
            if (j0 >= 1 && j0 + 1 < n) {
                const double rho_dd = std::norm(psi.amplitudes[j0 + 1]) - 2.0 * rho0 +
                                      std::norm(psi.amplitudes[j0 - 1]);
                ax_sum -= h * h / 120.0 * rho_dd;
            }
        }
    }
    o.abs_x = ax_sum / w_sum;

    auto phi = psi.amplitudes;
    detail::fft_radix2(phi, false);
    const double dk = 2.0 * M_PI / (double(n) * h);
    double pw_sum = 0.0, p_sum = 0.0, pp_sum = 0.0;
    std::vector<std::complex<double>> dpsi(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double k = dk * detail::fft_index(j, n);
        const double p = c.hbar * k;
        const double w = std::norm(phi[j]);
        pw_sum += w;
        p_sum += w * p;
        pp_sum += w * p * p;
        dpsi[j] = phi[j] * std::complex<double>(0.0, k);
    }
    o.mean_p = p_sum / pw_sum;
    o.var_p = pp_sum / pw_sum - o.mean_p * o.mean_p;

    detail::fft_radix2(dpsi, true);
    double xp_sym = 0.0;  // Re <psi| x (-i hbar d/dx) |psi>
    for (std::size_t i = 0; i < n; ++i) {
        const std::complex<double> integrand =
            std::conj(psi.amplitudes[i]) * psi.x_at(i) *
            std::complex<double>(0.0, -c.hbar) * dpsi[i];
        xp_sym += integrand.real();
    }
    xp_sym *= h;
    o.cov_xp = xp_sym - o.mean_x * o.mean_p;
    return o;
}

}  // namespace qpath
