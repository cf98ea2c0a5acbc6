#pragma once

// Randomized equivalence checks between the closed-form Gaussian maps and
// the grid oracle. Exposed in the public API so the validation CLI mode and
// the test suites share one scenario runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "qpath/constants.hpp"
#include "qpath/gaussian_state.hpp"
#include "qpath/oracle_grid.hpp"
#include "qpath/random.hpp"

namespace qpath {

struct OracleComparison {
    std::uint64_t scenario = 0;
    std::uint64_t seed = 0;
    double err_free_evolve = 0.0;
    double err_outcome_pdf = 0.0;
    double err_collapse = 0.0;
    double err_abs_x = 0.0;

    double max_err() const {
        return std::max(std::max(err_free_evolve, err_outcome_pdf),
                        std::max(err_collapse, err_abs_x));
    }
};

namespace detail {

// Relative error with a unit floor; scenario quantities are O(1) in natural units.
inline double rel_err(double value, double reference) {
    return std::abs(value - reference) / std::max(std::abs(reference), 1.0);
}

inline double state_err(const GaussianState& value, const GaussianState& reference) {
    return std::max(std::max(rel_err(value.a, reference.a), rel_err(value.b_mom, reference.b_mom)),
                    std::max(rel_err(value.delta, reference.delta), rel_err(value.eps, reference.eps)));
}

}  // namespace detail

// One randomized scenario: draw a state, meter, and interval; propagate,
// measure, and collapse both through the closed forms and on the grid; report
// the worst relative disagreement per operation.
inline OracleComparison run_oracle_scenario(std::uint64_t scenario_index, std::uint64_t seed,
                                            const Constants& c) {
    RandomStream stream = make_stream(seed);
    auto uniform = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(stream);
    };

    GaussianState s0;
    s0.a = uniform(-2.0, 2.0);
    s0.b_mom = uniform(-2.0, 2.0);
    s0.delta = uniform(0.2, 5.0);
    s0.eps = uniform(-2.0, 2.0);
    const double tau = uniform(0.01, 1.0);
    const double sigma = uniform(0.2, 10.0);

    const GaussianState s1 = free_evolve(s0, tau, c);
    const OutcomePdf pdf = outcome_pdf(s1, sigma);

    // Grid sized from closed-form predictions (sizing only; the comparison
    // itself is independent quadrature).
    const double xbar_span = 4.0 * std::sqrt(pdf.variance);
    const double sigma_x_max = std::sqrt(std::max(s0.delta, s1.delta) / 2.0);
    double sigma_p_max = std::sqrt(momentum_variance(s0, c));
    {
        const GaussianState worst = collapse_update(s1, s1.a + xbar_span, sigma, c);
        sigma_p_max = std::max(sigma_p_max, std::sqrt(momentum_variance(worst, c)));
    }
    GridSpec spec;
    spec.center = s1.a;
    spec.half_width = 14.0 * sigma_x_max + xbar_span + std::abs(s0.a - s1.a) + 2.0;
    const double p_max = std::abs(s0.b_mom) + 10.0 * sigma_p_max;
    const double h_max = M_PI * c.hbar / (2.0 * p_max);
    std::size_t n = 512;
    while (n < (std::size_t(1) << 17) && 2.0 * spec.half_width / double(n) > h_max) n <<= 1;
    spec.n_points = n;

    OracleComparison cmp;
    cmp.scenario = scenario_index;
    cmp.seed = seed;

    const GridWavefunction psi0 = init_gaussian(s0, spec, c);
    const GridWavefunction psi1 = propagate_free(psi0, tau, c);
    const GaussianState s1_grid = to_gaussian_state(observables(psi1, c), c);
    cmp.err_free_evolve = detail::state_err(s1, s1_grid);

    // Outcome density against meter-application likelihood, pointwise relative.
    for (int i = 0; i < 21; ++i) {
        const double xbar = pdf.mean + xbar_span * (double(i) / 10.0 - 1.0);
        const double from_grid = apply_meter(psi1, xbar, sigma).likelihood;
        const double reference = pdf.density(xbar);
        cmp.err_outcome_pdf =
            std::max(cmp.err_outcome_pdf, std::abs(reference - from_grid) / reference);
    }

    // Collapse for a few sampled outcomes.
    for (int k = 0; k < 3; ++k) {
        const double xbar = sample_outcome(s1, sigma, stream);
        const GaussianState post = collapse_update(s1, xbar, sigma, c);
        const MeterApplication applied = apply_meter(psi1, xbar, sigma);
        const Observables obs = observables(applied.psi, c);
        const GaussianState post_grid = to_gaussian_state(obs, c);
        cmp.err_collapse = std::max(cmp.err_collapse, detail::state_err(post, post_grid));
        cmp.err_abs_x = std::max(
            cmp.err_abs_x, detail::rel_err(expectation_abs_x(post.a, post.delta), obs.abs_x));
    }
    cmp.err_abs_x = std::max(
        cmp.err_abs_x,
        detail::rel_err(expectation_abs_x(s1.a, s1.delta), observables(psi1, c).abs_x));
    return cmp;
}

inline std::vector<OracleComparison> run_oracle_scenarios(std::size_t count,
                                                          std::uint64_t master_seed,
                                                          const Constants& c) {
    std::vector<OracleComparison> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(run_oracle_scenario(i, derive_seed(master_seed, i), c));
    return out;
}

}  // namespace qpath
