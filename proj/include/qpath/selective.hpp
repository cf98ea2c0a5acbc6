#pragma once

// Stochastic trajectory simulation with recorded outcomes: free evolution,
// outcome sampling, collapse, and optional displacement feedback. Each
// trajectory owns a deterministic random stream derived from a master seed,
// so ensembles are reproducible for any worker count.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qpath/constants.hpp"
#include "qpath/errors.hpp"
#include "qpath/gaussian_state.hpp"
#include "qpath/parallel.hpp"
#include "qpath/random.hpp"

namespace qpath {

// Displacement feedback with control time constant t_c. After each outcome
// xbar the packet is shifted by -tau*xbar*gamma2 in position and kicked by
// -tau*xbar*gamma1 in momentum, with gains
//
//   gamma1 = m / (2 t_c^2) = hbar / D,   gamma2 = 1 / t_c,
//
// which ties the consistent measurement strength to D = 2 hbar t_c^2 / m.
struct FeedbackConfig {
    double t_c = 1.0;

    double gamma1(const Constants& c) const { return c.mass / (2.0 * t_c * t_c); }
    double gamma2() const { return 1.0 / t_c; }
    double required_diffusion(const Constants& c) const {
        return 2.0 * c.hbar * t_c * t_c / c.mass;
    }
};

inline void validate(const FeedbackConfig& fb) {
    if (!(fb.t_c > 0.0) || !std::isfinite(fb.t_c))
        throw ConfigError("feedback t_c must be finite and > 0");
}

// Everything needed to rerun one trajectory.
struct SimulationConfig {
    GaussianState state0;
    MeterConfig meter;
    std::optional<FeedbackConfig> feedback;
    std::size_t n_steps = 1;
    Constants constants;
};

inline void validate(const SimulationConfig& cfg) {
    validate(cfg.state0);
    validate(cfg.meter);
    validate(cfg.constants);
    if (cfg.feedback) validate(*cfg.feedback);
    if (cfg.n_steps == 0) throw ConfigError("simulation requires n_steps >= 1");
}

// One trajectory: outcome xbar_r and the post-collapse, post-feedback state
// at each measurement time t_r = r * tau.
struct TrajectoryRecord {
    std::uint64_t seed = 0;
    std::vector<double> times;
    std::vector<double> outcomes;
    std::vector<GaussianState> states;
    SimulationConfig config;
};

struct StepResult {
    GaussianState state;
    double outcome = 0.0;
};

// Deterministic core of one measurement step with a forced outcome:
// free evolution over tau, collapse on xbar, then the feedback displacement.
inline GaussianState step_with_outcome(const GaussianState& state, const MeterConfig& meter,
                                       const std::optional<FeedbackConfig>& fb, double xbar,
                                       const Constants& c) {
    const GaussianState evolved = free_evolve(state, meter.tau, c);
    GaussianState next = collapse_update(evolved, xbar, meter.sigma, c);
    if (fb) {
        next.a -= meter.tau * xbar * fb->gamma2();
        next.b_mom -= meter.tau * xbar * fb->gamma1(c);
        validate(next);
    }
    return next;
}

// One measurement step: evolve, sample the outcome, collapse, apply feedback.
template <class URBG>
StepResult step(const GaussianState& state, const MeterConfig& meter,
                const std::optional<FeedbackConfig>& fb, URBG& stream, const Constants& c) {
    const GaussianState evolved = free_evolve(state, meter.tau, c);
    const double xbar = sample_outcome(evolved, meter.sigma, stream);
    GaussianState next = collapse_update(evolved, xbar, meter.sigma, c);
    if (fb) {
        next.a -= meter.tau * xbar * fb->gamma2();
        next.b_mom -= meter.tau * xbar * fb->gamma1(c);
        validate(next);
    }
    return StepResult{next, xbar};
}

inline TrajectoryRecord simulate_trajectory(const SimulationConfig& cfg, std::uint64_t seed) {
    validate(cfg);
    TrajectoryRecord rec;
    rec.seed = seed;
    rec.config = cfg;
    rec.times.reserve(cfg.n_steps);
    rec.outcomes.reserve(cfg.n_steps);
    rec.states.reserve(cfg.n_steps);
    RandomStream stream = make_stream(seed);
    GaussianState state = cfg.state0;
    for (std::size_t r = 0; r < cfg.n_steps; ++r) {
        const StepResult result = step(state, cfg.meter, cfg.feedback, stream, cfg.constants);
        state = result.state;
        rec.times.push_back(double(r + 1) * cfg.meter.tau);
        rec.outcomes.push_back(result.outcome);
        rec.states.push_back(state);
    }
    return rec;
}

// Seeded Monte-Carlo ensemble. Per-trajectory seeds derive deterministically
// from (master_seed, index); identical inputs give identical records.
inline std::vector<TrajectoryRecord> simulate_ensemble(
    const GaussianState& state0, const MeterConfig& meter, std::size_t n_steps,
    std::size_t n_traj, const std::optional<FeedbackConfig>& fb, std::uint64_t master_seed,
    const Constants& c, std::size_t workers = 1) {
    if (n_traj == 0) throw ConfigError("simulate_ensemble requires n_traj >= 1");
    SimulationConfig cfg{state0, meter, fb, n_steps, c};
    validate(cfg);
    std::vector<TrajectoryRecord> records(n_traj);
    parallel_for(n_traj, workers, [&](std::size_t i) {
        records[i] = simulate_trajectory(cfg, derive_seed(master_seed, i));
    });
    return records;
}

// Streaming ensemble statistics at evenly spaced checkpoints; avoids storing
// full records for large ensembles. Per-trajectory values land in slots
// keyed by index and are reduced in index order, so the result does not
// depend on the worker count.
struct EnsembleMoments {
    std::vector<double> times;
    std::size_t n_traj = 0;
    std::vector<double> mean_a, se_a;    // ensemble mean of a and its standard error
    std::vector<double> mean_b, se_b;    // same for b_mom
    std::vector<double> mean_x2, se_x2;  // ensemble mean of <x^2> = a^2 + delta/2
};

inline EnsembleMoments ensemble_moments(const GaussianState& state0, const MeterConfig& meter,
                                        std::size_t n_steps, std::size_t n_traj,
                                        const std::optional<FeedbackConfig>& fb,
                                        std::uint64_t master_seed, const Constants& c,
                                        std::size_t checkpoint_stride, std::size_t workers = 1) {
    if (n_traj == 0) throw ConfigError("ensemble_moments requires n_traj >= 1");
    if (checkpoint_stride == 0 || checkpoint_stride > n_steps)
        throw ConfigError("ensemble_moments: invalid checkpoint stride");
    SimulationConfig cfg{state0, meter, fb, n_steps, c};
    validate(cfg);

    const std::size_t n_checks = n_steps / checkpoint_stride;
    std::vector<double> a_val(n_traj * n_checks), b_val(n_traj * n_checks),
        x2_val(n_traj * n_checks);
    parallel_for(n_traj, workers, [&](std::size_t i) {
        RandomStream stream = make_stream(derive_seed(master_seed, i));
        GaussianState state = cfg.state0;
        std::size_t check = 0;
        for (std::size_t r = 0; r < n_steps; ++r) {
            state = step(state, meter, fb, stream, c).state;
            if ((r + 1) % checkpoint_stride == 0) {
                const std::size_t slot = i * n_checks + check;
                a_val[slot] = state.a;
                b_val[slot] = state.b_mom;
                x2_val[slot] = state.a * state.a + state.delta / 2.0;
                ++check;
            }
        }
    });

    EnsembleMoments out;
    out.n_traj = n_traj;
    out.times.resize(n_checks);
    out.mean_a.resize(n_checks);
    out.se_a.resize(n_checks);
    out.mean_b.resize(n_checks);
    out.se_b.resize(n_checks);
    out.mean_x2.resize(n_checks);
    out.se_x2.resize(n_checks);
    for (std::size_t k = 0; k < n_checks; ++k)
        out.times[k] = double((k + 1) * checkpoint_stride) * meter.tau;

    auto reduce = [&](const std::vector<double>& vals, std::vector<double>& mean,
                      std::vector<double>& se) {
        for (std::size_t k = 0; k < n_checks; ++k) {
            double sum = 0.0;
            for (std::size_t i = 0; i < n_traj; ++i) sum += vals[i * n_checks + k];
            const double mu = sum / double(n_traj);
            double ss = 0.0;
            for (std::size_t i = 0; i < n_traj; ++i) {
                const double d = vals[i * n_checks + k] - mu;
                ss += d * d;
            }
            mean[k] = mu;
            se[k] = n_traj > 1 ? std::sqrt(ss / double(n_traj - 1) / double(n_traj)) : 0.0;
        }
    };
    reduce(a_val, out.mean_a, out.se_a);
    reduce(b_val, out.mean_b, out.se_b);
    reduce(x2_val, out.mean_x2, out.se_x2);
    return out;
}

// Analytic solution of y'' + y'/t_c + y/(2 t_c^2) = 0 with y(0) = y0,
// y'(0) = ydot0: underdamped for every t_c, damping ratio 1/sqrt(2),
// decay rate and angular frequency both 1/(2 t_c).
inline double damped_oscillator_reference(double y0, double ydot0, double t_c, double t) {
    if (!(t_c > 0.0)) throw std::invalid_argument("damped_oscillator_reference: t_c must be > 0");
    const double w = 1.0 / (2.0 * t_c);
    return std::exp(-w * t) * (y0 * std::cos(w * t) + (ydot0 / w + y0) * std::sin(w * t));
}

}  // namespace qpath
