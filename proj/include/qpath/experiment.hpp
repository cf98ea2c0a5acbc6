#pragma once

// Configuration-driven experiment runner: analytic and sampled dimension
// sweeps, feedback relaxation against the damped-oscillator reference, and
// the randomized oracle-equivalence report. Results are deterministic given
// (config, master_seed) for any worker count.

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qpath/config.hpp"
#include "qpath/dimension.hpp"
#include "qpath/nonselective.hpp"
#include "qpath/result_table.hpp"
#include "qpath/selective.hpp"
#include "qpath/validation.hpp"
#include "qpath/version.hpp"

namespace qpath {

// Cooperative interrupt flag; the CLI's signal handler sets it and sweep
// loops poll it between units of work.
inline std::atomic<bool>& stop_flag() {
    static std::atomic<bool> flag{false};
    return flag;
}
inline void request_stop() { stop_flag().store(true); }
inline void clear_stop() { stop_flag().store(false); }

using StopCheck = std::function<bool()>;

inline bool should_stop(const StopCheck& custom) {
    if (custom && custom()) return true;
    return stop_flag().load();
}

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<ResultTable> tables;  // tables[0] is the primary table
    double wall_seconds = 0.0;
};

namespace detail {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline void apply_run_metadata(ResultTable& table, const ExperimentConfig& cfg) {
    table.meta("run_info.version", kVersion);
    const KeyValueConfig echoed = cfg.echo();
    for (const auto& kv : echoed.entries()) table.meta(kv.first, kv.second);
}

inline GaussianState initial_state(const ExperimentConfig& cfg, double delta) {
    GaussianState s;
    s.a = cfg.state_a;
    s.b_mom = cfg.state_b_mom;
    s.delta = delta;
    s.eps = cfg.state_eps;
    return s;
}

inline ExperimentResult run_nonselective_dimension(const ExperimentConfig& cfg,
                                                   const StopCheck& stop) {
    ResolutionSchedule sched{cfg.dx_values, cfg.b_scale, cfg.T};
    validate(sched, cfg.constants);

    ResultTable summary;
    summary.name = "summary";
    summary.columns = {"D", "d_fit", "residual", "n_points", "well_defined"};
    ResultTable points;
    points.name = "points";
    points.columns = {"D", "dx", "t", "segment_length", "path_length", "local_d"};

    for (double d_value : cfg.d_values) {
        if (should_stop(stop)) {
            summary.partial = points.partial = true;
            break;
        }
        const ContinuousLimit D{d_value};
        std::vector<std::pair<double, double>> fit_points;
        for (double dx : sched.dx_values) {
            const double t = sched.time_for(dx, cfg.constants);
            const double segment =
                analytic_segment_length(dx, t, cfg.state_eps, cfg.state_b_mom, D, cfg.constants);
            const double l = (sched.T / t) * segment;
            fit_points.emplace_back(dx, l);
            points.rows.push_back({d_value, dx, t, segment, l, kNaN});
        }
        const DimensionFit fit = fit_dimension(fit_points);
        const std::size_t first_row = points.rows.size() - sched.dx_values.size();
        for (std::size_t i = 0; i < fit.local_d.size(); ++i)
            points.rows[first_row + i][5] = fit.local_d[i].second;
        summary.rows.push_back({d_value, fit.d, fit.residual, double(fit_points.size()),
                                fit.residual <= cfg.residual_threshold ? 1.0 : 0.0});
    }

    ExperimentResult result;
    result.config = cfg;
    result.tables = {std::move(summary), std::move(points)};
    return result;
}

// Per-resolution simulation parameters for the sampled sweep: the recording
// interval follows the schedule, the control constant is a fixed multiple of
// it, and the measurement strength follows from feedback consistency, so the
// stationary process is self-similar across resolutions.
struct SelectivePoint {
    double dx = 0.0;
    MeterConfig meter;
    FeedbackConfig feedback;
    double diffusion = 0.0;
    std::size_t n_segments = 0;
};

inline SelectivePoint selective_point(const ExperimentConfig& cfg,
                                      const ResolutionSchedule& sched, double dx) {
    SelectivePoint p;
    p.dx = dx;
    const double tau = sched.time_for(dx, cfg.constants);
    p.feedback.t_c = *cfg.t_c_over_tau * tau;
    p.diffusion = p.feedback.required_diffusion(cfg.constants);
    p.meter.tau = tau;
    p.meter.sigma = p.diffusion / tau;
    p.n_segments = std::size_t(std::llround(sched.T / tau));
    return p;
}

inline ExperimentResult run_selective_dimension(const ExperimentConfig& cfg,
                                                const StopCheck& stop) {
    ResolutionSchedule sched{cfg.dx_values, cfg.b_scale, cfg.T};
    validate(sched, cfg.constants);

    ResultTable summary;
    summary.name = "summary";
    summary.columns = {"d_fit", "residual", "n_points", "well_defined"};
    ResultTable points;
    points.name = "points";
    points.columns = {"dx",     "tau",        "sigma",    "D",      "t_c",
                      "n_segments", "path_length", "path_stderr", "local_d"};
    ResultTable trajectories;
    trajectories.name = "trajectories";
    trajectories.columns = {"dx", "traj", "step", "t", "outcome", "a", "b_mom", "delta", "eps"};

    std::vector<std::pair<double, double>> fit_points;
    for (double dx : sched.dx_values) {
        if (should_stop(stop)) {
            summary.partial = points.partial = trajectories.partial = true;
            break;
        }
        const SelectivePoint p = selective_point(cfg, sched, dx);
        if (p.n_segments < 2)
            throw ConfigError("selective-dimension: schedule leaves fewer than 2 segments at dx = " +
                              format_double(dx) + "; increase schedule.T");
        const GaussianState state0 = initial_state(cfg, 2.0 * dx * dx);
        const std::size_t n_steps = cfg.burn_in + p.n_segments + 1;
        const auto records = simulate_ensemble(state0, p.meter, n_steps, cfg.n_traj, p.feedback,
                                               cfg.master_seed, cfg.constants, cfg.workers);

        double sum = 0.0, sum_sq = 0.0;
        for (const auto& rec : records) {
            const std::vector<double> recorded(rec.outcomes.begin() + long(cfg.burn_in),
                                               rec.outcomes.end());
            const double l = path_length_outcomes(recorded);
            sum += l;
            sum_sq += l * l;
        }
        const double n = double(records.size());
        const double mean_l = sum / n;
        const double var_l = n > 1 ? std::max(0.0, (sum_sq - n * mean_l * mean_l) / (n - 1.0)) : 0.0;
        const double se_l = std::sqrt(var_l / n);
        fit_points.emplace_back(dx, mean_l);
        points.rows.push_back({dx, p.meter.tau, p.meter.sigma, p.diffusion, p.feedback.t_c,
                               double(p.n_segments), mean_l, se_l, kNaN});

        if (cfg.dump_trajectories)
            for (std::size_t ti = 0; ti < records.size(); ++ti)
                for (std::size_t r = 0; r < records[ti].outcomes.size(); ++r)
                    trajectories.rows.push_back({dx, double(ti), double(r + 1),
                                                 records[ti].times[r], records[ti].outcomes[r],
                                                 records[ti].states[r].a,
                                                 records[ti].states[r].b_mom,
                                                 records[ti].states[r].delta,
                                                 records[ti].states[r].eps});
    }

    if (fit_points.size() >= 3) {
        const DimensionFit fit = fit_dimension(fit_points);
        for (std::size_t i = 0; i < fit.local_d.size(); ++i) points.rows[i][8] = fit.local_d[i].second;
        summary.rows.push_back({fit.d, fit.residual, double(fit_points.size()),
                                fit.residual <= cfg.residual_threshold ? 1.0 : 0.0});
    } else {
        summary.rows.push_back({kNaN, kNaN, double(fit_points.size()), 0.0});
    }

    ExperimentResult result;
    result.config = cfg;
    result.tables = {std::move(summary), std::move(points)};
    if (cfg.dump_trajectories) result.tables.push_back(std::move(trajectories));
    for (auto& t : result.tables) t.meta("run_info.path_length_definition", "outcome-increments");
    return result;
}

inline ExperimentResult run_feedback_relaxation(const ExperimentConfig& cfg,
                                                const StopCheck& stop) {
    const double tau = *cfg.tau;
    const double t_c = *cfg.t_c;
    MeterConfig meter{*cfg.sigma, tau};
    FeedbackConfig feedback{t_c};
    const GaussianState state0 = initial_state(cfg, *cfg.state_delta);

    const auto n_steps = std::size_t(std::llround(cfg.t_max / tau));
    const std::size_t stride = std::max<std::size_t>(1, n_steps / cfg.n_checkpoints);
    const EnsembleMoments moments =
        ensemble_moments(state0, meter, n_steps, cfg.n_traj, feedback, cfg.master_seed,
                         cfg.constants, stride, cfg.workers);

    const double m = cfg.constants.mass;
    const double adot0 = state0.b_mom / m - state0.a / t_c;
    const double bdot0 = -m / (2.0 * t_c * t_c) * state0.a;

    ResultTable table;
    table.name = "relaxation";
    table.columns = {"t", "mean_a", "stderr_a", "reference_a", "mean_b", "stderr_b", "reference_b"};
    table.rows.push_back({0.0, state0.a, 0.0, state0.a, state0.b_mom, 0.0, state0.b_mom});
    for (std::size_t k = 0; k < moments.times.size(); ++k) {
        const double t = moments.times[k];
        table.rows.push_back({t, moments.mean_a[k], moments.se_a[k],
                              damped_oscillator_reference(state0.a, adot0, t_c, t),
                              moments.mean_b[k], moments.se_b[k],
                              damped_oscillator_reference(state0.b_mom, bdot0, t_c, t)});
    }
    (void)stop;  // the ensemble reduction is one unit of work; the table is complete or absent

    ExperimentResult result;
    result.config = cfg;
    result.tables = {std::move(table)};
    return result;
}

inline ExperimentResult run_oracle_validation(const ExperimentConfig& cfg, const StopCheck& stop) {
    ResultTable table;
    table.name = "oracle";
    table.columns = {"scenario", "err_free_evolve", "err_outcome_pdf",
                     "err_collapse", "err_abs_x", "max_err", "pass"};
    double worst = 0.0;
    std::size_t n_pass = 0;
    for (std::size_t i = 0; i < cfg.n_scenarios; ++i) {
        if (should_stop(stop)) {
            table.partial = true;
            break;
        }
        const OracleComparison cmp =
            run_oracle_scenario(i, derive_seed(cfg.master_seed, i), cfg.constants);
        const bool pass = cmp.max_err() <= 1e-6;
        worst = std::max(worst, cmp.max_err());
        n_pass += pass ? 1 : 0;
        table.rows.push_back({double(i), cmp.err_free_evolve, cmp.err_outcome_pdf,
                              cmp.err_collapse, cmp.err_abs_x, cmp.max_err(), pass ? 1.0 : 0.0});
    }
    table.meta("run_info.max_err", format_double(worst));
    table.meta("run_info.n_pass", std::to_string(n_pass));

    ExperimentResult result;
    result.config = cfg;
    result.tables = {std::move(table)};
    return result;
}

}  // namespace detail

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const StopCheck& stop = {}) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentResult result;
    switch (cfg.mode) {
        case ExperimentMode::NonselectiveDimension:
            result = detail::run_nonselective_dimension(cfg, stop);
            break;
        case ExperimentMode::SelectiveDimension:
            result = detail::run_selective_dimension(cfg, stop);
            break;
        case ExperimentMode::FeedbackRelaxation:
            result = detail::run_feedback_relaxation(cfg, stop);
            break;
        case ExperimentMode::OracleValidation:
            result = detail::run_oracle_validation(cfg, stop);
            break;
    }
    for (auto& table : result.tables) detail::apply_run_metadata(table, cfg);
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

// Writes each table as '<mode>-<timestamp>[-<table>].<fmt>' under out_dir.
// The wall time is appended at write time so in-memory tables stay
// bit-comparable across reruns.
inline std::vector<std::string> emit_results(const ExperimentResult& result,
                                             const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::tm tm_utc{};
    gmtime_r(&tt, &tm_utc);
    std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm_utc);

    std::vector<std::string> written;
    for (std::size_t i = 0; i < result.tables.size(); ++i) {
        ResultTable table = result.tables[i];
        table.meta("run_info.wall_time_s", format_double(result.wall_seconds));
        std::string base = mode_name(result.config.mode) + "-" + stamp;
        if (i > 0) base += "-" + table.name;
        for (const auto& fmt : result.config.formats) {
            fs::path path = fs::path(out_dir) / (base + "." + fmt);
            for (int suffix = 2; fs::exists(path); ++suffix)
                path = fs::path(out_dir) / (base + "-" + std::to_string(suffix) + "." + fmt);
            std::ofstream out(path);
            if (!out) throw std::runtime_error("cannot open output file: " + path.string());
            if (fmt == "csv")
                out << to_csv(table);
            else
                out << to_json(table).dump(2) << "\n";
            if (!out) throw std::runtime_error("write failed: " + path.string());
            written.push_back(path.string());
        }
    }
    return written;
}

}  // namespace qpath
