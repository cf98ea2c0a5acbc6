#pragma once

// Plain-text key/value configuration ("dotted.path = value" lines) and the
// typed experiment configuration parsed from it. All quantities are in
// natural units; CLI flags override file values key by key.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qpath/constants.hpp"
#include "qpath/dimension.hpp"
#include "qpath/errors.hpp"
#include "qpath/nonselective.hpp"
#include "qpath/result_table.hpp"

namespace qpath {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) parts.push_back(trim(item));
    if (!s.empty() && s.back() == sep) parts.push_back("");
    return parts;
}

}  // namespace detail

// Ordered key/value tree with dotted paths. Later assignments to the same
// key replace the earlier value (override semantics).
class KeyValueConfig {
public:
    void set(const std::string& key, const std::string& value) {
        for (auto& kv : entries_)
            if (kv.first == key) {
                kv.second = value;
                return;
            }
        entries_.emplace_back(key, value);
    }

    bool has(const std::string& key) const {
        for (const auto& kv : entries_)
            if (kv.first == key) return true;
        return false;
    }

    std::string get(const std::string& key) const {
        for (const auto& kv : entries_)
            if (kv.first == key) return kv.second;
        throw ConfigError("missing config key: " + key);
    }

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    static KeyValueConfig parse(const std::string& text) {
        KeyValueConfig kv;
        std::istringstream in(text);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string stripped = detail::trim(line);
            if (stripped.empty() || stripped[0] == '#') continue;
            const auto eq = stripped.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": expected 'key = value', got: " + stripped);
            const std::string key = detail::trim(stripped.substr(0, eq));
            const std::string value = detail::trim(stripped.substr(eq + 1));
            if (key.empty())
                throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
            kv.set(key, value);
        }
        return kv;
    }

    static KeyValueConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str());
    }

    std::string to_string() const {
        std::string out;
        for (const auto& kv : entries_) out += kv.first + " = " + kv.second + "\n";
        return out;
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

// Extracts the '#'-prefixed metadata lines of an emitted table back into a
// key/value tree; feeding the result to ExperimentConfig::from_key_values
// reconstructs the run that produced the file.
inline KeyValueConfig parse_metadata_block(const std::string& table_text) {
    std::string plain;
    std::istringstream in(table_text);
    std::string line;
    while (std::getline(in, line)) {
        const std::string s = detail::trim(line);
        if (!s.empty() && s[0] == '#') plain += s.substr(1) + "\n";
    }
    return KeyValueConfig::parse(plain);
}

enum class ExperimentMode {
    NonselectiveDimension,
    SelectiveDimension,
    FeedbackRelaxation,
    OracleValidation,
};

inline std::string mode_name(ExperimentMode m) {
    switch (m) {
        case ExperimentMode::NonselectiveDimension: return "nonselective-dimension";
        case ExperimentMode::SelectiveDimension: return "selective-dimension";
        case ExperimentMode::FeedbackRelaxation: return "feedback-relaxation";
        case ExperimentMode::OracleValidation: return "oracle-validation";
    }
    throw ConfigError("unknown experiment mode");
}

inline ExperimentMode parse_mode(const std::string& name) {
    if (name == "nonselective-dimension") return ExperimentMode::NonselectiveDimension;
    if (name == "selective-dimension") return ExperimentMode::SelectiveDimension;
    if (name == "feedback-relaxation") return ExperimentMode::FeedbackRelaxation;
    if (name == "oracle-validation") return ExperimentMode::OracleValidation;
    throw ConfigError(
        "mode must be one of nonselective-dimension, selective-dimension, "
        "feedback-relaxation, oracle-validation; got: " +
        name);
}

namespace detail {

inline double parse_double(const std::string& key, const std::string& value) {
    if (value == "inf" || value == "infinity" || value == "+inf")
        return std::numeric_limits<double>::infinity();
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": cannot parse number from '" + value + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": cannot parse integer from '" + value + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config key " + key + ": expected true/false, got '" + value + "'");
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& item : split(value, ','))
        if (!item.empty()) out.push_back(parse_double(key, item));
    if (out.empty()) throw ConfigError("config key " + key + ": empty list");
    return out;
}

inline std::string join_doubles(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += format_double(values[i]);
    }
    return out;
}

}  // namespace detail

// Fully resolved experiment configuration. Parse with from_key_values (which
// validates) and serialize back with echo(); a run is reproducible from its
// echoed configuration alone.
struct ExperimentConfig {
    ExperimentMode mode = ExperimentMode::NonselectiveDimension;
    Constants constants;

    // initial state
    double state_a = 0.0;
    double state_b_mom = 0.0;
    double state_eps = 0.0;
    std::optional<double> state_delta;  // dimension modes derive it from dx

    // resolution schedule
    std::vector<double> dx_values;  // decreasing
    double b_scale = 0.5;
    double T = 0.0;

    // measurement strength
    std::vector<double> d_values;  // may hold inf
    std::optional<double> sigma;
    std::optional<double> tau;

    // feedback
    std::optional<double> t_c;
    std::optional<double> t_c_over_tau;
    bool feedback_override = false;

    // ensemble
    std::size_t n_traj = 1000;
    std::uint64_t master_seed = 1;
    std::size_t burn_in = 100;

    // relaxation run
    double t_max = 0.0;
    std::size_t n_checkpoints = 20;

    double residual_threshold = 0.05;
    std::size_t n_scenarios = 100;

    // output
    std::string out_dir = "out";
    std::vector<std::string> formats = {"csv", "json"};
    bool dump_trajectories = false;
    std::size_t workers = 0;

    static ExperimentConfig from_key_values(const KeyValueConfig& kv);
    KeyValueConfig echo() const;
};

inline ExperimentConfig ExperimentConfig::from_key_values(const KeyValueConfig& kv) {
    ExperimentConfig cfg;
    bool has_mode = false;
    bool dx_list = false, dx_range = false;
    double dx_max = 0.0, dx_min = 0.0;
    std::size_t dx_n = 0;
    std::optional<double> d_single;

    for (const auto& [key, value] : kv.entries()) {
        // Emitted-table metadata, not configuration; lets a config be rebuilt
        // from a result file's metadata block.
        if (key.rfind("run_info.", 0) == 0 || key == "table" || key == "partial") continue;
        if (key == "mode") {
            cfg.mode = parse_mode(value);
            has_mode = true;
        } else if (key == "constants.hbar") {
            cfg.constants.hbar = detail::parse_double(key, value);
        } else if (key == "constants.mass") {
            cfg.constants.mass = detail::parse_double(key, value);
        } else if (key == "state.a") {
            cfg.state_a = detail::parse_double(key, value);
        } else if (key == "state.b_mom") {
            cfg.state_b_mom = detail::parse_double(key, value);
        } else if (key == "state.eps") {
            cfg.state_eps = detail::parse_double(key, value);
        } else if (key == "state.delta") {
            cfg.state_delta = detail::parse_double(key, value);
        } else if (key == "schedule.dx") {
            cfg.dx_values = detail::parse_double_list(key, value);
            dx_list = true;
        } else if (key == "schedule.dx_max") {
            dx_max = detail::parse_double(key, value);
            dx_range = true;
        } else if (key == "schedule.dx_min") {
            dx_min = detail::parse_double(key, value);
            dx_range = true;
        } else if (key == "schedule.n_points") {
            dx_n = detail::parse_u64(key, value);
            dx_range = true;
        } else if (key == "schedule.b_scale") {
            cfg.b_scale = detail::parse_double(key, value);
        } else if (key == "schedule.T") {
            cfg.T = detail::parse_double(key, value);
        } else if (key == "measurement.D") {
            cfg.d_values = detail::parse_double_list(key, value);
            if (cfg.d_values.size() == 1) d_single = cfg.d_values.front();
        } else if (key == "measurement.sigma") {
            cfg.sigma = detail::parse_double(key, value);
        } else if (key == "measurement.tau") {
            cfg.tau = detail::parse_double(key, value);
        } else if (key == "feedback.t_c") {
            cfg.t_c = detail::parse_double(key, value);
        } else if (key == "feedback.t_c_over_tau") {
            cfg.t_c_over_tau = detail::parse_double(key, value);
        } else if (key == "feedback.override_consistency") {
            cfg.feedback_override = detail::parse_bool(key, value);
        } else if (key == "ensemble.n_traj") {
            cfg.n_traj = detail::parse_u64(key, value);
        } else if (key == "ensemble.master_seed") {
            cfg.master_seed = detail::parse_u64(key, value);
        } else if (key == "ensemble.burn_in") {
            cfg.burn_in = detail::parse_u64(key, value);
        } else if (key == "run.t_max") {
            cfg.t_max = detail::parse_double(key, value);
        } else if (key == "run.n_checkpoints") {
            cfg.n_checkpoints = detail::parse_u64(key, value);
        } else if (key == "fit.residual_threshold") {
            cfg.residual_threshold = detail::parse_double(key, value);
        } else if (key == "oracle.n_scenarios") {
            cfg.n_scenarios = detail::parse_u64(key, value);
        } else if (key == "output.dir") {
            cfg.out_dir = value;
        } else if (key == "output.formats") {
            cfg.formats.clear();
            for (const auto& f : detail::split(value, ','))
                if (!f.empty()) cfg.formats.push_back(f);
        } else if (key == "output.trajectories") {
            cfg.dump_trajectories = detail::parse_bool(key, value);
        } else if (key == "workers") {
            cfg.workers = detail::parse_u64(key, value);
        } else {
            throw ConfigError("unknown config key: " + key);
        }
    }

    if (!has_mode) throw ConfigError("config requires a 'mode' key");
    validate(cfg.constants);
    for (const auto& f : cfg.formats)
        if (f != "csv" && f != "json")
            throw ConfigError("output.formats supports csv and json, got: " + f);
    if (cfg.formats.empty()) throw ConfigError("output.formats must not be empty");

    // Resolve the schedule.
    const bool needs_schedule = cfg.mode == ExperimentMode::NonselectiveDimension ||
                                cfg.mode == ExperimentMode::SelectiveDimension;
    if (dx_list && dx_range)
        throw ConfigError("give either schedule.dx or schedule.dx_max/dx_min/n_points, not both");
    if (dx_range) {
        if (!(dx_max > dx_min) || !(dx_min > 0.0) || dx_n < 3)
            throw ConfigError(
                "schedule range requires dx_max > dx_min > 0 and schedule.n_points >= 3");
        cfg.dx_values =
            ResolutionSchedule::log_spaced(dx_max, dx_min, dx_n, cfg.b_scale, cfg.T).dx_values;
    }
    if (needs_schedule) {
        if (cfg.dx_values.size() < 3)
            throw ConfigError(mode_name(cfg.mode) +
                              " requires a schedule with >= 3 resolutions "
                              "(schedule.dx or schedule.dx_max/dx_min/n_points)");
        ResolutionSchedule sched{cfg.dx_values, cfg.b_scale, cfg.T};
        validate(sched, cfg.constants);
        if (cfg.state_delta)
            throw ConfigError(
                "state.delta is derived from the schedule resolution in dimension modes");
    } else if (!cfg.dx_values.empty()) {
        throw ConfigError("schedule.* keys are only valid in dimension modes");
    }

    // Resolve measurement strength, enforcing D = sigma * tau when redundant.
    const double rel_tol = 1e-9;
    auto consistent = [&](double x, double y) {
        return std::abs(x - y) <= rel_tol * std::max(std::abs(x), std::abs(y));
    };
    if (cfg.sigma && !(*cfg.sigma > 0.0))
        throw ConfigError("measurement.sigma must be > 0");
    if (cfg.tau && !(*cfg.tau > 0.0)) throw ConfigError("measurement.tau must be > 0");
    for (double d : cfg.d_values)
        if (std::isnan(d) || !(d > 0.0))
            throw ConfigError("measurement.D entries must be > 0 (or inf)");
    if (cfg.sigma && cfg.tau) {
        const double st = *cfg.sigma * *cfg.tau;
        if (d_single && !consistent(*d_single, st))
            throw ConfigError("inconsistent measurement: D = " + format_double(*d_single) +
                              " but sigma*tau = " + format_double(st));
        if (cfg.d_values.size() > 1)
            throw ConfigError("measurement.D list cannot be combined with sigma/tau");
        if (cfg.d_values.empty()) cfg.d_values = {st};
    }

    switch (cfg.mode) {
        case ExperimentMode::NonselectiveDimension:
            if (cfg.d_values.empty())
                throw ConfigError(
                    "nonselective-dimension requires measurement.D (or sigma and tau)");
            if (cfg.t_c || cfg.t_c_over_tau)
                throw ConfigError("feedback.* is not used in nonselective-dimension mode");
            break;
        case ExperimentMode::SelectiveDimension:
            if (!cfg.t_c_over_tau)
                throw ConfigError(
                    "selective-dimension requires feedback.t_c_over_tau "
                    "(control constant in units of the recording interval)");
            if (!(*cfg.t_c_over_tau > 0.0))
                throw ConfigError("feedback.t_c_over_tau must be > 0");
            if (!cfg.d_values.empty() || cfg.sigma || cfg.tau)
                throw ConfigError(
                    "selective-dimension derives measurement.D, sigma, tau per schedule point; "
                    "remove them from the config");
            if (cfg.n_traj == 0) throw ConfigError("ensemble.n_traj must be >= 1");
            break;
        case ExperimentMode::FeedbackRelaxation: {
            if (!cfg.t_c) throw ConfigError("feedback-relaxation requires feedback.t_c");
            if (!(*cfg.t_c > 0.0)) throw ConfigError("feedback.t_c must be > 0");
            if (!cfg.tau) throw ConfigError("feedback-relaxation requires measurement.tau");
            const double d_required =
                2.0 * cfg.constants.hbar * *cfg.t_c * *cfg.t_c / cfg.constants.mass;
            if (cfg.d_values.size() > 1)
                throw ConfigError("feedback-relaxation takes a single measurement.D");
            if (!cfg.d_values.empty() && std::isinf(cfg.d_values.front()))
                throw ConfigError(
                    "feedback with D = inf diverges (outcome variance is unbounded); "
                    "use a finite measurement strength");
            if (!cfg.d_values.empty() && !consistent(cfg.d_values.front(), d_required) &&
                !cfg.feedback_override)
                throw ConfigError("feedback consistency requires D = 2*hbar*t_c^2/m = " +
                                  format_double(d_required) + ", got D = " +
                                  format_double(cfg.d_values.front()) +
                                  " (set feedback.override_consistency = true to force)");
            if (cfg.d_values.empty()) cfg.d_values = {d_required};
            const double sigma_required = cfg.d_values.front() / *cfg.tau;
            if (cfg.sigma && !consistent(*cfg.sigma, sigma_required))
                throw ConfigError("inconsistent measurement.sigma; D/tau = " +
                                  format_double(sigma_required));
            cfg.sigma = sigma_required;
            if (!(cfg.t_max > 0.0)) throw ConfigError("feedback-relaxation requires run.t_max > 0");
            if (cfg.n_checkpoints == 0) throw ConfigError("run.n_checkpoints must be >= 1");
            if (cfg.t_max < *cfg.tau * double(cfg.n_checkpoints))
                throw ConfigError("run.t_max too small for the checkpoint count at this tau");
            if (cfg.n_traj == 0) throw ConfigError("ensemble.n_traj must be >= 1");
            if (!cfg.state_delta) cfg.state_delta = std::sqrt(2.0 * cfg.constants.hbar *
                                                              cfg.d_values.front() /
                                                              cfg.constants.mass);
            break;
        }
        case ExperimentMode::OracleValidation:
            if (cfg.n_scenarios == 0) throw ConfigError("oracle.n_scenarios must be >= 1");
            break;
    }
    return cfg;
}

inline KeyValueConfig ExperimentConfig::echo() const {
    KeyValueConfig kv;
    kv.set("mode", mode_name(mode));
    kv.set("constants.hbar", format_double(constants.hbar));
    kv.set("constants.mass", format_double(constants.mass));
    kv.set("state.a", format_double(state_a));
    kv.set("state.b_mom", format_double(state_b_mom));
    kv.set("state.eps", format_double(state_eps));
    if (state_delta) kv.set("state.delta", format_double(*state_delta));
    if (!dx_values.empty()) {
        kv.set("schedule.dx", detail::join_doubles(dx_values));
        kv.set("schedule.b_scale", format_double(b_scale));
        kv.set("schedule.T", format_double(T));
    }
    if (!d_values.empty()) kv.set("measurement.D", detail::join_doubles(d_values));
    if (sigma) kv.set("measurement.sigma", format_double(*sigma));
    if (tau) kv.set("measurement.tau", format_double(*tau));
    if (t_c) kv.set("feedback.t_c", format_double(*t_c));
    if (t_c_over_tau) kv.set("feedback.t_c_over_tau", format_double(*t_c_over_tau));
    if (feedback_override) kv.set("feedback.override_consistency", "true");
    kv.set("ensemble.n_traj", std::to_string(n_traj));
    kv.set("ensemble.master_seed", std::to_string(master_seed));
    kv.set("ensemble.burn_in", std::to_string(burn_in));
    if (t_max > 0.0) {
        kv.set("run.t_max", format_double(t_max));
        kv.set("run.n_checkpoints", std::to_string(n_checkpoints));
    }
    kv.set("fit.residual_threshold", format_double(residual_threshold));
    if (mode == ExperimentMode::OracleValidation)
        kv.set("oracle.n_scenarios", std::to_string(n_scenarios));
    kv.set("output.dir", out_dir);
    {
        std::string fmt;
        for (std::size_t i = 0; i < formats.size(); ++i) {
            if (i) fmt += ", ";
            fmt += formats[i];
        }
        kv.set("output.formats", fmt);
    }
    if (dump_trajectories) kv.set("output.trajectories", "true");
    kv.set("workers", std::to_string(workers));
    return kv;
}

}  // namespace qpath
