#pragma once

// Path length at varying resolution and Hausdorff-dimension extraction by
// log-log regression, for analytic and sampled paths alike.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qpath/constants.hpp"
#include "qpath/errors.hpp"
#include "qpath/selective.hpp"

namespace qpath {

// Resolutions dx (decreasing) swept at fixed dimensionless scale parameter
//
//   b_scale = hbar t / (2 m dx^2),
//
// so each resolution implies the recording interval t = 2 m b_scale dx^2 / hbar.
struct ResolutionSchedule {
    std::vector<double> dx_values;  // strictly decreasing
    double b_scale = 0.5;
    double T = 1.0;  // total duration

    double time_for(double dx, const Constants& c) const {
        return 2.0 * c.mass * b_scale * dx * dx / c.hbar;
    }

    static ResolutionSchedule log_spaced(double dx_max, double dx_min, std::size_t n,
                                         double b_scale, double T) {
        if (!(dx_min > 0.0) || !(dx_max > dx_min) || n < 2)
            throw ConfigError("schedule: need dx_max > dx_min > 0 and n >= 2");
        ResolutionSchedule s;
        s.b_scale = b_scale;
        s.T = T;
        const double step = (std::log(dx_min) - std::log(dx_max)) / double(n - 1);
        for (std::size_t i = 0; i < n; ++i)
            s.dx_values.push_back(std::exp(std::log(dx_max) + double(i) * step));
        return s;
    }
};

inline void validate(const ResolutionSchedule& s, const Constants& c) {
    if (s.dx_values.size() < 2) throw ConfigError("schedule needs at least 2 resolutions");
    if (!(s.b_scale > 0.0)) throw ConfigError("schedule b_scale must be > 0");
    if (!(s.T > 0.0)) throw ConfigError("schedule T must be > 0");
    for (std::size_t i = 0; i < s.dx_values.size(); ++i) {
        if (!(s.dx_values[i] > 0.0)) throw ConfigError("schedule dx values must be > 0");
        if (i > 0 && !(s.dx_values[i] < s.dx_values[i - 1]))
            throw ConfigError("schedule dx values must be strictly decreasing");
    }
    if (s.time_for(s.dx_values.front(), c) > s.T * (1.0 + 1e-12))
        throw ConfigError("schedule: recording interval t(dx) exceeds total duration T");
}

// Sampled path length: sum of absolute increments of recorded outcomes.
inline double path_length_outcomes(const std::vector<double>& outcomes) {
    if (outcomes.size() < 2)
        throw std::invalid_argument("path length needs at least 2 outcomes");
    double l = 0.0;
    for (std::size_t i = 1; i < outcomes.size(); ++i)
        l += std::abs(outcomes[i] - outcomes[i - 1]);
    return l;
}

inline double path_length_sampled(const TrajectoryRecord& rec) {
    return path_length_outcomes(rec.outcomes);
}

// Resolution-compensated Hausdorff length l * dx^(d-1).
inline double hausdorff_length(double l, double dx, double d) {
    if (!(l >= 0.0)) throw std::invalid_argument("hausdorff_length: l must be >= 0");
    if (!(dx > 0.0)) throw std::invalid_argument("hausdorff_length: dx must be > 0");
    return l * std::pow(dx, d - 1.0);
}

struct DimensionFit {
    double d = 1.0;          // 1 - slope
    double slope = 0.0;      // d log l / d log dx
    double intercept = 0.0;
    double residual = 0.0;   // rms residual of the log-log fit
    std::vector<std::pair<double, double>> local_d;  // (geometric-mean dx, local d)
};

// Ordinary least squares of log l against log dx; d = 1 - slope. local_d[i]
// is the two-point estimate between adjacent resolutions.
inline DimensionFit fit_dimension(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::invalid_argument("fit_dimension needs >= 3 points");
    const std::size_t n = points.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(points[i].first > 0.0) || !(points[i].second > 0.0))
            throw std::invalid_argument("fit_dimension: dx and l must be > 0");
        lx[i] = std::log(points[i].first);
        ly[i] = std::log(points[i].second);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0))
        throw std::invalid_argument("fit_dimension: degenerate schedule (all dx equal)");

    DimensionFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.d = 1.0 - fit.slope;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - fit.intercept - fit.slope * lx[i];
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / double(n));
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double local_slope = (ly[i + 1] - ly[i]) / (lx[i + 1] - lx[i]);
        fit.local_d.emplace_back(std::sqrt(points[i].first * points[i + 1].first),
                                 1.0 - local_slope);
    }
    return fit;
}

}  // namespace qpath
