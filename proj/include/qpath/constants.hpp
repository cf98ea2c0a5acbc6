#pragma once

#include <cmath>
#include <string>

#include "qpath/errors.hpp"

namespace qpath {

// Physical constants. Natural units (hbar = m = 1) are the default; every
// formula in the library carries both factors explicitly.
struct Constants {
    double hbar = 1.0;
    double mass = 1.0;
};

inline void validate(const Constants& c) {
    if (!(c.hbar > 0.0) || !std::isfinite(c.hbar))
        throw ConfigError("constants.hbar must be finite and > 0");
    if (!(c.mass > 0.0) || !std::isfinite(c.mass))
        throw ConfigError("constants.mass must be finite and > 0");
}

}  // namespace qpath
