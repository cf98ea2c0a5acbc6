#pragma once

namespace qpath {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qpath
