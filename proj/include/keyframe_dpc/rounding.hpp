#pragma once

#include <cmath>

namespace kfdpc {

/// Rounds to the nearest integer with halves going up (towards +inf).
inline double round_half_up(double x) { return std::floor(x + 0.5); }

}  // namespace kfdpc
