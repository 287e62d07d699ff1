#pragma once

#include <numbers>

namespace thermodeco::constants {

// CODATA 2018, exact where the SI fixes them.
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double k_B = 1.380649e-23;            // J/K
inline constexpr double c = 299792458.0;               // m/s
inline constexpr double amu = 1.66053906660e-27;       // kg
inline constexpr double pi = std::numbers::pi;

}  // namespace thermodeco::constants
