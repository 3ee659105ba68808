#pragma once

#include <numbers>

namespace rydfac {

// Configuration and output quantities are cyclic frequencies in MHz, times
// in microseconds and lengths in micrometres. Equations of motion run in
// angular units (rad/us).
inline constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr double to_angular(double mhz) noexcept { return two_pi * mhz; }
constexpr double to_cyclic(double rad_per_us) noexcept { return rad_per_us / two_pi; }

}  // namespace rydfac
