#pragma once

#include <cmath>
#include <numbers>

namespace gfmodes {

// CODATA 2018
namespace codata {
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double speed_of_light = 299792458.0;  // m / s
inline constexpr double atomic_mass = 1.66053906660e-27; // kg
inline constexpr double angstrom = 1e-10;              // m
inline constexpr double attojoule = 1e-18;             // J
} // namespace codata

enum class UnitMode { Natural, Spectroscopic };

/// Wavenumber in cm^-1 of an oscillator with lambda = 1 aJ A^-2 amu^-1.
inline double wavenumber_per_sqrt_lambda()
{
    const double omega = std::sqrt(codata::attojoule
        / (codata::angstrom * codata::angstrom * codata::atomic_mass));
    return omega / (2.0 * std::numbers::pi * codata::speed_of_light * 100.0);
}

/// hbar / (4 pi c) in amu A^2 cm^-1; rotational constant = kappa / I.
inline constexpr double rotational_kappa()
{
    return codata::hbar / (4.0 * std::numbers::pi * codata::speed_of_light * 100.0)
        / (codata::atomic_mass * codata::angstrom * codata::angstrom);
}

} // namespace gfmodes
