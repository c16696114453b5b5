#pragma once

#include <numbers>

namespace blochflow {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * pi;

// hc in keV*Angstrom and the electron rest energy in keV (CODATA).
inline constexpr double hc_kev_angstrom = 12.3984198;
inline constexpr double electron_rest_kev = 510.998950;

// hbar^2/(2 m0) in eV*Angstrom^2; divide by gamma_rel for the relativistic mass.
inline constexpr double hbar_sq_over_2m0_ev_angstrom2 = 3.80998212;

// h^2/(2 m0 e) in V*Angstrom^2: converts U_g [A^-2] to potential coefficients in volts.
inline constexpr double h_sq_over_2m0e_v_angstrom2 =
    hbar_sq_over_2m0_ev_angstrom2 * two_pi * two_pi;

inline constexpr const char* artifact_version = "1.0.0";

}  // namespace blochflow
