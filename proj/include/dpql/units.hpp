#pragma once

#include <cmath>

// SI internally (kg, m, s, rad/s). Conversions live at the boundary.
namespace dpql::units {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

// CODATA 2018
inline constexpr double hbar = 1.054571817e-34;       // J s
inline constexpr double h_planck = 6.62607015e-34;    // J s
inline constexpr double elementary_charge = 1.602176634e-19; // C
inline constexpr double eps0 = 8.8541878128e-12;      // F/m
inline constexpr double coulomb_k = 1.0 / (4.0 * pi * eps0);
inline constexpr double k_boltzmann = 1.380649e-23;   // J/K
inline constexpr double c_light = 2.99792458e8;       // m/s
inline constexpr double amu = 1.66053906660e-27;      // kg
inline constexpr double debye = 3.33564e-30;          // C m
inline constexpr double electron_volt = 1.602176634e-19; // J
inline constexpr double bohr_magneton = 9.2740100783e-24; // J/T

// spectroscopy
inline constexpr double wavenumber_hz = c_light * 100.0;        // Hz per cm^-1
inline constexpr double wavenumber_joule = h_planck * wavenumber_hz;

// magnetic field: 1 G = 1e-4 T; Bohr magneton in Hz per Gauss
inline constexpr double gauss = 1.0e-4;
inline constexpr double bohr_magneton_hz_per_gauss = bohr_magneton / h_planck * gauss;

inline double mhz_to_rad(double f_mhz) { return two_pi * f_mhz * 1e6; }
inline double rad_to_mhz(double w) { return w / (two_pi * 1e6); }
inline double amu_to_kg(double m) { return m * amu; }
inline double debye_to_cm(double d) { return d * debye; }
inline double ev_to_joule(double e) { return e * electron_volt; }
inline double cm1_to_rad(double w_cm) { return two_pi * wavenumber_hz * w_cm; }
inline double cm1_to_joule(double w_cm) { return wavenumber_joule * w_cm; }

} // namespace dpql::units
