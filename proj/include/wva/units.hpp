#pragma once

#include <numbers>

// Canonical units: frequency in THz, time in fs, wavelength in nm, arm lengths in mm.
namespace wva::units {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kLn2 = std::numbers::ln2;

// Speed of light in nm*THz (equivalently nm/ps).
inline constexpr double kSpeedOfLight = 299792.458;

// THz * fs = 1e-3. Every product of a frequency and a time goes through this.
inline constexpr double kThzFs = 1e-3;

inline constexpr double kNmPerMm = 1e6;
inline constexpr double kFsPerPs = 1e3;
inline constexpr double kFsPerAs = 1e-3;

// Phase 2*pi*nu*T for nu in THz and T in fs.
constexpr double phase(double nu_thz, double t_fs) { return 2.0 * kPi * nu_thz * t_fs * kThzFs; }

}  // namespace wva::units
