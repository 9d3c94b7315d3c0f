#pragma once

namespace pairsim {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

// CODATA 2018 exact / recommended values, SI.
inline constexpr double kHbar = 1.054571817e-34;            // J s
inline constexpr double kSpeedOfLight = 2.99792458e8;       // m / s
inline constexpr double kElementaryCharge = 1.602176634e-19;// C
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;// kg
inline constexpr double kElectronMassKg = 9.1093837015e-31; // kg

// Default ion species: 25Mg+.
inline constexpr double kMg25MassKg = 24.985837 * kAtomicMassUnit;

}  // namespace pairsim
