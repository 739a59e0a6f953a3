#pragma once

// Unit system used throughout the library:
//   field        MV/cm
//   polarization / sheet charge   uC/cm^2
//   thickness    nm
//   voltage      V
//   areal capacitance             uC/(cm^2 V)  (== uF/cm^2)
// Handy identity: 1 nm * 1 MV/cm = 0.1 V.

namespace mirrorbit {

inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kEps0FPerCm = 8.8541878128e-14;       // F/cm
// eps0 expressed as uC/cm^2 per MV/cm, so D[uC/cm^2] = kEps0Uc * eps_r * E[MV/cm]
inline constexpr double kEps0Uc = 8.8541878128e-2;
inline constexpr double kBoltzmannEv = 8.617333262e-5;  // eV/K
inline constexpr double kNmMvToVolt = 0.1;              // (nm * MV/cm) -> V

inline double thermal_voltage(double temp_k) { return kBoltzmannEv * temp_k; }

}  // namespace mirrorbit
