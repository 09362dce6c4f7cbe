#pragma once

namespace qdvb {

// Everything runs in units of the normalization frequency gamma_n = 100 ueV
// (hbar = 1). Temperatures stay in Kelvin and convert through k_B below.
inline constexpr double kGammaN_ueV = 100.0;

// k_B = 86.17 ueV/K expressed in gamma_n per Kelvin.
inline constexpr double kBoltzmann_gn_per_K = 0.8617;

inline double thermal_energy_gn(double temperature_K) {
  return kBoltzmann_gn_per_K * temperature_K;
}

}  // namespace qdvb
