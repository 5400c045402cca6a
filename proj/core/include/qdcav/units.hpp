// Internal unit system: energies in ueV, times in ns, rates in 1/ns.
// All Table-style device inputs (ueV couplings, ns^-1 decay rates, K
// temperatures) are then O(1)-O(1e3) doubles.

#pragma once

namespace qdcav {

inline constexpr double hbar_ueV_ns = 0.6582119569;   // ueV * ns
inline constexpr double kB_ueV_per_K = 86.17333262;   // ueV / K

// SI constants, used only to reduce material parameters (eV, nm, m/s,
// kg/m^3) to the dimensionless phonon coupling prefactor.
inline constexpr double eV_to_J = 1.602176634e-19;
inline constexpr double hbar_SI = 1.054571817e-34;    // J * s

inline constexpr double meV = 1.0e3;                  // ueV per meV

// rate (1/ns) <-> linewidth (ueV)
inline constexpr double rate_to_energy(double per_ns) { return hbar_ueV_ns * per_ns; }
inline constexpr double energy_to_rate(double ueV) { return ueV / hbar_ueV_ns; }

} // namespace qdcav
