// Independent-boson-model physics of the exciton / LA-phonon coupling:
// superohmic spectral density with Gaussian cutoff, IBM phase function,
// ZPL weight, bulk emission spectrum and the thermally activated
// Markovian pure-dephasing rate.

#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qdcav/units.hpp"

namespace qdcav {

struct PhononBath {
    double deformation_eV{14.0};   // exciton deformation potential D = D_e + D_h (eV)
    double confinement_nm{5.0};    // carrier confinement length sigma (nm)
    double sound_speed_m_s{5110.0};   // longitudinal sound speed (m/s)
    double mass_density_kg_m3{5370.0};// mass density (kg/m^3)
    double temperature_K{0.0};     // lattice temperature (K)

    void validate() const;  // throws std::invalid_argument

    // phonon cutoff energy hbar*c_s/sigma (ueV)
    double cutoff_energy_ueV() const;

    // T = 0 Huang-Rhys-like exponent D^2/(4 pi^2 rho hbar c_s^3 sigma^2)
    double coupling_exponent_t0() const;

    // (1/hbar) J(w)/w^2 expressed per unit energy: alpha * eps * exp(-eps^2/2eps_c^2),
    // in 1/ueV with eps in ueV. This is the only combination the IBM integrals need.
    double coupling_density(double eps_ueV) const;
};

struct QDParams {
    double gamma0_per_ns{1.0};          // bulk radiative decay rate (1/ns)
    double dephasing_alpha_ueV{0.1};    // pure-dephasing prefactor (ueV)
    double dephasing_energy_ueV{1000.0};// maximally coupled phonon energy eps_p (ueV)

    void validate() const;
};

struct QuadratureOptions {
    double abs_tol{1.0e-8};       // absolute tolerance per point
    unsigned max_depth{15};       // adaptive Gauss-Kronrod subdivision depth
    double omega_max_factor{10.0};// integrate over (0, factor * c_s/sigma]
};

// J(omega) of the phonon bath, returned as an energy (ueV); omega in rad/ns.
double spectral_density(double omega_per_ns, const PhononBath& bath);

// Bose occupation at energy eps (ueV) and temperature T (K). Exactly 0 at T = 0;
// throws std::domain_error for eps = 0 at T > 0.
double bose_occupation(double eps_ueV, double temperature_K);

// gamma*(T) = alpha * n(eps_p) * (n(eps_p) + 1), in ueV.
double pure_dephasing_rate(const QDParams& qd, double temperature_K);

struct PhaseFunction {
    std::vector<double> tau_ns;
    std::vector<std::complex<double>> phi;  // phi(tau), dimensionless
    double phi_infinity{0.0};               // Re phi at |tau| -> inf
    double max_quad_error{0.0};             // worst reported quadrature error
};

// IBM phase function on a grid of time offsets (ns).
PhaseFunction phase_function(const PhononBath& bath, std::span<const double> tau_ns,
                             const QuadratureOptions& opt = {});

// Debye-Waller ZPL weight eta = exp(-int J/w^2 (2N+1) dw / hbar).
double zpl_fraction(const PhononBath& bath, const QuadratureOptions& opt = {});

struct SpectrumGrid {
    std::vector<double> energy_ueV;  // detuning from the ZPL; positive = blue side
    std::vector<double> intensity;   // spectral density (1/ueV), >= 0
};

struct SpectrumOptions {
    // the DFT is sensitive to point-to-point jitter of the adaptive phase
    // quadrature, so the spectrum path runs it much tighter than the 1e-8
    // scalar default
    QuadratureOptions quad{.abs_tol = 1.0e-11};
    double dt_ps{0.02};          // correlator sampling step
    double min_window_ps{40.0};
    double max_window_ps{400.0};
    double edge_tol{1.0e-4};     // required decay of the sideband correlator
};

// Sideband-only part of the normalized emission spectrum (integral = 1 - eta),
// from the Fourier transform of [exp(-phi) - exp(-phi_inf)] times the ZPL
// decay envelope. gamma_total in 1/ns, gamma_star in ueV.
SpectrumGrid sideband_spectrum(const PhononBath& bath, double gamma_total_per_ns,
                               double gamma_star_ueV, std::span<const double> energy_grid_ueV,
                               const SpectrumOptions& opt = {});

// Full normalized bulk spectrum: analytic Lorentzian ZPL of weight eta and
// FWHM hbar*gamma_total + gamma_star, plus the phonon sidebands.
SpectrumGrid bulk_spectrum(const PhononBath& bath, const QDParams& qd,
                           double gamma_total_per_ns, double gamma_star_ueV,
                           std::span<const double> energy_grid_ueV,
                           const SpectrumOptions& opt = {});

// Unit-area Lorentzian in energy, FWHM fwhm, centered at center (1/ueV).
double lorentzian(double eps_ueV, double center_ueV, double fwhm_ueV);

} // namespace qdcav
