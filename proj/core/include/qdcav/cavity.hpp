// QD-microcavity emission budget: effective Purcell factors with
// phonon-sideband corrections, the crossed-polarization two-mode
// configuration, and the Markovian loss rates fed to the ZPL solver.

#pragma once

#include <span>

#include "qdcav/phonon_bath.hpp"

namespace qdcav {

struct CavityParams {
    double g_ueV{0.0};        // QD-cavity coupling strength (ueV)
    double kappa_ueV{90.0};   // cavity linewidth FWHM (ueV)
    double delta_ueV{0.0};    // omega_QD - omega_cav (ueV); for split modes, QD vs E mode
    double delta_em_ueV{0.0}; // mode splitting omega_M - omega_E (ueV)
    bool split_modes{false};  // crossed-polarization two-mode configuration

    void validate() const;

    // 4 g^2 / (kappa hbar gamma0)
    double nominal_purcell(double gamma0_per_ns) const;

    // kappa < 4g: outside the bad-cavity validity of the rate formulas
    bool strong_coupling() const { return kappa_ueV < 4.0 * g_ueV; }
};

// Rate-formula Purcell factor F = 4g^2 / (hbar gamma0 (kappa + hbar gamma0 + gamma*))
// times the detuning Lorentzian. Valid in the bad-cavity regime; see
// CavityParams::strong_coupling() / EmissionBudget::bad_cavity_warning.
double effective_purcell_no_phonon(const CavityParams& cav, const QDParams& qd,
                                   double gamma_star_ueV);

struct EmissionBudget {
    double F_eff{0.0};          // total effective Purcell factor (both modes when split)
    double beta{0.0};           // fraction of total emission into the monitored cavity channel
    double eta_zpl_cav{1.0};    // ZPL fraction of all cavity-collected emission
    double eta_zpl_channel{1.0};// ZPL fraction of the monitored channel only
    double F_channel_zpl{0.0};  // monitored-channel ZPL Purcell contribution
    double F_channel_psb{0.0};  // monitored-channel sideband Purcell contribution
    double gamma_loss_per_ns{0.0};        // non-collected Markovian decay rate
    double gamma_loss_solver_per_ns{0.0}; // gamma_loss + monitored-channel PSB drain
    double g_solver_ueV{0.0};   // coupling of the explicit solver mode (g, or g/sqrt 2)
    double delta_solver_ueV{0.0};
    bool bad_cavity_warning{false};  // kappa < 4g
};

struct BudgetOptions {
    double psb_window_ueV{4000.0};
    std::size_t psb_points{4001};
    SpectrumOptions spectrum{};
};

// Sideband-corrected emission budget (single-mode or two-mode per
// cav.split_modes). The sideband density is the bulk one, normalized to
// 1 - eta_zpl; each cavity mode samples it through its unit-area Lorentzian.
EmissionBudget effective_purcell_with_psb(const CavityParams& cav, const QDParams& qd,
                                          const PhononBath& bath, double gamma_star_ueV,
                                          const BudgetOptions& opt = {});

// As effective_purcell_with_psb but with a precomputed sideband density
// (bulk normalization) to share across sweep points at fixed temperature.
EmissionBudget effective_purcell_with_psb(const CavityParams& cav, const QDParams& qd,
                                          double eta_zpl, const SpectrumGrid& psb,
                                          double gamma_star_ueV);

// Uncollected Markovian rate of the two-mode configuration: bulk decay plus
// E-mode ZPL Purcell plus E-mode sideband emission (1/ns). Requires
// cav.split_modes; this rate feeds the Lindblad solver whose explicit mode
// is the M mode at detuning delta_em with coupling g/sqrt 2.
double loss_rate_with_mode_splitting(const CavityParams& cav, const QDParams& qd,
                                     const PhononBath& bath, double gamma_star_ueV,
                                     const BudgetOptions& opt = {});

} // namespace qdcav
