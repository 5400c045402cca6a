#include "qdcav/cavity.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qdcav {

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return v;
}

// trapezoid of psb * unit-area Lorentzian centered at `center`
double overlap(const SpectrumGrid& psb, double center_ueV, double kappa_ueV) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < psb.energy_ueV.size(); ++i) {
        const double f0 = psb.intensity[i] * lorentzian(psb.energy_ueV[i], center_ueV, kappa_ueV);
        const double f1 = psb.intensity[i + 1] * lorentzian(psb.energy_ueV[i + 1], center_ueV, kappa_ueV);
        acc += 0.5 * (f0 + f1) * (psb.energy_ueV[i + 1] - psb.energy_ueV[i]);
    }
    return acc;
}

double purcell_rate_form(double g_ueV, double kappa_ueV, double hg0_ueV, double gamma_star_ueV,
                         double delta_ueV) {
    const double den = kappa_ueV + hg0_ueV + gamma_star_ueV;
    const double lor = 1.0 / (1.0 + (2.0 * delta_ueV / den) * (2.0 * delta_ueV / den));
    return 4.0 * g_ueV * g_ueV / (hg0_ueV * den) * lor;
}

} // namespace

void CavityParams::validate() const {
    if (!(g_ueV >= 0.0)) throw std::invalid_argument("CavityParams: g must be >= 0");
    if (!(kappa_ueV > 0.0)) throw std::invalid_argument("CavityParams: kappa must be > 0");
}

double CavityParams::nominal_purcell(double gamma0_per_ns) const {
    return 4.0 * g_ueV * g_ueV / (kappa_ueV * rate_to_energy(gamma0_per_ns));
}

double effective_purcell_no_phonon(const CavityParams& cav, const QDParams& qd,
                                   double gamma_star_ueV) {
    cav.validate();
    qd.validate();
    return purcell_rate_form(cav.g_ueV, cav.kappa_ueV, rate_to_energy(qd.gamma0_per_ns),
                             gamma_star_ueV, cav.delta_ueV);
}

EmissionBudget effective_purcell_with_psb(const CavityParams& cav, const QDParams& qd,
                                          double eta_zpl, const SpectrumGrid& psb,
                                          double gamma_star_ueV) {
    cav.validate();
    qd.validate();
    const double hg0 = rate_to_energy(qd.gamma0_per_ns);
    const double g0 = qd.gamma0_per_ns;

    EmissionBudget b;
    b.bad_cavity_warning = cav.strong_coupling();

    if (!cav.split_modes) {
        // single mode at detuning delta; 2 pi g^2 S_cav(w_cav) = 4 g^2 / kappa
        const double F_zpl = eta_zpl * purcell_rate_form(cav.g_ueV, cav.kappa_ueV, hg0,
                                                         gamma_star_ueV, cav.delta_ueV);
        const double ov = overlap(psb, -cav.delta_ueV, cav.kappa_ueV);
        const double F_psb = 2.0 * pi * cav.g_ueV * cav.g_ueV / hg0 * ov;
        b.F_eff = F_zpl + F_psb;
        b.F_channel_zpl = F_zpl;
        b.F_channel_psb = F_psb;
        b.eta_zpl_cav = b.eta_zpl_channel =
            (b.F_eff > 0.0) ? F_zpl / b.F_eff : eta_zpl;
        b.beta = b.F_eff / (b.F_eff + 1.0);
        b.gamma_loss_per_ns = g0;
        b.gamma_loss_solver_per_ns = g0 + F_psb * g0;
        b.g_solver_ueV = cav.g_ueV;
        b.delta_solver_ueV = cav.delta_ueV;
        return b;
    }

    // two modes, each coupled with g/sqrt(2); QD at delta from the E mode,
    // the monitored M mode offset by delta_em from E
    const double g2h = 0.5 * cav.g_ueV * cav.g_ueV;
    const double gM = cav.g_ueV / std::sqrt(2.0);
    const double delta_E = cav.delta_ueV;
    const double delta_M = cav.delta_ueV - cav.delta_em_ueV;  // omega_QD - omega_M

    const double FE_zpl = eta_zpl * purcell_rate_form(gM, cav.kappa_ueV, hg0, gamma_star_ueV, delta_E);
    const double FM_zpl = eta_zpl * purcell_rate_form(gM, cav.kappa_ueV, hg0, gamma_star_ueV, delta_M);
    // mode centers relative to the QD: E at -delta_E, M at -delta_M
    const double ovE = overlap(psb, -delta_E, cav.kappa_ueV);
    const double ovM = overlap(psb, -delta_M, cav.kappa_ueV);
    const double FE_psb = 2.0 * pi * g2h / hg0 * ovE;
    const double FM_psb = 2.0 * pi * g2h / hg0 * ovM;

    b.F_eff = FE_zpl + FM_zpl + FE_psb + FM_psb;
    b.F_channel_zpl = FM_zpl;
    b.F_channel_psb = FM_psb;
    const double zpl_tot = FE_zpl + FM_zpl;
    b.eta_zpl_cav = (b.F_eff > 0.0) ? zpl_tot / b.F_eff : eta_zpl;
    const double chan = FM_zpl + FM_psb;
    b.eta_zpl_channel = (chan > 0.0) ? FM_zpl / chan : eta_zpl;
    b.beta = chan / (b.F_eff + 1.0);
    b.gamma_loss_per_ns = g0 + (FE_zpl + FE_psb) * g0;   // bulk decay + E-mode channels
    b.gamma_loss_solver_per_ns = b.gamma_loss_per_ns + FM_psb * g0;
    b.g_solver_ueV = gM;
    b.delta_solver_ueV = delta_M;
    return b;
}

EmissionBudget effective_purcell_with_psb(const CavityParams& cav, const QDParams& qd,
                                          const PhononBath& bath, double gamma_star_ueV,
                                          const BudgetOptions& opt) {
    bath.validate();
    const double eta = zpl_fraction(bath, opt.spectrum.quad);
    const auto grid = linspace(-opt.psb_window_ueV, opt.psb_window_ueV, opt.psb_points);
    const SpectrumGrid psb =
        sideband_spectrum(bath, qd.gamma0_per_ns, gamma_star_ueV, grid, opt.spectrum);
    return effective_purcell_with_psb(cav, qd, eta, psb, gamma_star_ueV);
}

double loss_rate_with_mode_splitting(const CavityParams& cav, const QDParams& qd,
                                     const PhononBath& bath, double gamma_star_ueV,
                                     const BudgetOptions& opt) {
    if (!cav.split_modes) {
        throw std::invalid_argument("loss_rate_with_mode_splitting: split_modes must be set");
    }
    return effective_purcell_with_psb(cav, qd, bath, gamma_star_ueV, opt).gamma_loss_per_ns;
}

} // namespace qdcav
