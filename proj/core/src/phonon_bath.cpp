#include "qdcav/phonon_bath.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace qdcav {

namespace {

constexpr double pi = std::numbers::pi;

// Bose factor without the eps = 0 domain check, for quadrature nodes (eps > 0).
inline double bose_unchecked(double eps_ueV, double temperature_K) {
    if (temperature_K <= 0.0) return 0.0;
    return 1.0 / std::expm1(eps_ueV / (kB_ueV_per_K * temperature_K));
}

struct QuadResult {
    double value;
    double error;
};

template <typename F>
QuadResult integrate_gk(F&& f, double a, double b, const QuadratureOptions& opt) {
    using boost::math::quadrature::gauss_kronrod;
    double err = 0.0;
    double val = gauss_kronrod<double, 15>::integrate(std::forward<F>(f), a, b,
                                                      opt.max_depth, opt.abs_tol, &err);
    return {val, err};
}

} // namespace

void PhononBath::validate() const {
    if (!(deformation_eV > 0.0)) throw std::invalid_argument("PhononBath: deformation potential must be > 0");
    if (!(confinement_nm > 0.0)) throw std::invalid_argument("PhononBath: confinement length must be > 0");
    if (!(sound_speed_m_s > 0.0)) throw std::invalid_argument("PhononBath: sound speed must be > 0");
    if (!(mass_density_kg_m3 > 0.0)) throw std::invalid_argument("PhononBath: mass density must be > 0");
    if (!(temperature_K >= 0.0)) throw std::invalid_argument("PhononBath: temperature must be >= 0");
}

double PhononBath::cutoff_energy_ueV() const {
    const double sigma_m = confinement_nm * 1.0e-9;
    return hbar_SI * sound_speed_m_s / sigma_m / eV_to_J * 1.0e6;
}

double PhononBath::coupling_exponent_t0() const {
    const double d_J = deformation_eV * eV_to_J;
    const double sigma_m = confinement_nm * 1.0e-9;
    const double c = sound_speed_m_s;
    return d_J * d_J /
           (4.0 * pi * pi * mass_density_kg_m3 * hbar_SI * c * c * c * sigma_m * sigma_m);
}

double PhononBath::coupling_density(double eps_ueV) const {
    const double eps_c = cutoff_energy_ueV();
    const double alpha = coupling_exponent_t0() / (eps_c * eps_c);
    return alpha * eps_ueV * std::exp(-eps_ueV * eps_ueV / (2.0 * eps_c * eps_c));
}

double spectral_density(double omega_per_ns, const PhononBath& bath) {
    if (!(omega_per_ns >= 0.0)) throw std::invalid_argument("spectral_density: omega must be >= 0");
    const double eps = hbar_ueV_ns * omega_per_ns;
    return bath.coupling_density(eps) * eps * eps;  // ueV
}

double bose_occupation(double eps_ueV, double temperature_K) {
    if (!(temperature_K >= 0.0)) throw std::invalid_argument("bose_occupation: temperature must be >= 0");
    if (temperature_K == 0.0) {
        if (!(eps_ueV > 0.0)) throw std::domain_error("bose_occupation: energy must be > 0");
        return 0.0;
    }
    if (!(eps_ueV > 0.0)) throw std::domain_error("bose_occupation: divergent occupation at zero energy");
    return bose_unchecked(eps_ueV, temperature_K);
}

double pure_dephasing_rate(const QDParams& qd, double temperature_K) {
    qd.validate();
    if (temperature_K == 0.0) return 0.0;
    const double n = bose_occupation(qd.dephasing_energy_ueV, temperature_K);
    return qd.dephasing_alpha_ueV * n * (n + 1.0);
}

void QDParams::validate() const {
    if (!(gamma0_per_ns > 0.0)) throw std::invalid_argument("QDParams: gamma0 must be > 0");
    if (!(dephasing_alpha_ueV >= 0.0)) throw std::invalid_argument("QDParams: alpha must be >= 0");
    if (!(dephasing_energy_ueV > 0.0)) throw std::invalid_argument("QDParams: eps_p must be > 0");
}

namespace {

// Fixed composite Gauss-Legendre nodes shared by every tau sample. Per tau,
// the oscillatory kernels advance by a rotation recurrence, so the whole
// table costs O(n_nodes * n_tau) multiplies. Convergence is verified by
// doubling the panel count at probe offsets.
struct PhaseQuadGrid {
    std::vector<double> eps;
    std::vector<double> w_sym;   // GL weight * j(eps) * (2N+1)
    std::vector<double> w_asym;  // GL weight * j(eps)

    PhaseQuadGrid(const PhononBath& bath, double eps_max, double tau_max, int refine) {
        static constexpr double gl_x[8] = {
            0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
            0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
        static constexpr double gl_w[8] = {
            0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
            0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};
        // >= 1 panel per two kernel cycles at the largest offset
        const double cycles = eps_max * std::max(tau_max, 1.0e-12) / (2.0 * pi * hbar_ueV_ns);
        const auto n_panels =
            static_cast<std::size_t>(std::ceil(std::max(16.0, cycles / 2.0))) * (1u << refine);
        const double h = eps_max / static_cast<double>(n_panels);
        const double T = bath.temperature_K;
        eps.reserve(16 * n_panels);
        w_sym.reserve(16 * n_panels);
        w_asym.reserve(16 * n_panels);
        for (std::size_t p = 0; p < n_panels; ++p) {
            const double mid = (static_cast<double>(p) + 0.5) * h;
            for (int k = 0; k < 16; ++k) {
                const int j = k < 8 ? k : k - 8;
                const double x = k < 8 ? mid - 0.5 * h * gl_x[j] : mid + 0.5 * h * gl_x[j];
                const double gw = 0.5 * h * gl_w[j];
                const double jd = bath.coupling_density(x);
                eps.push_back(x);
                w_sym.push_back(gw * jd * (2.0 * bose_unchecked(x, T) + 1.0));
                w_asym.push_back(gw * jd);
            }
        }
    }

    std::complex<double> phi_at(double tau) const {
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < eps.size(); ++i) {
            const double s = std::sin(0.5 * eps[i] * tau / hbar_ueV_ns);
            re += w_sym[i] * 2.0 * s * s;
            im += w_asym[i] * std::sin(eps[i] * tau / hbar_ueV_ns);
        }
        return {re, im};
    }
};

} // namespace

PhaseFunction phase_function(const PhononBath& bath, std::span<const double> tau_ns,
                             const QuadratureOptions& opt) {
    bath.validate();
    const double eps_c = bath.cutoff_energy_ueV();
    const double eps_max = opt.omega_max_factor * eps_c;
    const double T = bath.temperature_K;

    PhaseFunction out;
    out.tau_ns.assign(tau_ns.begin(), tau_ns.end());
    out.phi.resize(tau_ns.size());

    {
        auto f = [&](double eps) {
            return bath.coupling_density(eps) * (2.0 * bose_unchecked(eps, T) + 1.0);
        };
        auto r = integrate_gk(f, 0.0, eps_max, opt);
        out.phi_infinity = r.value;
        out.max_quad_error = r.error;
    }

    double tau_max = 0.0;
    for (double t : tau_ns) tau_max = std::max(tau_max, std::abs(t));
    const PhaseQuadGrid grid(bath, eps_max, tau_max, 0);

    // uniform grids advance the kernels by per-node rotations
    bool uniform = tau_ns.size() >= 3 && tau_ns[0] == 0.0;
    const double dt = tau_ns.size() >= 2 ? tau_ns[1] - tau_ns[0] : 0.0;
    for (std::size_t k = 0; uniform && k + 1 < tau_ns.size(); ++k) {
        if (std::abs(tau_ns[k + 1] - tau_ns[k] - dt) > 1.0e-12 * std::max(1.0, std::abs(dt))) {
            uniform = false;
        }
    }

    if (uniform) {
        const std::size_t n_nodes = grid.eps.size();
        std::vector<std::complex<double>> rot(n_nodes), ker(n_nodes, {1.0, 0.0});
        for (std::size_t i = 0; i < n_nodes; ++i) {
            const double a = grid.eps[i] * dt / hbar_ueV_ns;
            rot[i] = {std::cos(a), std::sin(a)};
        }
        for (std::size_t k = 0; k < tau_ns.size(); ++k) {
            if (k > 0) {
                for (std::size_t i = 0; i < n_nodes; ++i) ker[i] *= rot[i];
            }
            double re = 0.0, im = 0.0;
            for (std::size_t i = 0; i < n_nodes; ++i) {
                re += grid.w_sym[i] * (1.0 - ker[i].real());
                im += grid.w_asym[i] * ker[i].imag();
            }
            out.phi[k] = {re, im};
        }
    } else {
        for (std::size_t k = 0; k < tau_ns.size(); ++k) {
            const double tau = tau_ns[k];
            auto v = grid.phi_at(std::abs(tau));
            out.phi[k] = (tau >= 0.0) ? v : std::conj(v);
        }
    }
    for (std::size_t k = 0; k < tau_ns.size(); ++k) {
        if (tau_ns[k] == 0.0) out.phi[k] = 0.0;
    }

    // convergence probe: doubled panel count at the worst offsets
    {
        const PhaseQuadGrid fine(bath, eps_max, tau_max, 1);
        const std::size_t probes = std::min<std::size_t>(8, tau_ns.size());
        for (std::size_t p = 1; p <= probes; ++p) {
            const std::size_t k = p * (tau_ns.size() - 1) / probes;
            const auto ref = fine.phi_at(std::abs(tau_ns[k]));
            const auto got = (tau_ns[k] >= 0.0) ? out.phi[k] : std::conj(out.phi[k]);
            out.max_quad_error = std::max(out.max_quad_error, std::abs(got - ref));
        }
    }
    if (out.max_quad_error > 1.0e-6) {
        throw std::runtime_error("phase_function: quadrature did not converge, worst residual " +
                                 std::to_string(out.max_quad_error));
    }
    return out;
}

double zpl_fraction(const PhononBath& bath, const QuadratureOptions& opt) {
    bath.validate();
    const double eps_max = opt.omega_max_factor * bath.cutoff_energy_ueV();
    const double T = bath.temperature_K;
    auto f = [&](double eps) {
        return bath.coupling_density(eps) * (2.0 * bose_unchecked(eps, T) + 1.0);
    };
    auto r = integrate_gk(f, 0.0, eps_max, opt);
    if (r.error > 1.0e-6) {
        throw std::runtime_error("zpl_fraction: quadrature did not converge, residual " +
                                 std::to_string(r.error));
    }
    return std::exp(-r.value);
}

double lorentzian(double eps_ueV, double center_ueV, double fwhm_ueV) {
    const double d = eps_ueV - center_ueV;
    const double h = 0.5 * fwhm_ueV;
    return (fwhm_ueV / (2.0 * pi)) / (d * d + h * h);
}

SpectrumGrid sideband_spectrum(const PhononBath& bath, double gamma_total_per_ns,
                               double gamma_star_ueV, std::span<const double> energy_grid_ueV,
                               const SpectrumOptions& opt) {
    bath.validate();
    if (!(gamma_total_per_ns > 0.0)) throw std::invalid_argument("sideband_spectrum: gamma_total must be > 0");

    const double tau_c = hbar_ueV_ns / bath.cutoff_energy_ueV();  // phonon correlation time (ns)
    const double dt = opt.dt_ps * 1.0e-3;
    const double gamma2 = 0.5 * gamma_total_per_ns + 0.5 * gamma_star_ueV / hbar_ueV_ns;

    double window = std::max(opt.min_window_ps * 1.0e-3, 20.0 * tau_c);

    std::vector<double> tau;
    std::vector<std::complex<double>> corr;
    double corr0 = 0.0;
    for (;;) {
        const auto n = static_cast<std::size_t>(std::ceil(window / dt)) + 1;
        tau.resize(n);
        for (std::size_t i = 0; i < n; ++i) tau[i] = static_cast<double>(i) * dt;
        const PhaseFunction ph = phase_function(bath, tau, opt.quad);
        const double floor_w = std::exp(-ph.phi_infinity);
        corr.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            corr[i] = (std::exp(-ph.phi[i]) - floor_w) * std::exp(-gamma2 * tau[i]);
        }
        corr0 = 1.0 - floor_w;  // = |corr(0)|
        const double edge = std::abs(corr.back());
        if (corr0 == 0.0 || edge <= opt.edge_tol * corr0) break;
        window *= 2.0;
        if (window > opt.max_window_ps * 1.0e-3) {
            throw std::runtime_error(
                "sideband_spectrum: correlator not decayed below edge tolerance within max window");
        }
    }

    SpectrumGrid s;
    s.energy_ueV.assign(energy_grid_ueV.begin(), energy_grid_ueV.end());
    s.intensity.resize(s.energy_ueV.size());
    const std::size_t n = tau.size();
    double peak = 0.0;
    for (std::size_t k = 0; k < s.energy_ueV.size(); ++k) {
        const double eps = s.energy_ueV[k];
        // trapezoid DFT; kernel advanced by recurrence
        const std::complex<double> step{std::cos(eps * dt / hbar_ueV_ns),
                                        -std::sin(eps * dt / hbar_ueV_ns)};
        std::complex<double> ker{1.0, 0.0};
        std::complex<double> acc = 0.5 * corr[0];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            ker *= step;
            acc += corr[i] * ker;
        }
        ker *= step;
        acc += 0.5 * corr[n - 1] * ker;
        s.intensity[k] = acc.real() * dt / (pi * hbar_ueV_ns);
        peak = std::max(peak, s.intensity[k]);
    }
    // Truncation ringing leaves the near-ZPL blue region a hair below zero
    // (the analytic ZPL term dominates there); anything materially negative
    // indicates a window/grid problem.
    for (double& v : s.intensity) {
        if (v < 0.0) {
            if (v < -(1.0e-3 * peak + 1.0e-15)) {
                throw std::runtime_error("sideband_spectrum: negative intensity beyond numerical floor");
            }
            v = 0.0;
        }
    }
    return s;
}

SpectrumGrid bulk_spectrum(const PhononBath& bath, const QDParams& qd,
                           double gamma_total_per_ns, double gamma_star_ueV,
                           std::span<const double> energy_grid_ueV,
                           const SpectrumOptions& opt) {
    qd.validate();
    const double fwhm = rate_to_energy(gamma_total_per_ns) + gamma_star_ueV;

    // the grid must resolve the ZPL around zero detuning
    double spacing_at_zero = 0.0;
    for (std::size_t i = 0; i + 1 < energy_grid_ueV.size(); ++i) {
        if (energy_grid_ueV[i] <= 0.0 && energy_grid_ueV[i + 1] >= 0.0) {
            spacing_at_zero = energy_grid_ueV[i + 1] - energy_grid_ueV[i];
            break;
        }
    }
    if (spacing_at_zero == 0.0 || spacing_at_zero > fwhm) {
        throw std::runtime_error("bulk_spectrum: energy grid does not resolve the ZPL FWHM");
    }

    SpectrumGrid s = sideband_spectrum(bath, gamma_total_per_ns, gamma_star_ueV,
                                       energy_grid_ueV, opt);
    const double eta = zpl_fraction(bath, opt.quad);
    for (std::size_t k = 0; k < s.energy_ueV.size(); ++k) {
        s.intensity[k] += eta * lorentzian(s.energy_ueV[k], 0.0, fwhm);
    }
    return s;
}

} // namespace qdcav
