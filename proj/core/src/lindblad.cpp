#include "qdcav/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

namespace qdcav {

namespace {

namespace ode = boost::numeric::odeint;

// 9 density-matrix entries plus two cumulative flux integrals
using State = std::array<complex, 11>;

struct LindbladRhs {
    const LindbladGenerator* gen;

    void operator()(const State& x, State& dxdt, double /*t*/) const {
        std::array<complex, 9> m;
        std::copy_n(x.begin(), 9, m.begin());
        std::array<complex, 9> out;
        gen->apply(m, out);
        std::copy_n(out.begin(), 9, dxdt.begin());
        dxdt[9] = gen->kappa_rate * x[4];
        dxdt[10] = gen->gamma_loss * x[0];
    }
};

template <typename Record>
void integrate_grid(const LindbladGenerator& gen, State& x, std::span<const double> times,
                    const SolverOptions& opt, Record&& record) {
    auto stepper = ode::make_controlled(opt.abs_tol, opt.rel_tol,
                                        ode::runge_kutta_dopri5<State>());
    LindbladRhs rhs{&gen};
    double t = times.front();
    record(0, x);
    const double dt_floor = std::max(1.0e-15, 1.0e-14 * times.back());
    double dt = (times[1] - times[0]);
    std::size_t steps = 0;
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double t_end = times[k];
        while (t < t_end) {
            if (++steps > opt.max_steps) {
                throw std::runtime_error(
                    "evolve_density_matrix: step budget exhausted (stiff parameters)");
            }
            bool clipped = false;
            if (t + dt >= t_end) {
                dt = t_end - t;
                clipped = true;
            }
            const double dt_try = dt;
            if (stepper.try_step(rhs, x, t, dt) == ode::fail) {
                if (dt < dt_floor) {
                    throw std::runtime_error(
                        "evolve_density_matrix: step-size underflow (stiff parameters)");
                }
            } else if (clipped) {
                dt = std::max(dt, dt_try);  // don't let grid clipping shrink future steps
            }
        }
        record(k, x);
    }
}

Eigen::Matrix<complex, 4, 4> density_sector(const LindbladGenerator& g) {
    // closed sector (rho_ee, rho_cc, rho_ec, rho_ce) of the master equation
    const complex i{0.0, 1.0};
    Eigen::Matrix<complex, 4, 4> a;
    const double coh = 0.5 * (g.kappa_rate + g.gamma_loss + g.dephasing_rate);
    a << complex{-g.gamma_loss, 0.0}, 0.0, i * g.g_rad, -i * g.g_rad,
         0.0, complex{-g.kappa_rate, 0.0}, -i * g.g_rad, i * g.g_rad,
         i * g.g_rad, -i * g.g_rad, complex{-coh, -g.delta_rad}, 0.0,
         -i * g.g_rad, i * g.g_rad, 0.0, complex{-coh, g.delta_rad};
    return a;
}

Eigen::Matrix<complex, 2, 2> regression_sector(const LindbladGenerator& g) {
    // coherence-to-ground sector (chi_{g0,e0}, chi_{g0,g1}) driving G(t,tau)
    const complex i{0.0, 1.0};
    Eigen::Matrix<complex, 2, 2> m;
    m << complex{-0.5 * (g.gamma_loss + g.dephasing_rate), g.delta_rad}, i * g.g_rad,
         i * g.g_rad, complex{-0.5 * g.kappa_rate, 0.0};
    return m;
}

} // namespace

SingleExcitationState SingleExcitationState::excited() {
    SingleExcitationState s;
    s.rho[0] = 1.0;
    return s;
}

double SingleExcitationState::min_eigenvalue() const {
    Eigen::Matrix3cd m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = rho[static_cast<std::size_t>(r * 3 + c)];
    Eigen::Matrix3cd h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

void LindbladGenerator::apply(const std::array<complex, 9>& m, std::array<complex, 9>& out) const {
    const complex i{0.0, 1.0};
    const double d0 = gamma_loss + dephasing_rate;  // row/col damping of |e,0>
    const double d1 = kappa_rate;                   // |g,1>
    const double damp[3] = {d0, d1, 0.0};

    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            const auto idx = static_cast<std::size_t>(r * 3 + c);
            complex hm{0.0, 0.0};
            if (r == 0) hm = delta_rad * m[static_cast<std::size_t>(c)] + g_rad * m[static_cast<std::size_t>(3 + c)];
            if (r == 1) hm = g_rad * m[static_cast<std::size_t>(c)];
            complex mh{0.0, 0.0};
            if (c == 0) mh = delta_rad * m[static_cast<std::size_t>(3 * r)] + g_rad * m[static_cast<std::size_t>(3 * r + 1)];
            if (c == 1) mh = g_rad * m[static_cast<std::size_t>(3 * r)];
            out[idx] = -i * (hm - mh) - 0.5 * (damp[r] + damp[c]) * m[idx];
        }
    }
    out[0] += dephasing_rate * m[0];          // projector refill on |e,0><e,0|
    out[8] += kappa_rate * m[4] + gamma_loss * m[0];
}

double LindbladGenerator::slowest_decay() const {
    std::vector<complex> lams;
    {
        Eigen::ComplexEigenSolver<Eigen::Matrix<complex, 4, 4>> es(density_sector(*this), false);
        for (int k = 0; k < 4; ++k) lams.push_back(es.eigenvalues()(k));
    }
    {
        Eigen::ComplexEigenSolver<Eigen::Matrix<complex, 2, 2>> es(regression_sector(*this), false);
        for (int k = 0; k < 2; ++k) lams.push_back(es.eigenvalues()(k));
    }
    double fastest = 0.0;
    for (const auto& l : lams) fastest = std::max(fastest, -l.real());
    double slowest = fastest;
    for (const auto& l : lams) {
        const double d = -l.real();
        if (d > 1.0e-12 * fastest && d < slowest) slowest = d;
    }
    if (!(slowest > 0.0)) {
        throw std::invalid_argument("LindbladGenerator: no decaying mode (all rates zero?)");
    }
    return slowest;
}

double LindbladGenerator::fastest_oscillation() const {
    Eigen::ComplexEigenSolver<Eigen::Matrix<complex, 4, 4>> es(density_sector(*this), false);
    double w = 0.0;
    for (int k = 0; k < 4; ++k) w = std::max(w, std::abs(es.eigenvalues()(k).imag()));
    return w;
}

LindbladGenerator make_generator(double g_ueV, double delta_ueV, double kappa_ueV,
                                 double gamma_loss_per_ns, double gamma_star_ueV) {
    if (!(gamma_loss_per_ns >= 0.0) || !(gamma_star_ueV >= 0.0) || !(kappa_ueV >= 0.0)) {
        throw std::invalid_argument("make_generator: rates must be >= 0");
    }
    LindbladGenerator g;
    g.g_rad = energy_to_rate(g_ueV);
    g.delta_rad = energy_to_rate(delta_ueV);
    g.kappa_rate = energy_to_rate(kappa_ueV);
    g.gamma_loss = gamma_loss_per_ns;
    g.dephasing_rate = energy_to_rate(gamma_star_ueV);
    return g;
}

std::vector<double> default_time_grid(const LindbladGenerator& gen, const SolverOptions& opt) {
    const double span = opt.span_factor / gen.slowest_decay();
    // resolve coherent oscillations with >= 10 points per period
    const double w = gen.fastest_oscillation();
    std::size_t n = opt.n_points;
    if (w > 0.0) {
        const auto need = static_cast<std::size_t>(std::ceil(10.0 * span * w / (2.0 * std::numbers::pi)));
        n = std::max(n, need);
    }
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = span * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return t;
}

Trajectory evolve_density_matrix(const LindbladGenerator& gen, std::span<const double> t_grid,
                                 const SolverOptions& opt) {
    if (t_grid.size() < 2 || t_grid.front() != 0.0) {
        throw std::invalid_argument("evolve_density_matrix: grid must start at 0 with >= 2 points");
    }
    for (std::size_t i = 0; i + 1 < t_grid.size(); ++i) {
        if (!(t_grid[i + 1] > t_grid[i])) {
            throw std::invalid_argument("evolve_density_matrix: grid must be strictly increasing");
        }
    }

    Trajectory traj;
    traj.t_ns.assign(t_grid.begin(), t_grid.end());
    traj.states.resize(t_grid.size());
    traj.cavity_flux.resize(t_grid.size());
    traj.loss_flux.resize(t_grid.size());

    State x{};
    x[0] = 1.0;  // |e,0><e,0|

    integrate_grid(gen, x, t_grid, opt, [&](std::size_t k, const State& s) {
        SingleExcitationState st;
        std::copy_n(s.begin(), 9, st.rho.begin());
        if (opt.check_state) {
            if (std::abs(st.trace() - 1.0) > 1.0e-9) {
                throw std::runtime_error("evolve_density_matrix: trace not preserved to 1e-9");
            }
            if (st.min_eigenvalue() < -1.0e-10) {
                throw std::runtime_error("evolve_density_matrix: density matrix lost positivity");
            }
        }
        traj.states[k] = st;
        traj.cavity_flux[k] = s[9].real();
        traj.loss_flux[k] = s[10].real();
    });
    return traj;
}

TwoTimeCorrelator two_time_correlator(const Trajectory& traj, const LindbladGenerator& gen,
                                      CorrelatorKind kind, const SolverOptions& opt) {
    const std::size_t full = traj.t_ns.size();
    if (full < 3 || full % 2 == 0) {
        throw std::invalid_argument("two_time_correlator: trajectory must have odd length >= 3 (grid over [0, 2 t_max])");
    }
    const double h = traj.t_ns[1] - traj.t_ns[0];
    for (std::size_t i = 0; i + 1 < full; ++i) {
        if (std::abs(traj.t_ns[i + 1] - traj.t_ns[i] - h) > 1.0e-9 * h) {
            throw std::invalid_argument("two_time_correlator: trajectory grid must be uniform");
        }
    }
    const std::size_t n = (full + 1) / 2;

    TwoTimeCorrelator corr;
    corr.kind = kind;
    corr.t_ns.assign(traj.t_ns.begin(), traj.t_ns.begin() + static_cast<std::ptrdiff_t>(n));
    corr.tau_ns = corr.t_ns;
    corr.values.assign(n * n, complex{0.0, 0.0});
    corr.population.resize(full);
    for (std::size_t k = 0; k < full; ++k) {
        corr.population[k] = (kind == CorrelatorKind::cavity_field)
                                 ? traj.states[k].cavity_population()
                                 : traj.states[k].excited_population();
    }

    const double pop_max = *std::max_element(corr.population.begin(), corr.population.end());
    if (pop_max == 0.0) {
        return corr;  // channel never populated; G is identically zero
    }
    if (corr.population.back() > 1.0e-4 * pop_max) {
        throw std::runtime_error("two_time_correlator: grid span too short, population not decayed to 1e-4");
    }

    // operator-conditioned initial state O rho(t): row |g,0><.| filled from the
    // row of rho selected by the annihilator (a -> |g,1>, sigma- -> |e,0>)
    const std::size_t src_row = (kind == CorrelatorKind::cavity_field) ? 1 : 0;
    const std::size_t readout = (kind == CorrelatorKind::cavity_field) ? 7 : 6;  // <2|chi|1> or <2|chi|0>

    SolverOptions tau_opt = opt;
    tau_opt.check_state = false;  // chi is not a density matrix

    std::vector<double> tau_grid = corr.tau_ns;
    for (std::size_t i = 0; i < n; ++i) {
        State x{};
        for (std::size_t c = 0; c < 3; ++c) x[6 + c] = traj.states[i].rho[src_row * 3 + c];
        integrate_grid(gen, x, tau_grid, tau_opt, [&](std::size_t j, const State& s) {
            corr.values[i * n + j] = s[readout];
        });
    }
    return corr;
}

double indistinguishability_from_correlator(const TwoTimeCorrelator& corr) {
    const std::size_t n = corr.tau_ns.size();
    if (n < 2 || corr.values.size() != n * n) {
        throw std::invalid_argument("indistinguishability_from_correlator: bad correlator grids");
    }
    auto wt = [n](std::size_t k) { return (k == 0 || k == n - 1) ? 0.5 : 1.0; };
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double w = wt(i) * wt(j);
            num += w * std::norm(corr.values[i * n + j]);
            den += w * corr.population[i] * corr.population[i + j];
        }
    }
    if (!(den > 0.0)) {
        throw std::runtime_error("indistinguishability_from_correlator: vanishing population normalization");
    }
    return num / den;
}

double zpl_indistinguishability_markov(double gamma_per_ns, double gamma_star_ueV) {
    const double hg = rate_to_energy(gamma_per_ns);
    return hg / (hg + gamma_star_ueV);
}

namespace {

std::vector<double> doubled_grid(const std::vector<double>& half) {
    const std::size_t n = half.size();
    std::vector<double> t(2 * n - 1);
    const double h = half[1] - half[0];
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = h * static_cast<double>(i);
    return t;
}

double qrt_pipeline(const LindbladGenerator& gen, CorrelatorKind kind, const SolverOptions& opt) {
    const auto half = default_time_grid(gen, opt);
    const auto grid = doubled_grid(half);
    const Trajectory traj = evolve_density_matrix(gen, grid, opt);
    const TwoTimeCorrelator corr = two_time_correlator(traj, gen, kind, opt);
    return indistinguishability_from_correlator(corr);
}

} // namespace

FullIndistinguishability full_spectrum_indistinguishability(const CavityParams& cav,
                                                            const QDParams& qd,
                                                            double eta_zpl,
                                                            const SpectrumGrid& psb,
                                                            double gamma_star_ueV,
                                                            const SolverOptions& solver) {
    qd.validate();
    FullIndistinguishability r;
    r.gamma_star_ueV = gamma_star_ueV;
    r.eta_zpl_bulk = eta_zpl;

    if (cav.g_ueV == 0.0) {
        // bulk limit: no cavity, all emission collected; dipole correlator
        const auto gen = make_generator(0.0, 0.0, 0.0, qd.gamma0_per_ns, gamma_star_ueV);
        r.I_zpl = qrt_pipeline(gen, CorrelatorKind::emitter_dipole, solver);
        r.eta_zpl_cav = eta_zpl;
        r.I_full = eta_zpl * eta_zpl * r.I_zpl;
        return r;
    }

    const EmissionBudget b = effective_purcell_with_psb(cav, qd, eta_zpl, psb, gamma_star_ueV);
    r.F_eff = b.F_eff;
    r.beta = b.beta;
    r.eta_zpl_cav = b.eta_zpl_channel;
    r.bad_cavity_warning = b.bad_cavity_warning;

    // ZPL sector: polaron-renormalized coupling sqrt(eta) g, sidebands as loss
    const double g_zpl = std::sqrt(eta_zpl) * b.g_solver_ueV;
    const auto gen = make_generator(g_zpl, b.delta_solver_ueV, cav.kappa_ueV,
                                    b.gamma_loss_solver_per_ns, gamma_star_ueV);
    r.I_zpl = qrt_pipeline(gen, CorrelatorKind::cavity_field, solver);
    r.I_full = r.eta_zpl_cav * r.eta_zpl_cav * r.I_zpl;
    return r;
}

FullIndistinguishability full_spectrum_indistinguishability(const CavityParams& cav,
                                                            const QDParams& qd,
                                                            const PhononBath& bath,
                                                            double temperature_K,
                                                            const FullIndistOptions& opt) {
    PhononBath b = bath;
    b.temperature_K = temperature_K;
    b.validate();
    const double gs = opt.zero_dephasing ? 0.0 : pure_dephasing_rate(qd, temperature_K);
    const double eta = zpl_fraction(b, opt.budget.spectrum.quad);

    std::vector<double> grid(opt.budget.psb_points);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = -opt.budget.psb_window_ueV +
                  2.0 * opt.budget.psb_window_ueV * static_cast<double>(i) /
                      static_cast<double>(grid.size() - 1);
    }
    const SpectrumGrid psb = sideband_spectrum(b, qd.gamma0_per_ns, gs, grid, opt.budget.spectrum);
    return full_spectrum_indistinguishability(cav, qd, eta, psb, gs, opt.solver);
}

} // namespace qdcav
