// Dissipative QD-cavity dynamics in the single-excitation subspace
// {|e,0>, |g,1>, |g,0>}: adaptive Lindblad evolution, quantum-regression
// two-time correlators of the cavity field (or of the bare emitter dipole),
// and the two-photon-interference functional of the correlator.

#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "qdcav/cavity.hpp"
#include "qdcav/phonon_bath.hpp"

namespace qdcav {

using complex = std::complex<double>;

// 3x3 density matrix (row major) over {|e,0>, |g,1>, |g,0>}.
struct SingleExcitationState {
    std::array<complex, 9> rho{};

    double excited_population() const { return rho[0].real(); }
    double cavity_population() const { return rho[4].real(); }
    double ground_population() const { return rho[8].real(); }
    double trace() const { return rho[0].real() + rho[4].real() + rho[8].real(); }
    double min_eigenvalue() const;

    static SingleExcitationState excited();  // |e,0><e,0|
};

// Lindblad generator with all frequencies reduced to rates (1/ns).
struct LindbladGenerator {
    double g_rad{0.0};        // Jaynes-Cummings coupling g/hbar
    double delta_rad{0.0};    // QD-mode detuning delta/hbar
    double kappa_rate{0.0};   // cavity decay kappa/hbar
    double gamma_loss{0.0};   // emitter loss |e,0> -> |g,0>
    double dephasing_rate{0.0};  // gamma*/hbar (projector dissipator on |e,0>)

    // applies the generator to an arbitrary 3x3 operator (row major)
    void apply(const std::array<complex, 9>& m, std::array<complex, 9>& out) const;

    // slowest decay rate over the single-excitation and coherence-to-ground
    // sectors; sets the default integration span
    double slowest_decay() const;
    double fastest_oscillation() const;
};

LindbladGenerator make_generator(double g_ueV, double delta_ueV, double kappa_ueV,
                                 double gamma_loss_per_ns, double gamma_star_ueV);

struct SolverOptions {
    double abs_tol{1.0e-12};
    double rel_tol{1.0e-10};
    std::size_t n_points{600};   // per t and per tau
    double span_factor{12.0};    // grid span = span_factor / slowest decay
    bool check_state{true};      // trace / positivity guards on recorded states
    std::size_t max_steps{2000000};  // stiff-parameter guard per integration
};

struct Trajectory {
    std::vector<double> t_ns;
    std::vector<SingleExcitationState> states;
    std::vector<double> cavity_flux;  // cumulative integral of kappa <a'a>
    std::vector<double> loss_flux;    // cumulative integral of gamma_loss P_e
};

// Lindblad evolution from |e,0> on the given time grid (must start at 0,
// strictly increasing). Local error controlled by an embedded adaptive RK
// pair; throws on step-size underflow and on trace/positivity violation.
Trajectory evolve_density_matrix(const LindbladGenerator& gen, std::span<const double> t_grid,
                                 const SolverOptions& opt = {});

// uniform grid of n points on [0, span_factor/slowest]
std::vector<double> default_time_grid(const LindbladGenerator& gen, const SolverOptions& opt);

enum class CorrelatorKind {
    cavity_field,    // G = <a'(t+tau) a(t)>
    emitter_dipole,  // G = <sigma+(t+tau) sigma-(t)>
};

struct TwoTimeCorrelator {
    std::vector<double> t_ns;    // anchor times (n points)
    std::vector<double> tau_ns;  // offsets (n points, same spacing)
    std::vector<complex> values; // row major: values[i*n + j] = G(t_i, tau_j)
    std::vector<double> population;  // channel population on the full 2n-1 grid
    CorrelatorKind kind{CorrelatorKind::cavity_field};

    const complex& at(std::size_t i, std::size_t j) const { return values[i * tau_ns.size() + j]; }
};

// Quantum regression: propagate the operator-conditioned state O rho(t)
// forward in tau under the same generator. The trajectory must cover
// [0, 2 t_max] on a uniform grid (odd length); anchors are its first half.
// Throws if the channel population has not decayed to 1e-4 of its maximum.
TwoTimeCorrelator two_time_correlator(const Trajectory& traj, const LindbladGenerator& gen,
                                      CorrelatorKind kind = CorrelatorKind::cavity_field,
                                      const SolverOptions& opt = {});

// Two-photon-interference functional: I = (sum |G|^2) / (sum P(t) P(t+tau)), both by
// 2-D trapezoidal quadrature.
double indistinguishability_from_correlator(const TwoTimeCorrelator& corr);

struct FullIndistinguishability {
    double I_full{0.0};
    double I_zpl{0.0};
    double eta_zpl_cav{1.0};     // ZPL fraction of the collected channel
    double eta_zpl_bulk{1.0};
    double F_eff{0.0};
    double beta{0.0};
    double gamma_star_ueV{0.0};
    bool bad_cavity_warning{false};
};

struct FullIndistOptions {
    SolverOptions solver{};
    BudgetOptions budget{};
    bool zero_dephasing{false};
};

// Factorized full-spectrum indistinguishability I_full = eta_channel^2 * I_zpl,
// with I_zpl from the quantum-regression pipeline: the explicit solver mode
// carries the polaron-renormalized coupling sqrt(eta) g and all sideband
// emission is folded into the Markovian emitter loss. The bulk limit (g = 0)
// uses the emitter-dipole correlator and collects the whole emission.
FullIndistinguishability full_spectrum_indistinguishability(const CavityParams& cav,
                                                            const QDParams& qd,
                                                            const PhononBath& bath,
                                                            double temperature_K,
                                                            const FullIndistOptions& opt = {});

// Precomputed-bath variant shared across sweep points at one temperature.
FullIndistinguishability full_spectrum_indistinguishability(const CavityParams& cav,
                                                            const QDParams& qd,
                                                            double eta_zpl,
                                                            const SpectrumGrid& psb,
                                                            double gamma_star_ueV,
                                                            const SolverOptions& solver = {});

// Markovian two-level limit: I = hbar gamma / (hbar gamma + gamma*).
double zpl_indistinguishability_markov(double gamma_per_ns, double gamma_star_ueV);

} // namespace qdcav
