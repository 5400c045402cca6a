#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qdcav/phonon_bath.hpp"

using namespace qdcav;

namespace {

PhononBath table_bath(double T) {
    PhononBath b;
    b.temperature_K = T;
    return b;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * double(i) / double(n - 1);
    return v;
}

// grid for total-integral checks: dense linear core through the ZPL plus
// 2 ueV-sampled wings out to +-4 meV
std::vector<double> zpl_resolving_grid() {
    std::vector<double> g;
    for (double e = -4000.0; e < -24.0; e += 2.0) g.push_back(e);
    for (double e = -24.0; e <= 24.0; e += 0.05) g.push_back(e);
    for (double e = 26.0; e <= 4000.0; e += 2.0) g.push_back(e);
    return g;
}

double trapz(const std::vector<double>& x, const std::vector<double>& y) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        acc += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
    }
    return acc;
}

double value_at(const SpectrumGrid& s, double e) {
    const auto it = std::min_element(s.energy_ueV.begin(), s.energy_ueV.end(),
                                     [e](double a, double b) { return std::abs(a - e) < std::abs(b - e); });
    return s.intensity[static_cast<std::size_t>(it - s.energy_ueV.begin())];
}

} // namespace

TEST_CASE("spectral density vanishes at zero and is superohmic") {
    const PhononBath b = table_bath(4.0);
    CHECK(spectral_density(0.0, b) == 0.0);
    // J ~ w^3 as w -> 0
    const double r = spectral_density(2.0e-3, b) / spectral_density(1.0e-3, b);
    CHECK(r == doctest::Approx(8.0).epsilon(1e-6));
    CHECK(spectral_density(100.0, b) > 0.0);
}

TEST_CASE("argmax of J/w^2 sits at the cutoff frequency c_s/sigma") {
    const PhononBath b = table_bath(0.0);
    const double w_c = b.sound_speed_m_s / (b.confinement_nm * 1.0e-9) * 1.0e-9;  // rad/ns
    // dense scan oracle
    double best_w = 0.0, best = -1.0;
    for (double w = 1.0; w < 10.0 * w_c; w += w_c / 2000.0) {
        const double v = spectral_density(w, b) / (w * w);
        if (v > best) {
            best = v;
            best_w = w;
        }
    }
    CHECK(best_w == doctest::Approx(w_c).epsilon(2e-3));
    // the cutoff energy of the Table-S1 bath is ~0.673 meV
    CHECK(b.cutoff_energy_ueV() == doctest::Approx(672.7).epsilon(1e-3));
}

TEST_CASE("bose occupation") {
    CHECK(bose_occupation(1000.0, 0.0) == 0.0);
    CHECK(bose_occupation(1000.0, 10.0) == doctest::Approx(0.456).epsilon(2e-3));
    CHECK(bose_occupation(1000.0, 20.0) == doctest::Approx(1.272).epsilon(2e-3));
    CHECK_THROWS_AS((void)bose_occupation(0.0, 10.0), std::domain_error);
    CHECK_THROWS_AS((void)bose_occupation(-1.0, 0.0), std::domain_error);
}

TEST_CASE("pure dephasing rate gamma*(T)") {
    const QDParams qd;
    CHECK(pure_dephasing_rate(qd, 0.0) == 0.0);
    CHECK(pure_dephasing_rate(qd, 10.0) == doctest::Approx(0.0664).epsilon(2e-3));
    CHECK(pure_dephasing_rate(qd, 20.0) == doctest::Approx(0.289).epsilon(2e-3));
    double prev = -1.0;
    for (double T = 0.0; T <= 40.0; T += 2.5) {
        const double g = pure_dephasing_rate(qd, T);
        CHECK(g > prev);
        prev = g;
    }
}

TEST_CASE("phase function: zero at tau = 0, conjugate symmetry, closed form at T = 0") {
    const PhononBath b = table_bath(0.0);
    const std::vector<double> taus{-2.0e-3, -1.0e-3, 0.0, 1.0e-3, 2.0e-3, 5.0e-3};
    const PhaseFunction ph = phase_function(b, taus);

    CHECK(ph.phi[2] == std::complex<double>{0.0, 0.0});
    CHECK(std::abs(ph.phi[1] - std::conj(ph.phi[3])) < 1e-12);
    CHECK(std::abs(ph.phi[0] - std::conj(ph.phi[4])) < 1e-12);
    CHECK(ph.max_quad_error <= 1e-6);

    // T = 0 closed form of the asymptotic exponent, within 1e-4 relative
    CHECK(ph.phi_infinity == doctest::Approx(b.coupling_exponent_t0()).epsilon(1e-4));
    // Table-S1 value quoted to ~0.0675
    CHECK(ph.phi_infinity == doctest::Approx(0.0675).epsilon(0.005));

    // Re phi >= 0 and approaches phi_infinity at large offsets
    for (const auto& v : ph.phi) CHECK(v.real() >= 0.0);
    const std::vector<double> far{50.0e-3, 100.0e-3};
    const PhaseFunction ph_far = phase_function(b, far);
    CHECK(std::abs(ph_far.phi[0].real() - ph.phi_infinity) < 1e-4);
    CHECK(std::abs(ph_far.phi[1].real() - ph.phi_infinity) <
          std::abs(ph_far.phi[0].real() - ph.phi_infinity));
}

TEST_CASE("zpl fraction: paper values, limits, monotonicity, convergence") {
    CHECK(zpl_fraction(table_bath(9.0)) == doctest::Approx(0.81).epsilon(0.0125));
    CHECK(zpl_fraction(table_bath(20.0)) == doctest::Approx(0.64).epsilon(0.016));
    CHECK(zpl_fraction(table_bath(0.0)) == doctest::Approx(0.935).epsilon(1e-3));

    PhononBath weak = table_bath(10.0);
    weak.deformation_eV = 1.0e-4;
    CHECK(zpl_fraction(weak) == doctest::Approx(1.0).epsilon(1e-9));

    double prev = 2.0;
    for (double T : linspace(0.0, 30.0, 13)) {
        const double eta = zpl_fraction(table_bath(T));
        CHECK(eta > 0.0);
        CHECK(eta <= 1.0);
        CHECK(eta < prev);
        prev = eta;
    }

    // doubling the integration range or tightening the tolerance moves eta by < 1e-4
    const PhononBath b = table_bath(9.0);
    QuadratureOptions wide;
    wide.omega_max_factor = 20.0;
    QuadratureOptions tight;
    tight.abs_tol = 1.0e-10;
    const double eta0 = zpl_fraction(b);
    CHECK(std::abs(zpl_fraction(b, wide) - eta0) < 1e-4);
    CHECK(std::abs(zpl_fraction(b, tight) - eta0) < 1e-4);
}

TEST_CASE("bulk spectrum: normalization, sideband weight, nonnegativity") {
    const QDParams qd;
    const auto grid = zpl_resolving_grid();
    for (double T : {0.0, 9.0}) {
        const PhononBath b = table_bath(T);
        const double gs = pure_dephasing_rate(qd, T);
        const SpectrumGrid s = bulk_spectrum(b, qd, qd.gamma0_per_ns, gs, grid);
        for (double v : s.intensity) CHECK(v >= 0.0);
        CHECK(trapz(s.energy_ueV, s.intensity) == doctest::Approx(1.0).epsilon(1e-3));

        const SpectrumGrid sb = sideband_spectrum(b, qd.gamma0_per_ns, gs, grid);
        const double eta = zpl_fraction(b);
        CHECK(std::abs(trapz(sb.energy_ueV, sb.intensity) - (1.0 - eta)) < 1e-3);
    }
}

TEST_CASE("T = 0 sideband is phonon emission only (red side)") {
    const PhononBath b = table_bath(0.0);
    const auto grid = linspace(-4000.0, 4000.0, 4001);
    const SpectrumGrid s = sideband_spectrum(b, 1.0, 0.0, grid);
    const double red = value_at(s, -1000.0);
    const double blue = value_at(s, 1000.0);
    CHECK(red > 1e-5);
    // The construction keeps the radiative-decay envelope on the sideband
    // correlator, so the red features carry Lorentzian wings of relative
    // weight ~Gamma/energy; the blue side sits at that floor, far below any
    // thermal sideband.
    CHECK(blue <= 1e-4 * red);

    // the blue residue scales with the envelope width (it is ZPL leakage,
    // not phonon absorption): a 4x wider envelope raises it ~4x
    const SpectrumGrid s4 = sideband_spectrum(b, 4.0, 0.0, grid);
    CHECK(value_at(s4, 1000.0) > 2.0 * blue);
    CHECK(value_at(s4, 1000.0) < 8.0 * blue);
}

TEST_CASE("detailed balance of the sidebands at T > 0") {
    const PhononBath b = table_bath(9.0);
    const auto grid = linspace(-4000.0, 4000.0, 8001);
    const SpectrumGrid s = sideband_spectrum(b, 1.0, pure_dephasing_rate(QDParams{}, 9.0), grid);
    const double kT = kB_ueV_per_K * 9.0;
    for (double e : {200.0, 500.0, 1000.0, 1500.0}) {
        const double ratio = value_at(s, e) / value_at(s, -e);
        CHECK(ratio == doctest::Approx(std::exp(-e / kT)).epsilon(0.02));
    }

    // first-order perturbative oracle for the sideband density
    const double eta = zpl_fraction(b);
    for (double e : {-1500.0, -800.0, -300.0, 300.0, 800.0}) {
        const double n = bose_occupation(std::abs(e), 9.0);
        const double weight = n + (e < 0.0 ? 1.0 : 0.0);
        const double oracle = eta * b.coupling_density(std::abs(e)) * weight;
        CHECK(value_at(s, e) == doctest::Approx(oracle).epsilon(0.08));
    }
}

TEST_CASE("bulk spectrum error paths") {
    const PhononBath b = table_bath(9.0);
    const QDParams qd;
    // coarse grid cannot resolve the ~0.7 ueV ZPL
    const auto coarse = linspace(-4000.0, 4000.0, 801);
    CHECK_THROWS_AS((void)bulk_spectrum(b, qd, qd.gamma0_per_ns, 0.0, coarse), std::runtime_error);
    // window cap below what the slowly decaying cold correlator needs
    SpectrumOptions opt;
    opt.max_window_ps = 50.0;
    const auto grid = linspace(-4000.0, 4000.0, 4001);
    CHECK_THROWS_AS((void)sideband_spectrum(table_bath(0.0), qd.gamma0_per_ns, 0.0, grid, opt),
                    std::runtime_error);
}

TEST_CASE("parameter validation") {
    PhononBath b;
    b.deformation_eV = -1.0;
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
    b = PhononBath{};
    b.temperature_K = -0.1;
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
    QDParams qd;
    qd.gamma0_per_ns = 0.0;
    CHECK_THROWS_AS(qd.validate(), std::invalid_argument);
}
