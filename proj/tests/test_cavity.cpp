#include <doctest.h>

#include <cmath>

#include "qdcav/cavity.hpp"
#include "qdcav/device.hpp"

using namespace qdcav;

namespace {

PhononBath bath_at(double T) {
    PhononBath b;
    b.temperature_K = T;
    return b;
}

PhononBath no_phonon_bath(double T = 0.0) {
    PhononBath b = bath_at(T);
    b.deformation_eV = 1.0e-5;  // eta -> 1, sidebands -> 0
    return b;
}

} // namespace

TEST_CASE("nominal Purcell factors of the two devices") {
    const QDParams qd;
    CHECK(device1().cavity.nominal_purcell(qd.gamma0_per_ns) == doctest::Approx(24.0).epsilon(1.0 / 24.0));
    CHECK(device2().cavity.nominal_purcell(qd.gamma0_per_ns) == doctest::Approx(8.0).epsilon(0.5 / 8.0));
}

TEST_CASE("no-phonon effective Purcell: rate formula and detuning cutoff") {
    const QDParams qd;
    CavityParams cav{.g_ueV = 19.0, .kappa_ueV = 90.0};
    const double hg0 = rate_to_energy(qd.gamma0_per_ns);
    const double expect = 4.0 * 19.0 * 19.0 / (hg0 * (90.0 + hg0));
    CHECK(effective_purcell_no_phonon(cav, qd, 0.0) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(effective_purcell_no_phonon(cav, qd, 0.0) == doctest::Approx(24.0).epsilon(1.0 / 24.0));

    CavityParams cav2{.g_ueV = 12.0, .kappa_ueV = 110.0};
    CHECK(effective_purcell_no_phonon(cav2, qd, 0.0) == doctest::Approx(8.0).epsilon(0.5 / 8.0));

    cav.delta_ueV = 1.0e9;
    CHECK(effective_purcell_no_phonon(cav, qd, 0.0) < 1e-12);

    CHECK_FALSE(CavityParams{.g_ueV = 19.0, .kappa_ueV = 90.0}.strong_coupling());
    CHECK(CavityParams{.g_ueV = 19.0, .kappa_ueV = 70.0}.strong_coupling());
}

TEST_CASE("sideband-corrected budget reduces to the no-phonon one as D -> 0") {
    const QDParams qd;
    const CavityParams cav{.g_ueV = 19.0, .kappa_ueV = 90.0};
    const EmissionBudget b = effective_purcell_with_psb(cav, qd, no_phonon_bath(), 0.0);
    const double f_np = effective_purcell_no_phonon(cav, qd, 0.0);
    CHECK(b.F_eff == doctest::Approx(f_np).epsilon(1e-6));
    CHECK(b.eta_zpl_cav == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(b.eta_zpl_channel == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("single-mode budget satisfies beta = F/(1+F) and books all channels") {
    const QDParams qd;
    const CavityParams cav{.g_ueV = 19.0, .kappa_ueV = 90.0};
    const EmissionBudget b = effective_purcell_with_psb(cav, qd, bath_at(9.0), 0.05);
    CHECK(std::abs(b.beta - b.F_eff / (1.0 + b.F_eff)) < 1e-9);
    CHECK(b.F_eff == doctest::Approx(b.F_channel_zpl + b.F_channel_psb).epsilon(1e-12));
    CHECK(b.gamma_loss_solver_per_ns ==
          doctest::Approx(qd.gamma0_per_ns * (1.0 + b.F_channel_psb)).epsilon(1e-12));
}

TEST_CASE("device-1 effective Purcell factor vs temperature") {
    const auto d = device1();
    const EmissionBudget cold =
        effective_purcell_with_psb(d.cavity, d.qd, bath_at(0.0), 0.0);
    CHECK(cold.F_eff == doctest::Approx(15.0).epsilon(1.0 / 15.0));
    const double gs20 = pure_dephasing_rate(d.qd, 20.0);
    const EmissionBudget warm =
        effective_purcell_with_psb(d.cavity, d.qd, bath_at(20.0), gs20);
    CHECK(warm.F_eff == doctest::Approx(11.0).epsilon(1.0 / 11.0));
    CHECK(warm.F_eff < cold.F_eff);
}

TEST_CASE("device-2 cavity ZPL fraction at 9 K") {
    const auto d = device2();
    const double gs = pure_dephasing_rate(d.qd, 9.0);
    const EmissionBudget b = effective_purcell_with_psb(d.cavity, d.qd, bath_at(9.0), gs);
    CHECK(b.eta_zpl_cav == doctest::Approx(0.98).epsilon(0.01 / 0.98));
    // cavity redirection: collected ZPL fraction well above the bulk 0.81
    CHECK(b.eta_zpl_channel > zpl_fraction(bath_at(9.0)));
}

TEST_CASE("mode-splitting loss rate") {
    const QDParams qd;
    SUBCASE("rejects the single-mode configuration") {
        const CavityParams cav{.g_ueV = 19.0, .kappa_ueV = 90.0, .split_modes = false};
        CHECK_THROWS_AS((void)loss_rate_with_mode_splitting(cav, qd, bath_at(10.0), 0.0),
                        std::invalid_argument);
    }
    SUBCASE("g = 0 leaves only the bulk rate") {
        const CavityParams cav{.g_ueV = 0.0, .kappa_ueV = 90.0, .delta_em_ueV = 80.0,
                               .split_modes = true};
        CHECK(loss_rate_with_mode_splitting(cav, qd, bath_at(10.0), 0.0) ==
              doctest::Approx(qd.gamma0_per_ns).epsilon(1e-12));
    }
    SUBCASE("device 1 has the larger sideband loss integral at 10 K") {
        const PhononBath b = bath_at(10.0);
        const double gs = pure_dephasing_rate(qd, 10.0);
        const double eta = zpl_fraction(b);
        auto psb_loss = [&](const DeviceConfig& dev) {
            const double loss = loss_rate_with_mode_splitting(dev.cavity, qd, b, gs);
            // strip gamma0 and the E-mode ZPL term; the remainder is the
            // E-mode sideband loss
            CavityParams e_mode{.g_ueV = dev.cavity.g_ueV / std::sqrt(2.0),
                                .kappa_ueV = dev.cavity.kappa_ueV};
            const double zpl = eta * effective_purcell_no_phonon(e_mode, qd, gs);
            return loss - qd.gamma0_per_ns - zpl * qd.gamma0_per_ns;
        };
        const double l1 = psb_loss(device1());
        const double l2 = psb_loss(device2());
        CHECK(l1 > 0.0);
        CHECK(l1 > l2);
    }
}

TEST_CASE("two degenerate modes at g/sqrt(2) reproduce the single-mode budget") {
    const QDParams qd;
    const PhononBath b = no_phonon_bath();
    const CavityParams split{.g_ueV = 19.0, .kappa_ueV = 90.0, .delta_em_ueV = 0.0,
                             .split_modes = true};
    const CavityParams single{.g_ueV = 19.0, .kappa_ueV = 90.0, .split_modes = false};
    const EmissionBudget bs = effective_purcell_with_psb(split, qd, b, 0.0);
    const EmissionBudget bm = effective_purcell_with_psb(single, qd, b, 0.0);
    CHECK(bs.F_eff == doctest::Approx(bm.F_eff).epsilon(1e-9));
    // the two-mode path stays in use at delta_EM = 0 (no silent fallback)
    CHECK(bs.g_solver_ueV == doctest::Approx(19.0 / std::sqrt(2.0)).epsilon(1e-12));
    // continuity in delta_EM around zero
    CavityParams near = split;
    near.delta_em_ueV = 1.0e-6;
    const EmissionBudget bn = effective_purcell_with_psb(near, qd, b, 0.0);
    CHECK(bn.F_eff == doctest::Approx(bs.F_eff).epsilon(1e-9));
}

TEST_CASE("cavity parameter validation") {
    CavityParams cav;
    cav.kappa_ueV = 0.0;
    CHECK_THROWS_AS(cav.validate(), std::invalid_argument);
    cav = CavityParams{};
    cav.g_ueV = -1.0;
    CHECK_THROWS_AS(cav.validate(), std::invalid_argument);
}
