// qdcav command-line tool: spectrum | sweep | hom | synth-hom.
// JSON config with flag overrides; every run drops a resolved-config
// sidecar next to its outputs so results are reproducible from the sidecar.
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qdcav/device.hpp"
#include "qdcav/hom.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qdcav;

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json default_config() {
    return json{
        {"device", "device1"},
        {"device_params", json::object()},
        {"temperature_K", 9.0},
        {"output_dir", "out"},
        {"jobs", 0},
        {"seed", 42},
        {"tolerances",
         {{"quad_abs_tol", 1.0e-8},
          {"ode_abs_tol", 1.0e-12},
          {"ode_rel_tol", 1.0e-10},
          {"grid_points", 600},
          {"psb_window_ueV", 4000.0},
          {"psb_points", 4001}}},
        {"spectrum",
         {{"window_ueV", 4000.0},
          {"points_per_side", 320},
          {"linear_core_ueV", 12.0},
          {"core_points", 121},
          {"temperatures_K", json::array({9.0, 20.0})}}},
        {"sweep",
         {{"parameter", "temperature"},
          {"lo", 0.0},
          {"hi", 20.0},
          {"count", 21},
          {"fixed_nominal_purcell", false},
          {"nominal_purcell", 24.0},
          {"dephasing", "full"},
          {"counterfactual", false}}},
        {"hom",
         {{"files", json::array()},
          {"g2_file", ""},
          {"g2", 0.0},
          {"g2_error", 0.0},
          {"mode", "hom"},
          {"window_lo_ns", -15.0},
          {"window_hi_ns", 615.0},
          {"n_uncorrelated", 50},
          {"R", 0.502},
          {"T", 0.498},
          {"epsilon", 0.005},
          {"rep_period_ns", 12.195},
          {"hom_delay_ns", 12.2},
          {"residuals", false}}},
        {"synth",
         {{"programmed_I", 1.0},
          {"programmed_g2", 0.0},
          {"tau_ns", 0.25},
          {"baseline", 10.0},
          {"side_amplitude", 500.0},
          {"bin_ns", 0.128},
          {"window_lo_ns", -15.0},
          {"window_hi_ns", 615.0},
          {"rep_period_ns", 12.195},
          {"hom_delay_ns", 12.2},
          {"R", 0.502},
          {"T", 0.498},
          {"epsilon", 0.005},
          {"hbt", false},
          {"count", 1}}},
    };
}

void merge_patch(json& base, const json& user) { base.merge_patch(user); }

json load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file: " + path);
    try {
        return json::parse(f, nullptr, true, true);  // allow comments
    } catch (const json::exception& e) {
        throw std::invalid_argument("config parse error in " + path + ": " + e.what());
    }
}

DeviceConfig device_from_config(const json& cfg) {
    DeviceConfig dev;
    const std::string preset = cfg.at("device").get<std::string>();
    if (!preset.empty()) dev = device_by_name(preset);
    const json& p = cfg.at("device_params");
    if (p.contains("name")) dev.name = p.at("name").get<std::string>();
    if (p.contains("g_ueV")) dev.cavity.g_ueV = p.at("g_ueV").get<double>();
    if (p.contains("kappa_ueV")) dev.cavity.kappa_ueV = p.at("kappa_ueV").get<double>();
    if (p.contains("delta_ueV")) dev.cavity.delta_ueV = p.at("delta_ueV").get<double>();
    if (p.contains("delta_em_ueV")) dev.cavity.delta_em_ueV = p.at("delta_em_ueV").get<double>();
    if (p.contains("split_modes")) dev.cavity.split_modes = p.at("split_modes").get<bool>();
    if (p.contains("gamma0_per_ns")) dev.qd.gamma0_per_ns = p.at("gamma0_per_ns").get<double>();
    if (p.contains("alpha_ueV")) dev.qd.dephasing_alpha_ueV = p.at("alpha_ueV").get<double>();
    if (p.contains("eps_p_ueV")) dev.qd.dephasing_energy_ueV = p.at("eps_p_ueV").get<double>();
    if (p.contains("D_eV")) dev.bath.deformation_eV = p.at("D_eV").get<double>();
    if (p.contains("sigma_nm")) dev.bath.confinement_nm = p.at("sigma_nm").get<double>();
    if (p.contains("cs_m_per_s")) dev.bath.sound_speed_m_s = p.at("cs_m_per_s").get<double>();
    if (p.contains("rho_kg_m3")) dev.bath.mass_density_kg_m3 = p.at("rho_kg_m3").get<double>();
    if (p.contains("fss_ueV")) dev.fss_ueV = p.at("fss_ueV").get<double>();
    dev.validate();
    return dev;
}

SolverOptions solver_from_config(const json& cfg) {
    const json& t = cfg.at("tolerances");
    SolverOptions s;
    s.abs_tol = t.at("ode_abs_tol").get<double>();
    s.rel_tol = t.at("ode_rel_tol").get<double>();
    s.n_points = t.at("grid_points").get<std::size_t>();
    return s;
}

BudgetOptions budget_from_config(const json& cfg) {
    const json& t = cfg.at("tolerances");
    BudgetOptions b;
    b.psb_window_ueV = t.at("psb_window_ueV").get<double>();
    b.psb_points = t.at("psb_points").get<std::size_t>();
    return b;
}

fs::path prepare_output_dir(const json& cfg, const std::string& command) {
    fs::path dir(cfg.at("output_dir").get<std::string>());
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    json sidecar = cfg;
    sidecar["command"] = command;
    std::ofstream f(dir / "config_resolved.json");
    if (!f) throw IoError("cannot write config sidecar in " + dir.string());
    f << sidecar.dump(2) << '\n';
    return dir;
}

std::ofstream open_output(const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw IoError("cannot open output file: " + p.string());
    return f;
}

// symmetric energy grid: linear core through the ZPL, log-spaced wings
std::vector<double> spectrum_grid(double window, std::size_t per_side, double core, std::size_t core_pts) {
    std::vector<double> g;
    for (std::size_t i = 0; i < core_pts; ++i) {
        g.push_back(-core + 2.0 * core * static_cast<double>(i) / static_cast<double>(core_pts - 1));
    }
    const double lo = std::log(core), hi = std::log(window);
    for (std::size_t i = 1; i <= per_side; ++i) {
        const double e = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(per_side));
        g.push_back(e);
        g.push_back(-e);
    }
    std::sort(g.begin(), g.end());
    return g;
}

int cmd_spectrum(const json& cfg) {
    const auto dir = prepare_output_dir(cfg, "spectrum");
    const DeviceConfig dev = device_from_config(cfg);
    const json& sp = cfg.at("spectrum");
    const auto grid = spectrum_grid(sp.at("window_ueV").get<double>(),
                                    sp.at("points_per_side").get<std::size_t>(),
                                    sp.at("linear_core_ueV").get<double>(),
                                    sp.at("core_points").get<std::size_t>());
    const BudgetOptions bopt = budget_from_config(cfg);

    for (double T : sp.at("temperatures_K").get<std::vector<double>>()) {
        PhononBath bath = dev.bath;
        bath.temperature_K = T;
        const double gs = pure_dephasing_rate(dev.qd, T);
        const double eta = zpl_fraction(bath, bopt.spectrum.quad);
        const SpectrumGrid psb =
            sideband_spectrum(bath, dev.qd.gamma0_per_ns, gs, grid, bopt.spectrum);

        // bulk: ZPL of width hbar gamma0 + gamma* plus sidebands
        const double fwhm_bulk = rate_to_energy(dev.qd.gamma0_per_ns) + gs;

        std::vector<double> cavity(grid.size(), 0.0), cavity_mode(grid.size(), 0.0);
        double gamma_total = dev.qd.gamma0_per_ns;
        if (dev.cavity.g_ueV > 0.0) {
            const EmissionBudget b =
                effective_purcell_with_psb(dev.cavity, dev.qd, eta, psb, gs);
            gamma_total = (1.0 + b.F_eff) * dev.qd.gamma0_per_ns;
            const double fwhm_cav = rate_to_energy(gamma_total) + gs;
            // collected-channel spectrum: Purcell-broadened ZPL plus the
            // cavity-filtered sideband, normalized to unit area
            const double chan = b.F_channel_zpl + b.F_channel_psb;
            const double mode_center = b.delta_solver_ueV == 0.0 ? -dev.cavity.delta_ueV
                                                                 : -b.delta_solver_ueV;
            const double hg0 = rate_to_energy(dev.qd.gamma0_per_ns);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const double psb_rate = 2.0 * std::numbers::pi * b.g_solver_ueV * b.g_solver_ueV /
                                        hg0 * psb.intensity[i] *
                                        lorentzian(grid[i], mode_center, dev.cavity.kappa_ueV);
                cavity[i] = (b.F_channel_zpl * lorentzian(grid[i], 0.0, fwhm_cav) + psb_rate) / chan;
                cavity_mode[i] = lorentzian(grid[i], mode_center, dev.cavity.kappa_ueV);
            }
        }

        char name[64];
        std::snprintf(name, sizeof name, "spectrum_T%g.csv", T);
        auto f = open_output(dir / name);
        f << "energy_ueV,bulk,cavity,cavity_mode\n";
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double bulk = eta * lorentzian(grid[i], 0.0, fwhm_bulk) + psb.intensity[i];
            f << format_full(grid[i]) << ',' << format_full(bulk) << ',' << format_full(cavity[i])
              << ',' << format_full(cavity_mode[i]) << '\n';
        }
    }
    return 0;
}

int cmd_sweep(const json& cfg) {
    const auto dir = prepare_output_dir(cfg, "sweep");
    const DeviceConfig dev = device_from_config(cfg);
    const json& sw = cfg.at("sweep");

    SweepSpec spec;
    spec.parameter = sweep_parameter_from_string(sw.at("parameter").get<std::string>());
    spec.lo = sw.at("lo").get<double>();
    spec.hi = sw.at("hi").get<double>();
    spec.count = sw.at("count").get<std::size_t>();
    spec.fixed_nominal_purcell = sw.at("fixed_nominal_purcell").get<bool>();
    spec.nominal_purcell = sw.at("nominal_purcell").get<double>();
    const std::string mode = sw.at("dephasing").get<std::string>();
    if (mode == "full") {
        spec.dephasing = DephasingMode::full;
    } else if (mode == "zero") {
        spec.dephasing = DephasingMode::zero;
    } else {
        throw std::invalid_argument("sweep.dephasing must be 'full' or 'zero'");
    }
    spec.temperature_K = cfg.at("temperature_K").get<double>();
    spec.jobs = cfg.at("jobs").get<unsigned>();
    spec.solver = solver_from_config(cfg);
    spec.budget = budget_from_config(cfg);
    spec.validate();

    if (sw.at("counterfactual").get<bool>()) {
        const auto [full, zero] = counterfactual_curves(dev, spec);
        {
            auto f = open_output(dir / "sweep.csv");
            write_csv(full, f);
        }
        {
            auto f = open_output(dir / "sweep_nodeph.csv");
            write_csv(zero, f);
        }
        {
            auto f = open_output(dir / "sweep_ratio.csv");
            write_counterfactual_csv(full, zero, f);
        }
    } else {
        const SimResult res = run_sweep(dev, spec);
        auto f = open_output(dir / "sweep.csv");
        write_csv(res, f);
    }
    return 0;
}

json fit_to_json(const PeakTrainFit& fit) {
    json j;
    j["baseline"] = fit.baseline;
    j["tau_ns"] = fit.tau_ns;
    j["time_offset_ns"] = fit.time_offset_ns;
    j["peak_index"] = fit.peak_index;
    j["amplitudes"] = fit.amplitudes;
    std::vector<double> areas(fit.n_peaks());
    for (std::size_t k = 0; k < fit.n_peaks(); ++k) areas[k] = fit.area(k);
    j["areas"] = areas;
    j["chi2_reduced"] = fit.chi2_reduced;
    j["gradient_norm"] = fit.gradient_norm;
    std::vector<std::vector<double>> cov(static_cast<std::size_t>(fit.covariance.rows()));
    for (Eigen::Index r = 0; r < fit.covariance.rows(); ++r) {
        cov[static_cast<std::size_t>(r)].assign(fit.covariance.row(r).begin(),
                                                fit.covariance.row(r).end());
    }
    j["covariance"] = cov;
    j["covariance_order"] = "baseline, amplitudes..., tau, time_offset";
    return j;
}

int cmd_hom(const json& cfg) {
    const auto dir = prepare_output_dir(cfg, "hom");
    const json& hc = cfg.at("hom");
    const auto files = hc.at("files").get<std::vector<std::string>>();
    if (files.empty()) throw std::invalid_argument("hom.files is empty: nothing to analyze");

    const double R = hc.at("R").get<double>();
    const double T = hc.at("T").get<double>();
    const double eps = hc.at("epsilon").get<double>();
    const auto n_unc = hc.at("n_uncorrelated").get<std::size_t>();
    const double wlo = hc.at("window_lo_ns").get<double>();
    const double whi = hc.at("window_hi_ns").get<double>();
    const std::string mode_s = hc.at("mode").get<std::string>();
    if (mode_s != "hom" && mode_s != "hbt") {
        throw std::invalid_argument("hom.mode must be 'hom' or 'hbt'");
    }
    const PeakAverage mode = (mode_s == "hom") ? PeakAverage::hom : PeakAverage::hbt;

    // g2 from a companion HBT histogram, or taken as given
    double g2 = hc.at("g2").get<double>();
    double g2_err = hc.at("g2_error").get<double>();
    json g2_fit_json;
    const std::string g2_file = hc.at("g2_file").get<std::string>();
    if (!g2_file.empty()) {
        std::ifstream f(g2_file);
        if (!f) throw IoError("cannot open histogram: " + g2_file);
        CoincidenceHistogram h = read_histogram(f);
        h.rep_period_ns = hc.at("rep_period_ns").get<double>();
        h.hom_delay_ns = hc.at("hom_delay_ns").get<double>();
        const PeakTrainFit fit = fit_peak_train(h, wlo, whi);
        const G2Result g = extract_g2(fit, n_unc, PeakAverage::hbt);
        g2 = g.g2_zero;
        g2_err = g.error;
        g2_fit_json = fit_to_json(fit);
    }

    // fits are single-threaded per histogram; a batch parallelizes across files
    const auto analyze_one = [&](const std::string& path) {
        std::ifstream f(path);
        if (!f) throw IoError("cannot open histogram: " + path);
        CoincidenceHistogram h = read_histogram(f);
        h.rep_period_ns = hc.at("rep_period_ns").get<double>();
        h.hom_delay_ns = hc.at("hom_delay_ns").get<double>();

        const PeakTrainFit fit = fit_peak_train(h, wlo, whi);
        // averaging convention: 50 side peaks for HBT, 49 for HOM (the
        // +-one-period peaks sit at the interferometer delay)
        const std::size_t n_mode = (mode == PeakAverage::hom) ? n_unc - 1 : n_unc;
        const G2Result ratio = extract_g2(fit, n_mode, mode);
        const HOMResult res =
            corrected_indistinguishability(g2, ratio.g2_zero, R, T, eps, g2_err, ratio.error);

        json rep;
        rep["input"] = path;
        rep["fit"] = fit_to_json(fit);
        if (!g2_fit_json.is_null()) rep["g2_fit"] = g2_fit_json;
        rep["g2_zero"] = res.g2_zero;
        rep["g2_error"] = res.g2_error;
        rep["a0_over_mean"] = res.a0_over_mean;
        rep["a0_error"] = res.a0_error;
        rep["n_side_peaks"] = ratio.n_side_peaks;
        rep["I_raw"] = res.I_raw;
        rep["I_corrected"] = res.I_corrected;
        rep["I_unclamped"] = res.I_unclamped;
        rep["err_plus"] = res.err_plus;
        rep["err_minus"] = res.err_minus;
        rep["out_of_range"] = res.out_of_range;
        rep["R"] = R;
        rep["T"] = T;
        rep["epsilon"] = eps;

        const auto stem = fs::path(path).stem().string();
        auto out = open_output(dir / (stem + "_report.json"));
        out << rep.dump(2) << '\n';

        if (hc.at("residuals").get<bool>()) {
            auto rf = open_output(dir / (stem + "_residuals.csv"));
            rf << "delay_ns,counts,model,residual\n";
            for (std::size_t i = 0; i < h.bin_centers_ns.size(); ++i) {
                const double t = h.bin_centers_ns[i];
                if (t < wlo || t > whi) continue;
                double m = fit.baseline;
                for (std::size_t k = 0; k < fit.n_peaks(); ++k) {
                    const double c = fit.time_offset_ns +
                                     static_cast<double>(fit.peak_index[k]) * h.rep_period_ns;
                    m += fit.amplitudes[k] * double_exp_bin_mean(t, h.bin_width_ns(), c, fit.tau_ns);
                }
                rf << format_full(t) << ',' << format_full(h.counts[i]) << ',' << format_full(m)
                   << ',' << format_full(h.counts[i] - m) << '\n';
            }
        }
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    unsigned jobs = cfg.at("jobs").get<unsigned>();
    if (jobs == 0) jobs = hw;
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(files.size()));

    if (jobs <= 1) {
        for (const auto& path : files) analyze_one(path);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex err_mutex;
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < jobs; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= files.size()) return;
                    try {
                        analyze_one(files[i]);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(err_mutex);
                        if (!first_error) first_error = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }
    return 0;
}

int cmd_synth_hom(const json& cfg) {
    const auto dir = prepare_output_dir(cfg, "synth-hom");
    const json& sc = cfg.at("synth");
    SynthSpec spec;
    spec.programmed_I = sc.at("programmed_I").get<double>();
    spec.programmed_g2 = sc.at("programmed_g2").get<double>();
    spec.tau_ns = sc.at("tau_ns").get<double>();
    spec.baseline = sc.at("baseline").get<double>();
    spec.side_amplitude = sc.at("side_amplitude").get<double>();
    spec.bin_ns = sc.at("bin_ns").get<double>();
    spec.window_lo_ns = sc.at("window_lo_ns").get<double>();
    spec.window_hi_ns = sc.at("window_hi_ns").get<double>();
    spec.rep_period_ns = sc.at("rep_period_ns").get<double>();
    spec.hom_delay_ns = sc.at("hom_delay_ns").get<double>();
    spec.R = sc.at("R").get<double>();
    spec.T = sc.at("T").get<double>();
    spec.epsilon = sc.at("epsilon").get<double>();
    spec.hbt = sc.at("hbt").get<bool>();

    const auto seed = cfg.at("seed").get<std::uint64_t>();
    const auto count = sc.at("count").get<std::size_t>();
    for (std::size_t k = 0; k < count; ++k) {
        const CoincidenceHistogram h = synth_histogram(spec, seed + k);
        char name[64];
        std::snprintf(name, sizeof name, "synth_%s_seed%llu.txt", spec.hbt ? "hbt" : "hom",
                      static_cast<unsigned long long>(seed + k));
        auto f = open_output(dir / name);
        write_histogram(h, f);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"phonon-limited single-photon-source simulator and HOM analysis"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags are accepted after the subcommand too

    std::string config_path;
    app.add_option("-c,--config", config_path, "JSON config file (flags override file values)");

    // common overrides
    std::optional<std::string> device, output_dir;
    std::optional<double> temperature;
    std::optional<unsigned> jobs;
    std::optional<std::uint64_t> seed;
    std::optional<bool> split_modes;
    app.add_option("--device", device, "device preset: device1 | device2 | bulk");
    app.add_option("--split-modes", split_modes, "override the two-mode configuration flag");
    app.add_option("-o,--output-dir", output_dir, "output directory");
    app.add_option("--temperature", temperature, "temperature (K)");
    app.add_option("--jobs", jobs, "worker threads (0 = hardware)");
    app.add_option("--seed", seed, "RNG seed for synthetic data");

    auto* spectrum = app.add_subcommand("spectrum", "bulk and cavity-filtered emission spectra");
    std::optional<double> sp_window;
    std::vector<double> sp_temps;
    spectrum->add_option("--window", sp_window, "energy window half-width (ueV)");
    spectrum->add_option("--temperatures", sp_temps, "temperatures (K)");

    auto* sweep = app.add_subcommand("sweep", "parameter sweeps of the indistinguishability");
    std::optional<std::string> sw_par, sw_deph;
    std::optional<double> sw_lo, sw_hi, sw_fp;
    std::optional<std::size_t> sw_count;
    std::optional<bool> sw_fixed, sw_counter;
    sweep->add_option("--parameter", sw_par, "temperature | kappa | detuning | purcell");
    sweep->add_option("--lo", sw_lo, "grid start");
    sweep->add_option("--hi", sw_hi, "grid end");
    sweep->add_option("--count", sw_count, "grid points");
    sweep->add_option("--fixed-purcell", sw_fixed, "hold the nominal Purcell factor fixed");
    sweep->add_option("--nominal-purcell", sw_fp, "nominal Purcell factor");
    sweep->add_option("--dephasing", sw_deph, "full | zero");
    sweep->add_option("--counterfactual", sw_counter, "also run the zero-dephasing pair");

    auto* hom = app.add_subcommand("hom", "fit coincidence histograms and extract g2 / I");
    std::vector<std::string> hom_files;
    std::optional<std::string> hom_mode, hom_g2file;
    std::optional<double> hom_R, hom_T, hom_eps, hom_wlo, hom_whi, hom_g2, hom_g2err;
    std::optional<bool> hom_resid;
    hom->add_option("files", hom_files, "histogram files (delay_ns counts)");
    hom->add_option("--mode", hom_mode, "hom | hbt (side-peak averaging rule)");
    hom->add_option("--g2-file", hom_g2file, "companion HBT histogram for g2(0)");
    hom->add_option("--g2", hom_g2, "g2(0) value when no HBT histogram is given");
    hom->add_option("--g2-error", hom_g2err, "error bound on the given g2(0)");
    hom->add_option("--r", hom_R, "beamsplitter reflectivity");
    hom->add_option("--t", hom_T, "beamsplitter transmissivity");
    hom->add_option("--epsilon", hom_eps, "1 - classical interferometer visibility");
    hom->add_option("--window-lo", hom_wlo, "fit window start (ns)");
    hom->add_option("--window-hi", hom_whi, "fit window end (ns)");
    hom->add_option("--residuals", hom_resid, "also write residuals CSV");

    auto* synth = app.add_subcommand("synth-hom", "deterministic Poisson-sampled histograms");
    std::optional<double> sy_I, sy_g2, sy_tau, sy_base, sy_amp;
    std::optional<bool> sy_hbt;
    std::optional<std::size_t> sy_count;
    synth->add_option("--i", sy_I, "programmed indistinguishability");
    synth->add_option("--g2", sy_g2, "programmed g2(0)");
    synth->add_option("--tau", sy_tau, "peak decay time (ns)");
    synth->add_option("--baseline", sy_base, "dark counts per bin");
    synth->add_option("--amplitude", sy_amp, "side-peak amplitude (counts)");
    synth->add_option("--hbt", sy_hbt, "HBT pattern instead of HOM");
    synth->add_option("--count", sy_count, "number of histograms (seeds seed..seed+count-1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
            e.get_name() == "CallForVersion") {
            return app.exit(e);
        }
        std::cerr << e.what() << '\n';
        return 2;
    }

    try {
        json cfg = default_config();
        if (!config_path.empty()) merge_patch(cfg, load_config_file(config_path));

        if (device) cfg["device"] = *device;
        if (split_modes) cfg["device_params"]["split_modes"] = *split_modes;
        if (output_dir) cfg["output_dir"] = *output_dir;
        if (temperature) cfg["temperature_K"] = *temperature;
        if (jobs) cfg["jobs"] = *jobs;
        if (seed) cfg["seed"] = *seed;

        if (sw_par) cfg["sweep"]["parameter"] = *sw_par;
        if (sw_lo) cfg["sweep"]["lo"] = *sw_lo;
        if (sw_hi) cfg["sweep"]["hi"] = *sw_hi;
        if (sw_count) cfg["sweep"]["count"] = *sw_count;
        if (sw_fixed) cfg["sweep"]["fixed_nominal_purcell"] = *sw_fixed;
        if (sw_fp) cfg["sweep"]["nominal_purcell"] = *sw_fp;
        if (sw_deph) cfg["sweep"]["dephasing"] = *sw_deph;
        if (sw_counter) cfg["sweep"]["counterfactual"] = *sw_counter;

        if (sp_window) cfg["spectrum"]["window_ueV"] = *sp_window;
        if (!sp_temps.empty()) cfg["spectrum"]["temperatures_K"] = sp_temps;
        if (temperature && sp_temps.empty() && spectrum->parsed()) {
            cfg["spectrum"]["temperatures_K"] = json::array({*temperature});
        }

        if (!hom_files.empty()) cfg["hom"]["files"] = hom_files;
        if (hom_mode) cfg["hom"]["mode"] = *hom_mode;
        if (hom_g2file) cfg["hom"]["g2_file"] = *hom_g2file;
        if (hom_g2) cfg["hom"]["g2"] = *hom_g2;
        if (hom_g2err) cfg["hom"]["g2_error"] = *hom_g2err;
        if (hom_R) cfg["hom"]["R"] = *hom_R;
        if (hom_T) cfg["hom"]["T"] = *hom_T;
        if (hom_eps) cfg["hom"]["epsilon"] = *hom_eps;
        if (hom_wlo) cfg["hom"]["window_lo_ns"] = *hom_wlo;
        if (hom_whi) cfg["hom"]["window_hi_ns"] = *hom_whi;
        if (hom_resid) cfg["hom"]["residuals"] = *hom_resid;

        if (sy_I) cfg["synth"]["programmed_I"] = *sy_I;
        if (sy_g2) cfg["synth"]["programmed_g2"] = *sy_g2;
        if (sy_tau) cfg["synth"]["tau_ns"] = *sy_tau;
        if (sy_base) cfg["synth"]["baseline"] = *sy_base;
        if (sy_amp) cfg["synth"]["side_amplitude"] = *sy_amp;
        if (sy_hbt) cfg["synth"]["hbt"] = *sy_hbt;
        if (sy_count) cfg["synth"]["count"] = *sy_count;

        if (spectrum->parsed()) return cmd_spectrum(cfg);
        if (sweep->parsed()) return cmd_sweep(cfg);
        if (hom->parsed()) return cmd_hom(cfg);
        if (synth->parsed()) return cmd_synth_hom(cfg);
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return 4;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return 4;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
}
