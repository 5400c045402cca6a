#include "qdcav/device.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace qdcav {

void DeviceConfig::validate() const {
    cavity.validate();
    qd.validate();
    bath.validate();
}

DeviceConfig device1() {
    DeviceConfig d;
    d.name = "device1";
    d.cavity = {.g_ueV = 19.0, .kappa_ueV = 90.0, .delta_ueV = 0.0,
                .delta_em_ueV = 80.0, .split_modes = true};
    d.qd = {};
    d.bath = {};
    d.fss_ueV = 3.0;
    return d;
}

DeviceConfig device2() {
    DeviceConfig d;
    d.name = "device2";
    d.cavity = {.g_ueV = 12.0, .kappa_ueV = 110.0, .delta_ueV = 0.0,
                .delta_em_ueV = -40.0, .split_modes = true};
    d.qd = {};
    d.bath = {};
    d.fss_ueV = 10.0;
    return d;
}

DeviceConfig bulk_device() {
    DeviceConfig d;
    d.name = "bulk";
    d.cavity = {.g_ueV = 0.0, .kappa_ueV = 90.0, .delta_ueV = 0.0,
                .delta_em_ueV = 0.0, .split_modes = false};
    d.qd = {};
    d.bath = {};
    return d;
}

DeviceConfig device_by_name(const std::string& name) {
    if (name == "device1") return device1();
    if (name == "device2") return device2();
    if (name == "bulk") return bulk_device();
    throw std::invalid_argument("unknown device preset: " + name);
}

DeviceConfig without_mode_splitting(DeviceConfig dev) {
    dev.cavity.split_modes = false;
    dev.cavity.delta_em_ueV = 0.0;
    dev.name += "-nosplit";
    return dev;
}

SweepParameter sweep_parameter_from_string(const std::string& s) {
    if (s == "temperature") return SweepParameter::temperature;
    if (s == "kappa") return SweepParameter::kappa;
    if (s == "detuning") return SweepParameter::detuning;
    if (s == "purcell") return SweepParameter::purcell;
    throw std::invalid_argument("unknown sweep parameter: " + s);
}

std::string to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::temperature: return "temperature";
        case SweepParameter::kappa: return "kappa";
        case SweepParameter::detuning: return "detuning";
        case SweepParameter::purcell: return "purcell";
    }
    return "?";
}

void SweepSpec::validate() const {
    if (count < 2) throw std::invalid_argument("SweepSpec: count must be >= 2");
    if (!(hi > lo)) throw std::invalid_argument("SweepSpec: grid must be strictly increasing");
    if (fixed_nominal_purcell && !(nominal_purcell > 0.0)) {
        throw std::invalid_argument("SweepSpec: nominal Purcell factor must be > 0");
    }
}

std::vector<double> SweepSpec::grid() const {
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i) {
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return g;
}

namespace {

std::vector<double> psb_grid(const BudgetOptions& opt) {
    std::vector<double> g(opt.psb_points);
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = -opt.psb_window_ueV + 2.0 * opt.psb_window_ueV * static_cast<double>(i) /
                                         static_cast<double>(g.size() - 1);
    }
    return g;
}

struct BathContext {
    double eta{1.0};
    SpectrumGrid psb;
    double gamma_star_ueV{0.0};
};

BathContext make_context(const DeviceConfig& dev, double temperature_K, DephasingMode mode,
                         const BudgetOptions& budget) {
    PhononBath b = dev.bath;
    b.temperature_K = temperature_K;
    BathContext ctx;
    ctx.gamma_star_ueV =
        (mode == DephasingMode::zero) ? 0.0 : pure_dephasing_rate(dev.qd, temperature_K);
    ctx.eta = zpl_fraction(b, budget.spectrum.quad);
    const auto grid = psb_grid(budget);
    ctx.psb = sideband_spectrum(b, dev.qd.gamma0_per_ns, ctx.gamma_star_ueV, grid, budget.spectrum);
    return ctx;
}

SweepRow compute_row(const DeviceConfig& base, const SweepSpec& spec, double value,
                     const BathContext* shared_ctx) {
    SweepRow row;
    row.value = value;

    DeviceConfig dev = base;
    double temperature = spec.temperature_K;
    switch (spec.parameter) {
        case SweepParameter::temperature:
            temperature = value;
            break;
        case SweepParameter::kappa:
            dev.cavity.kappa_ueV = value;
            if (spec.fixed_nominal_purcell) {
                dev.cavity.g_ueV = 0.5 * std::sqrt(spec.nominal_purcell * value *
                                                   rate_to_energy(dev.qd.gamma0_per_ns));
            }
            break;
        case SweepParameter::detuning:
            dev.cavity.delta_ueV = value;
            break;
        case SweepParameter::purcell:
            dev.cavity.g_ueV = 0.5 * std::sqrt(value * dev.cavity.kappa_ueV *
                                               rate_to_energy(dev.qd.gamma0_per_ns));
            break;
    }

    BathContext local;
    const BathContext* ctx = shared_ctx;
    if (ctx == nullptr) {
        local = make_context(dev, temperature, spec.dephasing, spec.budget);
        ctx = &local;
    }

    const FullIndistinguishability r = full_spectrum_indistinguishability(
        dev.cavity, dev.qd, ctx->eta, ctx->psb, ctx->gamma_star_ueV, spec.solver);
    row.I_full = r.I_full;
    row.I_zpl = r.I_zpl;
    row.eta_zpl = ctx->eta;
    row.eta_zpl_cav = r.eta_zpl_cav;
    row.F_eff = r.F_eff;
    row.beta = r.beta;
    row.gamma_star_ueV = ctx->gamma_star_ueV;
    return row;
}

} // namespace

SimResult run_sweep(const DeviceConfig& device, const SweepSpec& spec) {
    device.validate();
    spec.validate();

    SimResult result;
    result.device = device;
    result.spec = spec;
    const auto grid = spec.grid();
    result.rows.resize(grid.size());

    // bath-dependent pieces are shared when the temperature is fixed
    BathContext shared;
    const BathContext* shared_ptr = nullptr;
    if (spec.parameter != SweepParameter::temperature) {
        shared = make_context(device, spec.temperature_K, spec.dephasing, spec.budget);
        shared_ptr = &shared;
    }

    unsigned jobs = spec.jobs != 0 ? spec.jobs : std::thread::hardware_concurrency();
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(grid.size())));

    auto work = [&](std::size_t i) {
        try {
            result.rows[i] = compute_row(device, spec, grid[i], shared_ptr);
        } catch (const std::exception& e) {
            SweepRow row;
            row.value = grid[i];
            row.I_full = row.I_zpl = row.eta_zpl = row.eta_zpl_cav = row.F_eff = row.beta =
                row.gamma_star_ueV = std::nan("");
            row.status = e.what();
            result.rows[i] = row;
        }
    };

    if (jobs == 1) {
        for (std::size_t i = 0; i < grid.size(); ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (unsigned w = 0; w < jobs; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= grid.size()) return;
                    work(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    return result;
}

std::pair<SimResult, SimResult> counterfactual_curves(const DeviceConfig& device,
                                                      const SweepSpec& spec) {
    SweepSpec full = spec;
    full.dephasing = DephasingMode::full;
    SweepSpec zero = spec;
    zero.dephasing = DephasingMode::zero;
    return {run_sweep(device, full), run_sweep(device, zero)};
}

std::string format_full(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const SimResult& result, std::ostream& os) {
    os << to_string(result.spec.parameter)
       << ",i_full,i_zpl,eta_zpl,eta_zpl_cav,f_eff,beta,gamma_star_uev,status\n";
    for (const auto& r : result.rows) {
        os << format_full(r.value) << ',' << format_full(r.I_full) << ',' << format_full(r.I_zpl)
           << ',' << format_full(r.eta_zpl) << ',' << format_full(r.eta_zpl_cav) << ','
           << format_full(r.F_eff) << ',' << format_full(r.beta) << ','
           << format_full(r.gamma_star_ueV) << ',' << r.status << '\n';
    }
}

void write_counterfactual_csv(const SimResult& full, const SimResult& zero, std::ostream& os) {
    if (full.rows.size() != zero.rows.size()) {
        throw std::invalid_argument("write_counterfactual_csv: mismatched tables");
    }
    os << to_string(full.spec.parameter)
       << ",i_full,i_full_no_dephasing,dephasing_penalty\n";
    for (std::size_t i = 0; i < full.rows.size(); ++i) {
        const double ratio = full.rows[i].I_full / zero.rows[i].I_full;
        os << format_full(full.rows[i].value) << ',' << format_full(full.rows[i].I_full) << ','
           << format_full(zero.rows[i].I_full) << ',' << format_full(ratio) << '\n';
    }
}

} // namespace qdcav
