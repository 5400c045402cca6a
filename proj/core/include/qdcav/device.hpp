// Device presets and parameter sweeps: temperature, cavity-linewidth (at
// fixed nominal Purcell), detuning and Purcell-factor scans, with
// zero-dephasing counterfactual pairs. Rows evaluate independently on a
// worker pool and serialize to CSV at full round-trip precision.

#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "qdcav/lindblad.hpp"

namespace qdcav {

struct DeviceConfig {
    std::string name;
    CavityParams cavity;
    QDParams qd;
    PhononBath bath;
    double fss_ueV{0.0};  // fine-structure splitting, recorded metadata

    void validate() const;
};

// Table-S1 presets
DeviceConfig device1();
DeviceConfig device2();
// bulk emitter (no cavity), same bath and QD parameters
DeviceConfig bulk_device();
// preset lookup: "device1" | "device2" | "bulk"; throws on unknown name
DeviceConfig device_by_name(const std::string& name);
// counterfactual with the cavity mode splitting suppressed (single mode, full g)
DeviceConfig without_mode_splitting(DeviceConfig dev);

enum class SweepParameter { temperature, kappa, detuning, purcell };
enum class DephasingMode { full, zero };

SweepParameter sweep_parameter_from_string(const std::string&);
std::string to_string(SweepParameter);

struct SweepSpec {
    SweepParameter parameter{SweepParameter::temperature};
    double lo{0.0};
    double hi{20.0};
    std::size_t count{21};
    bool fixed_nominal_purcell{false};  // kappa sweeps: g = sqrt(F kappa hbar gamma0)/2
    double nominal_purcell{24.0};
    DephasingMode dephasing{DephasingMode::full};
    double temperature_K{10.0};  // fixed temperature for non-temperature sweeps
    unsigned jobs{0};            // 0 = hardware concurrency
    SolverOptions solver{};
    BudgetOptions budget{};

    void validate() const;
    std::vector<double> grid() const;
};

struct SweepRow {
    double value{0.0};  // swept parameter value
    double I_full{0.0};
    double I_zpl{0.0};
    double eta_zpl{1.0};      // bulk ZPL weight
    double eta_zpl_cav{1.0};  // collected-channel ZPL fraction
    double F_eff{0.0};
    double beta{0.0};
    double gamma_star_ueV{0.0};
    std::string status{"ok"};  // per-point failures recorded here, never aborting the sweep
};

struct SimResult {
    DeviceConfig device;
    SweepSpec spec;
    std::vector<SweepRow> rows;
};

SimResult run_sweep(const DeviceConfig& device, const SweepSpec& spec);

// {full, zero-dephasing} pair on the same grid
std::pair<SimResult, SimResult> counterfactual_curves(const DeviceConfig& device,
                                                      const SweepSpec& spec);

// header + one row per grid point, fixed column order, %.17g values
void write_csv(const SimResult& result, std::ostream& os);
// paired table with the dephasing-penalty ratio column
void write_counterfactual_csv(const SimResult& full, const SimResult& zero, std::ostream& os);

// full round-trip decimal formatting used for all numeric output
std::string format_full(double v);

} // namespace qdcav
