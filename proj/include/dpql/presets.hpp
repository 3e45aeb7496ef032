#pragma once

#include <string>
#include <vector>

#include "dpql/config.hpp"

// Built-in experiment presets. Each names the figure it reproduces in its
// metadata; `dpql <subcommand> --preset NAME` starts from one of these and
// --config overlays individual keys.
namespace dpql {

inline std::vector<std::string> preset_names() {
    return {"fig5a", "fig5b", "figS1a", "figS1b", "figS1c", "figS1d",
            "figS2a", "figS2b", "figS2c", "figS2d", "figS3a", "figS3c",
            "detect_default", "pump_default", "noise_default", "modes_default",
            "vdd_default", "tables"};
}

inline ExperimentConfig make_preset(const std::string& name) {
    KeyValues kv;
    kv["experiment.label"] = name;
    kv["experiment.out_prefix"] = name;
    kv["experiment.seed"] = "1";
    auto protocol_common = [&](double delta_khz) {
        kv["chain.ions"] = "CaO+, Ca+, CaO+";
        kv["chain.omega0_mhz"] = "1.0";
        kv["molecule.species"] = "CaO+";
        kv["molecule.J"] = "3.5";
        kv["molecule.splitting_source"] = "published";
        kv["molecule.delta_mol_khz"] = delta_khz == 0.0 ? "0" : "20";
        kv["simulation.nmax"] = "6";
    };
    if (name == "fig5a" || name == "fig5b") {
        kv["experiment.kind"] = "sweep";
        kv["experiment.figure"] = name == "fig5a" ? "5a" : "5b";
        kv["chain.ions"] = "Ca+, CaO+";
        kv["chain.omega0_mhz"] = "1.0";
        kv["molecule.species"] = "CaO+";
        kv["molecule.splitting_source"] = "published";
        kv["sweep.mode"] = "stretch";
        kv["sweep.heating_rates"] = "0, 10, 100";
        kv["simulation.rwa"] = "true";
        if (name == "fig5a") {
            kv["molecule.J"] = "1.5";
            kv["sweep.from_mhz"] = "0.3";
            kv["sweep.to_mhz"] = "0.6";
            kv["sweep.rate_list"] = "log:2.4e8:2.4e10:10";
            kv["simulation.nmax"] = "12";
        } else {
            kv["molecule.J"] = "3.5";
            kv["sweep.from_mhz"] = "3.0";
            kv["sweep.to_mhz"] = "7.0";
            kv["sweep.rate_list"] = "log:1.6e10:1.6e12:12";
            kv["simulation.nmax"] = "5";
        }
        return ExperimentConfig::from_keys(std::move(kv));
    }
    if (name.rfind("figS1", 0) == 0) {
        kv["experiment.kind"] = "prep_ground";
        kv["experiment.figure"] = "S1" + name.substr(5);
        const bool ff = name == "figS1b" || name == "figS1d";
        const bool split = name == "figS1c" || name == "figS1d";
        protocol_common(split ? 20.0 : 0.0);
        kv["protocol.initial"] = ff ? "ff" : "superposition_ef_fe";
        kv["protocol.sweep_rate_up"] = "3.0e9";
        return ExperimentConfig::from_keys(std::move(kv));
    }
    if (name.rfind("figS2", 0) == 0) {
        const bool product = name == "figS2c" || name == "figS2d";
        kv["experiment.kind"] = product ? "prep_product" : "prep_bell";
        kv["experiment.figure"] = "S2" + name.substr(5);
        protocol_common(product ? 20.0 : 0.0);
        kv["protocol.seed_mode"] =
            (name == "figS2a" || name == "figS2c") ? "antisymmetric" : "symmetric";
        kv["protocol.sweep_rate_down"] = "2.0e9";
        return ExperimentConfig::from_keys(std::move(kv));
    }
    if (name == "figS3a") {
        kv["experiment.kind"] = "iswap";
        kv["experiment.figure"] = "S3a";
        protocol_common(20.0);
        kv["protocol.initial"] = "fe";
        kv["protocol.wait"] = "timed_pi";
        kv["protocol.park_mhz"] = "0.4";
        return ExperimentConfig::from_keys(std::move(kv));
    }
    if (name == "figS3c") {
        kv["experiment.kind"] = "adiabatic_delta";
        kv["experiment.figure"] = "S3c";
        protocol_common(0.0);
        kv["protocol.ramp"] = "tan";
        kv["protocol.ramp_c"] = "1.0";
        kv["protocol.delta0_khz"] = "20";
        kv["protocol.park_mhz"] = "0.4";
        return ExperimentConfig::from_keys(std::move(kv));
    }
    if (name == "detect_default") {
        kv["experiment.kind"] = "detect";
        protocol_common(-20.0);
        kv["molecule.delta_mol_khz"] = "-20";
        kv["protocol.alpha"] = "0.5773502691896258";  // sqrt(1/3)
        kv["protocol.beta"] = "0.816496580927726";    // sqrt(2/3)
        return ExperimentConfig::from_keys(std::move(kv));
    }
    if (name == "pump_default") {
        kv["experiment.kind"] = "pump";
        kv["pump.J"] = "1.5";
        kv["pump.cycles"] = "4";
        return ExperimentConfig::from_keys(std::move(kv));
    }
    if (name == "noise_default") {
        kv["experiment.kind"] = "noise";
        kv["molecule.species"] = "CaO+";
        kv["molecule.J"] = "3.5";
        kv["molecule.splitting_source"] = "published";
        kv["noise.gamma_star"] = "300";
        kv["noise.omega_z_khz"] = "450";
        kv["noise.temperature_k"] = "300";
        return ExperimentConfig::from_keys(std::move(kv));
    }
    if (name == "modes_default") {
        kv["experiment.kind"] = "modes";
        kv["chain.ions"] = "CaO+, Ca+, CaO+";
        kv["chain.omega0_mhz"] = "1.0";
        kv["molecule.J"] = "3.5";
        return ExperimentConfig::from_keys(std::move(kv));
    }
    if (name == "vdd_default") {
        kv["experiment.kind"] = "vdd";
        protocol_common(0.0);
        kv["protocol.park_mhz"] = "0.4";
        return ExperimentConfig::from_keys(std::move(kv));
    }
    if (name == "tables") {
        kv["experiment.kind"] = "tables";
        return ExperimentConfig::from_keys(std::move(kv));
    }
    throw ConfigError("unknown preset: " + name);
}

} // namespace dpql
