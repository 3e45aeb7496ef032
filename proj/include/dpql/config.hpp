#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpql/units.hpp"

// Experiment configuration: a strict INI-style key-value format. Keys live
// under [section] headers and are addressed as "section.key". Unknown keys
// are rejected by name; silent typos in physics parameters are the failure
// mode this guards against.
namespace dpql {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

using KeyValues = std::map<std::string, std::string>;

inline KeyValues parse_config_text(const std::string& text) {
    KeyValues kv;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": malformed section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        if (kv.count(full)) throw ConfigError("config: duplicate key " + full);
        kv[full] = val;
    }
    return kv;
}

// Registry of every key the tool understands.
inline const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys = {
        "experiment.kind", "experiment.label", "experiment.figure", "experiment.seed",
        "experiment.out_prefix",
        "chain.ions", "chain.reference_ion", "chain.omega0_mhz",
        "molecule.species", "molecule.J", "molecule.m_J", "molecule.splitting_source",
        "molecule.splitting_mhz", "molecule.delta_mol_khz", "molecule.kappa",
        "molecule.sigma_dre_angstrom", "molecule.dmu_dr_debye_per_angstrom",
        "simulation.nmax", "simulation.rwa", "simulation.phase_per_step",
        "simulation.max_records", "simulation.snapshots",
        "sweep.mode", "sweep.from_mhz", "sweep.to_mhz", "sweep.rate", "sweep.rate_list",
        "sweep.heating_rates",
        "protocol.sweep_rate_up", "protocol.sweep_rate_down", "protocol.margin_mhz",
        "protocol.park_mhz", "protocol.initial", "protocol.seed_mode", "protocol.alpha",
        "protocol.beta", "protocol.ramp", "protocol.ramp_rate", "protocol.ramp_c",
        "protocol.delta0_khz", "protocol.wait", "protocol.wait_s",
        "pump.J", "pump.cycles", "pump.pulse_fidelity", "pump.sweep_fidelity",
        "pump.cooling_fidelity",
        "noise.gamma_star", "noise.omega_z_khz", "noise.temperature_k",
        "tables.temperatures",
        "grid.parameter", "grid.values", "grid.parameter2", "grid.values2", "grid.max_points",
    };
    return keys;
}

struct ExperimentConfig {
    KeyValues kv;

    static ExperimentConfig from_keys(KeyValues keys) {
        for (const auto& [k, v] : keys) {
            const auto& reg = known_config_keys();
            if (std::find(reg.begin(), reg.end(), k) == reg.end())
                throw ConfigError("config: unknown key " + k);
        }
        ExperimentConfig c;
        c.kv = std::move(keys);
        c.validate();
        return c;
    }
    static ExperimentConfig from_text(const std::string& text) {
        return from_keys(parse_config_text(text));
    }

    bool has(const std::string& key) const { return kv.count(key) != 0; }
    std::string str(const std::string& key, const std::string& fallback = "") const {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    }
    double num(const std::string& key, double fallback) const {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        try {
            size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (...) {
            throw ConfigError("config: " + key + " is not a number: " + it->second);
        }
    }
    long integer(const std::string& key, long fallback) const {
        const double v = num(key, double(fallback));
        if (v != std::floor(v)) throw ConfigError("config: " + key + " must be an integer");
        return static_cast<long>(v);
    }
    bool flag(const std::string& key, bool fallback) const {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw ConfigError("config: " + key + " must be true/false");
    }
    std::vector<std::string> list(const std::string& key) const {
        std::vector<std::string> out;
        auto it = kv.find(key);
        if (it == kv.end()) return out;
        std::istringstream in(it->second);
        std::string tok;
        while (std::getline(in, tok, ',')) {
            const auto a = tok.find_first_not_of(" \t");
            const auto b = tok.find_last_not_of(" \t");
            if (a != std::string::npos) out.push_back(tok.substr(a, b - a + 1));
        }
        return out;
    }
    std::vector<double> numbers(const std::string& key) const {
        std::vector<double> out;
        for (const auto& s : list(key)) {
            // log:lo:hi:n expands to a log-spaced grid
            if (s.rfind("log:", 0) == 0) {
                std::istringstream in(s.substr(4));
                std::string a, b, c;
                std::getline(in, a, ':');
                std::getline(in, b, ':');
                std::getline(in, c, ':');
                const double lo = std::stod(a), hi = std::stod(b);
                const int n = std::stoi(c);
                if (n < 2 || lo <= 0.0 || hi <= lo)
                    throw ConfigError("config: bad log range in " + key);
                for (int k = 0; k < n; ++k)
                    out.push_back(lo * std::pow(hi / lo, double(k) / (n - 1)));
                continue;
            }
            try {
                out.push_back(std::stod(s));
            } catch (...) {
                throw ConfigError("config: " + key + " has a non-numeric entry: " + s);
            }
        }
        return out;
    }

    void validate() const {
        const std::string kind = str("experiment.kind");
        static const std::vector<std::string> kinds = {
            "sweep", "prep_ground", "prep_bell", "prep_product", "iswap", "adiabatic_delta",
            "detect", "pump", "noise", "modes", "tables", "vdd", ""};
        if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
            throw ConfigError("config: experiment.kind has no mode named " + kind);
        // chain ion list: species names or mass[:charge] numbers
        if (has("chain.ions")) {
            const auto ions = list("chain.ions");
            if (ions.empty()) throw ConfigError("config: chain.ions must not be empty");
            for (size_t i = 0; i < ions.size(); ++i) {
                const auto& tok = ions[i];
                if (!tok.empty() && (std::isdigit(tok.front()) || tok.front() == '-' ||
                                     tok.front() == '.')) {
                    const auto colon = tok.find(':');
                    const std::string mass_s = tok.substr(0, colon);
                    double mass = 0.0;
                    try {
                        mass = std::stod(mass_s);
                    } catch (...) {
                        throw ConfigError("config: chain.ions[" + std::to_string(i) +
                                          "].mass is not a number");
                    }
                    if (mass <= 0.0)
                        throw ConfigError("config: chain.ions[" + std::to_string(i) +
                                          "].mass must be positive");
                    if (colon != std::string::npos) {
                        double q = 0.0;
                        try {
                            q = std::stod(tok.substr(colon + 1));
                        } catch (...) {
                            throw ConfigError("config: chain.ions[" + std::to_string(i) +
                                              "].charge is not a number");
                        }
                        if (q <= 0.0)
                            throw ConfigError("config: chain.ions[" + std::to_string(i) +
                                              "].charge must be positive");
                    }
                }
            }
        }
        if (num("chain.omega0_mhz", 1.0) <= 0.0)
            throw ConfigError("config: chain.omega0_mhz must be positive");
        if (has("molecule.splitting_source")) {
            const std::string s = str("molecule.splitting_source");
            if (s != "published" && s != "computed" && s != "explicit")
                throw ConfigError("config: molecule.splitting_source must be "
                                  "published/computed/explicit");
        }
        if (integer("simulation.nmax", 6) < 1)
            throw ConfigError("config: simulation.nmax must be >= 1");
        if (integer("grid.max_points", 10000) < 1)
            throw ConfigError("config: grid.max_points must be >= 1");
    }

    // canonical serialization: sorted key = value lines
    std::string canonical() const {
        std::string out;
        for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
        return out;
    }
    uint64_t hash() const {
        uint64_t h = 1469598103934665603ULL;
        for (unsigned char c : canonical()) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        return h;
    }
    nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [k, v] : kv) j[k] = v;
        return j;
    }
    ExperimentConfig with(const std::string& key, const std::string& value) const {
        KeyValues copy = kv;
        copy[key] = value;
        return from_keys(std::move(copy));
    }
};

} // namespace dpql
