#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dpql/config.hpp"
#include "dpql/molecule.hpp"
#include "dpql/noise.hpp"
#include "dpql/protocols.hpp"

// Experiment execution: config -> simulation -> result files. Outputs are
// deterministic for a fixed config and seed: map-ordered JSON, fixed float
// formatting, and aggregation ordered by point index regardless of worker
// scheduling.
namespace dpql {

inline constexpr int result_schema_version = 1;

namespace rundetail {
inline int& workers_storage() {
    static int workers = 1;
    return workers;
}
} // namespace rundetail

inline int runner_workers() { return rundetail::workers_storage(); }
inline void set_runner_workers(int n) { rundetail::workers_storage() = std::max(1, n); }

namespace rundetail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// index-ordered parallel map; results land by index so aggregation order
// never depends on scheduling
inline void parallel_for_indexed(size_t count, const std::function<void(size_t)>& fn) {
    const int workers = std::min<size_t>(static_cast<size_t>(runner_workers()), count);
    if (workers <= 1) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                errors[static_cast<size_t>(w)] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace rundetail

// ---------------------------------------------------------------------------
// config -> domain objects

inline ChainSpec chain_from_config(const ExperimentConfig& cfg,
                                   const std::vector<std::string>& fallback_ions) {
    ChainSpec chain;
    std::vector<std::string> ions = cfg.list("chain.ions");
    if (ions.empty()) ions = fallback_ions;
    for (const auto& tok : ions) {
        IonDef ion;
        if (!tok.empty() && (std::isdigit(static_cast<unsigned char>(tok.front())) ||
                             tok.front() == '.')) {
            const auto colon = tok.find(':');
            ion.mass_kg = units::amu_to_kg(std::stod(tok.substr(0, colon)));
            ion.charge_e = colon == std::string::npos ? 1.0 : std::stod(tok.substr(colon + 1));
            ion.tag = IonTag::atom;
            ion.label = tok;
        } else if (tok.find('O') != std::string::npos || tok.find('S') != std::string::npos) {
            const auto& sp = species(tok);
            ion.mass_kg = units::amu_to_kg(sp.total_mass_amu());
            ion.tag = IonTag::molecule;
            ion.label = tok;
        } else {
            ion.mass_kg = units::amu_to_kg(atomic_ion_mass_amu(tok));
            ion.tag = IonTag::atom;
            ion.label = tok;
        }
        chain.ions.push_back(ion);
    }
    const long ref = cfg.integer("chain.reference_ion", -1);
    size_t ref_idx = 0;
    if (ref >= 0) {
        ref_idx = static_cast<size_t>(ref);
        if (ref_idx >= chain.ions.size())
            throw ConfigError("config: chain.reference_ion out of range");
    } else {
        for (size_t i = 0; i < chain.ions.size(); ++i)
            if (chain.ions[i].tag == IonTag::molecule) {
                ref_idx = i;
                break;
            }
    }
    chain.reference_mass_kg = chain.ions[ref_idx].mass_kg;
    chain.reference_charge_e = chain.ions[ref_idx].charge_e;
    chain.reference_omega = units::mhz_to_rad(cfg.num("chain.omega0_mhz", 1.0));
    return chain;
}

inline double splitting_from_config(const ExperimentConfig& cfg, const MolecularConstants& mol,
                                    double J) {
    const std::string src = cfg.str("molecule.splitting_source", "published");
    if (src == "explicit") return units::mhz_to_rad(cfg.num("molecule.splitting_mhz", 5.0));
    if (src == "computed") {
        SigmaStateModel sigma;
        sigma.dr_e_angstrom = cfg.num("molecule.sigma_dre_angstrom", 0.10);
        return units::two_pi * lambda_doubling(mol, sigma).splitting(J);
    }
    const int jidx = static_cast<int>(std::lround(J - 1.5));
    if (jidx < 0 || jidx > 3)
        throw ConfigError("config: published splittings cover J = 3/2 .. 9/2 only");
    return units::mhz_to_rad(mol.lambda_split_mhz[static_cast<size_t>(jidx)]);
}

inline ProtocolContext protocol_context_from_config(const ExperimentConfig& cfg) {
    const std::string mol_name = cfg.str("molecule.species", "CaO+");
    const double J = cfg.num("molecule.J", 3.5);
    const auto& mol = species(mol_name);
    auto ctx = make_protocol_context(mol_name, "Ca+", J, splitting_from_config(cfg, mol, J),
                                     units::two_pi * 1e3 * cfg.num("molecule.delta_mol_khz", 0.0));
    if (cfg.has("chain.ions") || cfg.has("chain.omega0_mhz")) {
        ctx.chain = chain_from_config(cfg, {mol_name, "Ca+", mol_name});
        ctx.modes = solve_modes(ctx.chain);
        ctx.molecule_ions = {0, static_cast<int>(ctx.chain.ions.size()) - 1};
        ctx.stretch = identify_stretch_modes(ctx.modes, ctx.molecule_ions[0], ctx.molecule_ions[1]);
    }
    ctx.dipole_eff_cm = effective_dipole(units::debye_to_cm(mol.pdm_debye), J,
                                         cfg.num("molecule.m_J", J));
    ctx.kappa = cfg.num("molecule.kappa", 2.0);
    ctx.nmax = static_cast<int>(cfg.integer("simulation.nmax", 6));
    ctx.rwa = cfg.flag("simulation.rwa", false);
    ctx.sweep_rate_up = cfg.num("protocol.sweep_rate_up", 3.0e9);
    ctx.sweep_rate_down = cfg.num("protocol.sweep_rate_down", 2.0e9);
    ctx.margin = units::mhz_to_rad(cfg.num("protocol.margin_mhz", 0.9));
    ctx.park_detuning = units::mhz_to_rad(cfg.num("protocol.park_mhz", 0.4));
    ctx.integ.phase_per_step = cfg.num("simulation.phase_per_step", 0.1);
    ctx.integ.max_records = static_cast<int>(cfg.integer("simulation.max_records", 1200));
    ctx.integ.record_snapshots = cfg.flag("simulation.snapshots", false);
    return ctx;
}

inline Eigen::Vector4cd initial_molecular_state(const std::string& token) {
    using detail::ket;
    if (token == "ee" || token == "ef" || token == "fe" || token == "ff") return ket(token);
    if (token == "superposition_ef_fe")
        return std::sqrt(2.0 / 3.0) * ket("ef") +
               std::sqrt(1.0 / 3.0) * std::exp(cd(0.0, units::pi / 4.0)) * ket("fe");
    if (token == "psi+") return detail::bell_state(true);
    if (token == "psi-") return detail::bell_state(false);
    throw ConfigError("config: protocol.initial has no state named " + token);
}

// ---------------------------------------------------------------------------
// serialization

inline std::string sim_result_csv(const SimResult& res) {
    std::string csv = "time_s";
    for (int i = 0; i < res.qubit_excitation.cols(); ++i)
        csv += ",excitation_mol" + std::to_string(i + 1);
    for (int q = 0; q < res.mode_occupation.cols(); ++q)
        csv += ",n_mode" + std::to_string(q + 1);
    csv += "\n";
    for (size_t k = 0; k < res.times.size(); ++k) {
        csv += rundetail::fmt(res.times[k]);
        for (int i = 0; i < res.qubit_excitation.cols(); ++i)
            csv += "," + rundetail::fmt(res.qubit_excitation(static_cast<long>(k), i));
        for (int q = 0; q < res.mode_occupation.cols(); ++q)
            csv += "," + rundetail::fmt(res.mode_occupation(static_cast<long>(k), q));
        csv += "\n";
    }
    return csv;
}

struct ExperimentSummary {
    nlohmann::json scalars;      // flat values for grid aggregation
    nlohmann::json detail;       // structured output
    std::string csv;             // primary CSV artifact
    std::string timeseries_csv;  // SimResult trace when a single run is behind the summary
};

// ---------------------------------------------------------------------------
// kinds

namespace rundetail {

inline ExperimentSummary run_sweep(const ExperimentConfig& cfg) {
    const std::string mol_name = cfg.str("molecule.species", "CaO+");
    ChainSpec chain = chain_from_config(cfg, {"Ca+", mol_name});
    auto modes = solve_modes(chain);
    int mol_ion = 0;
    for (size_t i = 0; i < chain.ions.size(); ++i)
        if (chain.ions[i].tag == IonTag::molecule) mol_ion = static_cast<int>(i);
    const std::string mode_name = cfg.str("sweep.mode", "stretch");
    int mode = modes.count() - 1;
    if (mode_name == "com") mode = 0;
    else if (mode_name != "stretch") mode = static_cast<int>(std::stol(mode_name));

    const auto& mol = species(mol_name);
    const double J = cfg.num("molecule.J", 1.5);
    const double omega_mol = splitting_from_config(cfg, mol, J);
    const double d_eff = effective_dipole(units::debye_to_cm(mol.pdm_debye), J,
                                          cfg.num("molecule.m_J", J));
    const double kappa = cfg.num("molecule.kappa", 2.0);
    const double g_mol = g_mol_for_mode(modes, mol_ion, mode, d_eff, omega_mol, kappa);

    const double w_from = units::mhz_to_rad(cfg.num("sweep.from_mhz", 0.3));
    const double w_to = units::mhz_to_rad(cfg.num("sweep.to_mhz", 0.6));
    std::vector<double> rates = cfg.numbers("sweep.rate_list");
    if (rates.empty()) rates = {cfg.num("sweep.rate", 1e9)};
    std::vector<double> gammas = cfg.numbers("sweep.heating_rates");
    if (gammas.empty()) gammas = {0.0};
    const int nmax = static_cast<int>(cfg.integer("simulation.nmax", 6));
    const bool rwa = cfg.flag("simulation.rwa", true);
    auto lay = HilbertLayout::make(1, {nmax + 1});

    struct Row {
        double gamma = 0.0, rate = 0.0, p_flip = 0.0, p_lz = 0.0;
        std::string error;
    };
    std::vector<Row> rows(rates.size() * gammas.size());
    std::vector<std::string> ts(rows.size());

    parallel_for_indexed(rows.size(), [&](size_t idx) {
        Row& row = rows[idx];
        row.gamma = gammas[idx / rates.size()];
        row.rate = rates[idx % rates.size()];
        row.p_lz = 1.0 - std::exp(-units::two_pi * (g_mol / 2.0) * (g_mol / 2.0) / row.rate);
        try {
            const double ratio = modes.frequencies[mode] / chain.reference_omega;
            SystemSpec spec;
            spec.omega_mol = {omega_mol};
            spec.mode_omega = {w_from};
            spec.g = Eigen::MatrixXd::Constant(
                1, 1,
                g_mol * std::pow(w_from / omega_mol, 1.5) *
                    (modes.vectors(mol_ion, mode) >= 0 ? 1.0 : -1.0));
            spec.rwa = rwa;
            ControlSchedule sched = ControlSchedule::linear_trap_sweep(
                w_from / ratio, w_to / ratio, row.rate / ratio);
            IntegratorOptions opt;
            opt.phase_per_step = cfg.num("simulation.phase_per_step", 0.1);
            opt.max_records = static_cast<int>(cfg.integer("simulation.max_records", 256));
            if (row.gamma == 0.0) {
                auto res =
                    propagate_schrodinger(spec, sched, StateVector::basis(lay, {1}, {0}), opt);
                row.p_flip = 1.0 - population(res.final_state, "f");
                if (rows.size() == 1) ts[idx] = sim_result_csv(res);
            } else {
                auto rho0 = DensityMatrix::from_state(StateVector::basis(lay, {1}, {0}));
                auto res = propagate_lindblad(spec, sched, rho0, HeatingSpec{{row.gamma}}, opt);
                const long last = static_cast<long>(res.times.size()) - 1;
                row.p_flip = 1.0 - res.qubit_excitation(last, 0);
                if (rows.size() == 1) ts[idx] = sim_result_csv(res);
            }
        } catch (const std::exception& ex) {
            row.error = ex.what();
        }
    });

    ExperimentSummary out;
    std::string csv = "gamma_quanta_s,sweep_rate_rad_s2,flip_probability,landau_zener,error\n";
    for (const auto& r : rows)
        csv += fmt(r.gamma) + "," + fmt(r.rate) + "," + fmt(r.p_flip) + "," + fmt(r.p_lz) + "," +
               r.error + "\n";
    out.csv = std::move(csv);
    if (rows.size() == 1) out.timeseries_csv = ts[0];
    out.scalars["flip_probability"] = rows.back().p_flip;
    out.scalars["landau_zener"] = rows.back().p_lz;
    out.detail["g_mol_rad_s"] = g_mol;
    out.detail["omega_mol_rad_s"] = omega_mol;
    out.detail["mode"] = mode;
    out.detail["points"] = rows.size();
    return out;
}

inline ExperimentSummary run_protocol(const ExperimentConfig& cfg) {
    const std::string kind = cfg.str("experiment.kind");
    auto ctx = protocol_context_from_config(cfg);
    ProtocolOutcome out;
    if (kind == "prep_ground") {
        out = prepare_ground(ctx, initial_molecular_state(cfg.str("protocol.initial", "ee")));
    } else if (kind == "prep_bell") {
        out = prepare_bell(ctx, cfg.str("protocol.seed_mode", "antisymmetric") == "symmetric"
                                    ? SeedMode::symmetric
                                    : SeedMode::antisymmetric);
    } else if (kind == "prep_product") {
        out = prepare_product(ctx, cfg.str("protocol.seed_mode", "antisymmetric") == "symmetric"
                                       ? SeedMode::symmetric
                                       : SeedMode::antisymmetric);
    } else if (kind == "iswap") {
        const bool timed = cfg.str("protocol.wait", "timed_pi") == "timed_pi";
        out = iswap_exchange(ctx, timed ? WaitPolicy::timed_pi : WaitPolicy::custom,
                             cfg.num("protocol.wait_s", 0.0),
                             initial_molecular_state(cfg.str("protocol.initial", "fe")));
    } else if (kind == "adiabatic_delta") {
        DeltaRampSpec ramp;
        ramp.nonlinear = cfg.str("protocol.ramp", "tan") == "tan";
        ramp.delta0 = units::two_pi * 1e3 * cfg.num("protocol.delta0_khz", 20.0);
        ramp.linear_rate = cfg.num("protocol.ramp_rate", 0.0);
        ramp.tan_adiabaticity = cfg.num("protocol.ramp_c", 1.0);
        out = adiabatic_delta_transfer(ctx, ramp);
    } else if (kind == "detect") {
        out = detect_state(ctx, cfg.num("protocol.alpha", 1.0), cfg.num("protocol.beta", 0.0));
    } else {
        throw ConfigError("config: unhandled protocol kind " + kind);
    }

    ExperimentSummary sum;
    sum.scalars["fidelity"] = out.fidelity;
    for (const auto& [pat, p] : out.molecular_populations) sum.scalars["p_" + pat] = p;
    sum.scalars["n_sym"] = out.occupation_sym;
    sum.scalars["n_antisym"] = out.occupation_antisym;
    sum.detail["target"] = out.target;
    sum.detail["heralds"] = out.heralds;
    sum.detail["norm_drift"] = out.trace.norm_drift;
    sum.detail["max_top_fock"] = out.trace.max_top_fock;
    sum.timeseries_csv = sim_result_csv(out.trace);
    std::string csv = "quantity,value\nfidelity," + fmt(out.fidelity) + "\n";
    for (const auto& [pat, p] : out.molecular_populations) csv += "p_" + pat + "," + fmt(p) + "\n";
    csv += "n_sym," + fmt(out.occupation_sym) + "\nn_antisym," + fmt(out.occupation_antisym) + "\n";
    sum.csv = std::move(csv);
    return sum;
}

inline ExperimentSummary run_vdd(const ExperimentConfig& cfg) {
    auto ctx = protocol_context_from_config(cfg);
    const double w0_park =
        (ctx.omega_mol - ctx.park_detuning) / ctx.mode_ratio(ctx.stretch.antisym);
    auto spec = detail::protocol_system(ctx, w0_park);
    auto p = vdd_params(spec);
    ExperimentSummary sum;
    sum.scalars["J12_rad_s"] = p.J12;
    sum.scalars["delta_diff_rad_s"] = p.delta_diff;
    sum.scalars["t_pi_s"] = p.t_pi();
    sum.detail["delta_mol_rad_s"] = p.delta_mol;
    sum.detail["delta_tot_rad_s"] = p.delta_tot;
    sum.detail["stark_mol1_rad_s"] = p.stark_mol[0];
    sum.detail["stark_mol2_rad_s"] = p.stark_mol[1];
    std::string csv = "time_s,flop_probability\n";
    const double t_end = 2.5 * p.t_pi();
    for (int k = 0; k <= 400; ++k) {
        const double t = t_end * k / 400.0;
        csv += fmt(t) + "," + fmt(rabi_probability(p, t)) + "\n";
    }
    sum.csv = std::move(csv);
    return sum;
}

inline ExperimentSummary run_pump(const ExperimentConfig& cfg) {
    PumpSpec spec;
    spec.J = cfg.num("pump.J", 1.5);
    spec.pulse_fidelity = cfg.num("pump.pulse_fidelity", 1.0);
    spec.sweep_fidelity = cfg.num("pump.sweep_fidelity", 1.0);
    spec.cooling_fidelity = cfg.num("pump.cooling_fidelity", 1.0);
    const int cycles = static_cast<int>(cfg.integer("pump.cycles", 4));
    ExperimentSummary sum;
    std::string csv = "cycle,target_population\n";
    double final_pop = 0.0;
    for (int c = 0; c <= cycles; ++c) {
        auto st = pump_mj(spec, c);
        final_pop = st.target_population();
        csv += std::to_string(c) + "," + fmt(final_pop) + "\n";
    }
    auto st = pump_mj(spec, cycles);
    nlohmann::json pops = nlohmann::json::array();
    for (int par = 0; par < 2; ++par)
        for (int m = 0; m < st.m_count; ++m) {
            double p = 0.0;
            for (int n = 0; n < st.n_count; ++n) p += st.p[st.idx(par, m, n)];
            pops.push_back({{"parity", par == 0 ? "e" : "f"},
                            {"m_J", -spec.J + m},
                            {"population", p}});
        }
    sum.csv = std::move(csv);
    sum.scalars["target_population"] = final_pop;
    sum.detail["sublevels"] = std::move(pops);
    return sum;
}

inline ExperimentSummary run_noise(const ExperimentConfig& cfg) {
    const auto& mol = species(cfg.str("molecule.species", "CaO+"));
    const double wz = units::two_pi * 1e3 * cfg.num("noise.omega_z_khz", 450.0);
    auto spec = NoiseSpec::from_heating_rate(cfg.num("noise.gamma_star", 300.0), wz,
                                             units::amu_to_kg(mol.total_mass_amu()),
                                             cfg.num("noise.temperature_k", 300.0));
    const double J = cfg.num("molecule.J", 3.5);
    const double split_hz = splitting_from_config(cfg, mol, J) / units::two_pi;
    auto rep = internal_transition_rate(spec, mol, J, split_hz,
                                        cfg.num("molecule.dmu_dr_debye_per_angstrom", 6.0));
    ExperimentSummary sum;
    sum.scalars["heating_total"] = rep.heating_total;
    sum.scalars["internal_rate"] = rep.internal_rate;
    sum.scalars["blackbody_rate"] = rep.blackbody_rate;
    sum.detail["heating_quadrupole"] = rep.heating_quadrupole;
    sum.detail["heating_uniform"] = rep.heating_uniform;
    sum.detail["rho_h_at_omega_z"] = rep.rho_h_at_omega_z;
    sum.detail["metadata"] = rep.metadata;
    std::string csv = "quantity,value\nheating_total," + fmt(rep.heating_total) +
                      "\ninternal_rate," + fmt(rep.internal_rate) + "\nblackbody_rate," +
                      fmt(rep.blackbody_rate) + "\n";
    sum.csv = std::move(csv);
    return sum;
}

inline ExperimentSummary run_modes(const ExperimentConfig& cfg) {
    const std::string mol_name = cfg.str("molecule.species", "CaO+");
    ChainSpec chain = chain_from_config(cfg, {mol_name, "Ca+", mol_name});
    auto modes = solve_modes(chain);
    const auto& mol = species(mol_name);
    const double J = cfg.num("molecule.J", 3.5);
    const double omega_mol = splitting_from_config(cfg, mol, J);
    const double d_eff = effective_dipole(units::debye_to_cm(mol.pdm_debye), J,
                                          cfg.num("molecule.m_J", J));
    ExperimentSummary sum;
    std::string csv = "mode,frequency_mhz";
    for (size_t i = 0; i < chain.ions.size(); ++i) csv += ",b_ion" + std::to_string(i + 1);
    for (size_t i = 0; i < chain.ions.size(); ++i)
        if (chain.ions[i].tag == IonTag::molecule)
            csv += ",g_ion" + std::to_string(i + 1) + "_khz";
    csv += "\n";
    for (int q = 0; q < modes.count(); ++q) {
        csv += std::to_string(q) + "," + fmt(units::rad_to_mhz(modes.frequencies[q]));
        for (size_t i = 0; i < chain.ions.size(); ++i) csv += "," + fmt(modes.vectors(static_cast<int>(i), q));
        for (size_t i = 0; i < chain.ions.size(); ++i)
            if (chain.ions[i].tag == IonTag::molecule) {
                auto cs = coupling(modes, static_cast<int>(i), d_eff, omega_mol,
                                   cfg.num("molecule.kappa", 2.0));
                csv += "," + fmt(cs.g[q] / units::two_pi / 1e3);
            }
        csv += "\n";
    }
    sum.csv = std::move(csv);
    sum.scalars["mode_count"] = modes.count();
    nlohmann::json pos = nlohmann::json::array();
    for (int i = 0; i < static_cast<int>(chain.ions.size()); ++i)
        pos.push_back(modes.equilibrium_positions[i]);
    sum.detail["equilibrium_positions_m"] = std::move(pos);
    return sum;
}

inline ExperimentSummary run_tables(const ExperimentConfig& cfg) {
    std::vector<double> temps = cfg.numbers("tables.temperatures");
    if (temps.empty()) temps = {4.0, 300.0};
    SigmaStateModel sigma;
    sigma.dr_e_angstrom = cfg.num("molecule.sigma_dre_angstrom", 0.10);
    ExperimentSummary sum;
    std::string csv =
        "species,A_SO_cm,B_e_cm,omega_e_cm,D_e_eV,PDM_D,T_e_cm,J,split_pub_mhz,split_calc_mhz,"
        "split_dev,pop4K_pub_pct,pop4K_calc_pct,pop4K_dev,pop300K_pub_pct,pop300K_calc_pct,"
        "pop300K_dev\n";
    const double js[4] = {1.5, 2.5, 3.5, 4.5};
    for (const auto& s : species_table()) {
        auto ld = lambda_doubling(s, sigma);
        for (int k = 0; k < 4; ++k) {
            const double calc = ld.splitting(js[k]) / 1e6;
            const double pub = s.lambda_split_mhz[static_cast<size_t>(k)];
            const double p4 = thermal_population(s, 4.0, js[k]) * 100.0;
            const double p300 = thermal_population(s, 300.0, js[k]) * 100.0;
            const double pub4 = s.pop_4k_pct[static_cast<size_t>(k)];
            const double pub300 = s.pop_300k_pct[static_cast<size_t>(k)];
            csv += s.name + "," + fmt(s.A_so_cm) + "," + fmt(s.B_e_cm) + "," + fmt(s.omega_e_cm) +
                   "," + fmt(s.D_e_ev) + "," + fmt(s.pdm_debye) + "," + fmt(s.T_e_cm) + "," +
                   fmt(js[k]) + "," + fmt(pub) + "," + fmt(calc) + "," +
                   fmt(pub > 0 ? (calc - pub) / pub : 0.0) + "," + fmt(pub4) + "," + fmt(p4) +
                   "," + fmt(pub4 > 0 ? (p4 - pub4) / pub4 : 0.0) + "," + fmt(pub300) + "," +
                   fmt(p300) + "," + fmt(pub300 > 0 ? (p300 - pub300) / pub300 : 0.0) + "\n";
        }
    }
    sum.csv = std::move(csv);
    sum.scalars["species_count"] = species_table().size();
    return sum;
}

} // namespace rundetail

inline ExperimentSummary execute_experiment(const ExperimentConfig& cfg) {
    const std::string kind = cfg.str("experiment.kind");
    if (kind == "sweep") return rundetail::run_sweep(cfg);
    if (kind == "prep_ground" || kind == "prep_bell" || kind == "prep_product" ||
        kind == "iswap" || kind == "adiabatic_delta" || kind == "detect")
        return rundetail::run_protocol(cfg);
    if (kind == "vdd") return rundetail::run_vdd(cfg);
    if (kind == "pump") return rundetail::run_pump(cfg);
    if (kind == "noise") return rundetail::run_noise(cfg);
    if (kind == "modes") return rundetail::run_modes(cfg);
    if (kind == "tables") return rundetail::run_tables(cfg);
    throw ConfigError("config: experiment.kind is required");
}

struct RunArtifacts {
    std::filesystem::path csv_path;
    std::filesystem::path json_path;
    std::filesystem::path timeseries_path;
    ExperimentSummary summary;
};

inline RunArtifacts run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    RunArtifacts art;
    art.summary = execute_experiment(cfg);
    fs::create_directories(out_dir);
    const std::string prefix =
        cfg.str("experiment.out_prefix", cfg.str("experiment.label", "experiment"));
    art.csv_path = fs::path(out_dir) / (prefix + ".csv");
    art.json_path = fs::path(out_dir) / (prefix + ".json");
    std::ofstream(art.csv_path, std::ios::binary) << art.summary.csv;
    if (!art.summary.timeseries_csv.empty()) {
        art.timeseries_path = fs::path(out_dir) / (prefix + "_timeseries.csv");
        std::ofstream(art.timeseries_path, std::ios::binary) << art.summary.timeseries_csv;
    }
    nlohmann::json j;
    j["schema_version"] = result_schema_version;
    j["config"] = cfg.to_json();
    j["config_hash"] = cfg.hash();
    j["seed"] = cfg.integer("experiment.seed", 0);
    if (cfg.has("experiment.figure")) j["figure"] = cfg.str("experiment.figure");
    j["scalars"] = art.summary.scalars;
    j["detail"] = art.summary.detail;
    std::ofstream(art.json_path, std::ios::binary) << j.dump(2) << "\n";
    return art;
}

// ---------------------------------------------------------------------------
// parameter grids

struct GridSpec {
    std::string parameter;
    std::vector<double> values;
    std::string parameter2;        // optional second axis
    std::vector<double> values2;
    long max_points = 10000;

    static GridSpec from_config(const ExperimentConfig& cfg) {
        GridSpec g;
        g.parameter = cfg.str("grid.parameter");
        if (g.parameter.empty()) throw ConfigError("config: grid.parameter is required");
        g.values = cfg.numbers("grid.values");
        if (g.values.empty()) throw ConfigError("config: grid.values is required");
        g.parameter2 = cfg.str("grid.parameter2");
        g.values2 = cfg.numbers("grid.values2");
        if (!g.parameter2.empty() && g.values2.empty())
            throw ConfigError("config: grid.values2 is required with grid.parameter2");
        g.max_points = cfg.integer("grid.max_points", 10000);
        const size_t n = g.values.size() * std::max<size_t>(1, g.values2.size());
        if (static_cast<long>(n) > g.max_points)
            throw ConfigError("config: grid exceeds grid.max_points");
        return g;
    }
};

struct GridResult {
    std::string table_csv;
    nlohmann::json rows;
};

// One row per grid point, ordered by (outer axis, inner axis) index; failed
// points carry their error string and the run continues.
inline GridResult run_grid(const ExperimentConfig& base, const GridSpec& grid) {
    const size_t n2 = std::max<size_t>(1, grid.values2.size());
    const size_t count = grid.values.size() * n2;
    struct Row {
        double v1 = 0.0, v2 = 0.0;
        nlohmann::json scalars;
        std::string error;
    };
    std::vector<Row> rows(count);

    rundetail::parallel_for_indexed(count, [&](size_t idx) {
        const size_t i2 = idx / grid.values.size();
        const size_t i1 = idx % grid.values.size();
        Row& row = rows[idx];
        row.v1 = grid.values[i1];
        row.v2 = grid.values2.empty() ? 0.0 : grid.values2[i2];
        try {
            ExperimentConfig cfg = base.with(grid.parameter, rundetail::fmt(row.v1));
            if (!grid.parameter2.empty())
                cfg = cfg.with(grid.parameter2, rundetail::fmt(row.v2));
            row.scalars = execute_experiment(cfg).scalars;
        } catch (const std::exception& ex) {
            row.error = ex.what();
        }
    });

    // stable, scheduling-independent column set and ordering
    std::vector<std::string> cols;
    for (const auto& r : rows)
        for (auto it = r.scalars.begin(); it != r.scalars.end(); ++it)
            if (std::find(cols.begin(), cols.end(), it.key()) == cols.end())
                cols.push_back(it.key());
    std::sort(cols.begin(), cols.end());

    GridResult out;
    std::string csv = grid.parameter;
    if (!grid.parameter2.empty()) csv += "," + grid.parameter2;
    for (const auto& c : cols) csv += "," + c;
    csv += ",error\n";
    out.rows = nlohmann::json::array();
    for (const auto& r : rows) {
        csv += rundetail::fmt(r.v1);
        if (!grid.parameter2.empty()) csv += "," + rundetail::fmt(r.v2);
        nlohmann::json jr;
        jr[grid.parameter] = r.v1;
        if (!grid.parameter2.empty()) jr[grid.parameter2] = r.v2;
        for (const auto& c : cols) {
            if (r.scalars.contains(c)) {
                csv += "," + rundetail::fmt(r.scalars[c].get<double>());
                jr[c] = r.scalars[c];
            } else {
                csv += ",";
            }
        }
        csv += "," + r.error + "\n";
        if (!r.error.empty()) jr["error"] = r.error;
        out.rows.push_back(std::move(jr));
    }
    out.table_csv = std::move(csv);
    return out;
}

} // namespace dpql
