#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "dpql/chain.hpp"
#include "dpql/dynamics.hpp"
#include "dpql/hamiltonian.hpp"
#include "dpql/species.hpp"

// Composite procedures on the molecule-atom-molecule chain: ground-state
// preparation, Bell and product-state generation by stretch-mode sweeps,
// the exchange (iSWAP) interaction, adiabatic splitting-difference transfer,
// phonon-based state detection, and the m_J optical-pumping analogue.
//
// Sweep bookkeeping. Both stretch modes scale together with the trap
// control, with the symmetric stretch (molecules moving oppositely, center
// ion at rest) below the antisymmetric stretch (molecules in phase). Rising
// frequencies therefore bring the antisymmetric mode through a molecular
// resonance first; falling frequencies bring the symmetric mode through
// first. Each adiabatic crossing exchanges |f, n> and |e, n+1>, so a phonon
// in the antisymmetric mode maps onto the higher-splitting molecule and the
// symmetric phonon onto the lower-splitting one, in either sweep direction.
// With molecule 2 carrying the larger splitting, detection realizes
// |psi_phonon> = beta |1_as, 0> + e^{i phi} alpha |0, 1_ss> for the
// molecular state alpha |fe> + beta |ef>.
namespace dpql {

enum class SeedMode { antisymmetric, symmetric };

struct StretchModes {
    int sym = 0;
    int antisym = 0;
};

// The two highest axial modes, labeled by the relative sign of the molecular
// components: in-phase = antisymmetric stretch, opposed = symmetric stretch.
inline StretchModes identify_stretch_modes(const NormalModes& modes, int ion_a, int ion_b) {
    const int n = modes.count();
    if (n < 3) throw std::invalid_argument("stretch modes: need at least three ions");
    StretchModes s;
    const int q1 = n - 2, q2 = n - 1;
    const bool q2_inphase = modes.vectors(ion_a, q2) * modes.vectors(ion_b, q2) > 0.0;
    s.antisym = q2_inphase ? q2 : q1;
    s.sym = q2_inphase ? q1 : q2;
    return s;
}

struct ProtocolContext {
    ChainSpec chain;
    NormalModes modes;            // at chain.reference_omega
    std::array<int, 2> molecule_ions{0, 2};
    StretchModes stretch;
    double omega_mol = 0.0;       // rad/s, mean doublet splitting
    double delta_mol = 0.0;       // rad/s, omega_mol(1) - omega_mol(2)
    double dipole_eff_cm = 0.0;
    double kappa = 2.0;
    int nmax = 6;
    bool rwa = false;
    double sweep_rate_up = 3.0e9;    // rad/s^2 on omega0
    double sweep_rate_down = 2.0e9;
    double margin = 0.0;             // rad/s clearance around the crossings
    double park_detuning = 0.0;      // rad/s, antisym mode below resonance for holds
    IntegratorOptions integ;

    double mode_ratio(int q) const { return modes.frequencies[q] / chain.reference_omega; }
};

// Canonical chain: molecular ion at each end, one atomic ion at the center.
inline ProtocolContext make_protocol_context(const std::string& molecule = "CaO+",
                                             const std::string& atom = "Ca+",
                                             double J = 3.5,
                                             double omega_mol = units::mhz_to_rad(5.0),
                                             double delta_mol = 0.0) {
    ProtocolContext ctx;
    const auto& mol = species(molecule);
    const double m_mol = units::amu_to_kg(mol.total_mass_amu());
    const double m_atom = units::amu_to_kg(atomic_ion_mass_amu(atom));
    ctx.chain.ions = {{m_mol, 1.0, IonTag::molecule, molecule},
                      {m_atom, 1.0, IonTag::atom, atom},
                      {m_mol, 1.0, IonTag::molecule, molecule}};
    ctx.chain.reference_omega = units::mhz_to_rad(1.0);
    ctx.chain.reference_mass_kg = m_mol;
    ctx.modes = solve_modes(ctx.chain);
    ctx.molecule_ions = {0, 2};
    ctx.stretch = identify_stretch_modes(ctx.modes, 0, 2);
    ctx.omega_mol = omega_mol;
    ctx.delta_mol = delta_mol;
    ctx.dipole_eff_cm = effective_dipole(units::debye_to_cm(mol.pdm_debye), J, J);
    ctx.margin = units::mhz_to_rad(0.9);
    ctx.park_detuning = units::mhz_to_rad(0.5);
    return ctx;
}

namespace detail {

// Two-qubit, two-mode simulation system: modes ordered (sym, antisym).
inline SystemSpec protocol_system(const ProtocolContext& ctx, double omega0_now) {
    SystemSpec s;
    s.omega_mol = {ctx.omega_mol, ctx.omega_mol};
    s.delta_weight = {0.5, -0.5};
    s.rwa = ctx.rwa;
    const double scale = omega0_now / ctx.chain.reference_omega;
    s.mode_omega = {ctx.mode_ratio(ctx.stretch.sym) * omega0_now,
                    ctx.mode_ratio(ctx.stretch.antisym) * omega0_now};
    s.g.resize(2, 2);
    const int qs[2] = {ctx.stretch.sym, ctx.stretch.antisym};
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            s.g(k, i) = coupling_g(ctx.dipole_eff_cm,
                                   ctx.modes.masses[ctx.molecule_ions[static_cast<size_t>(i)]],
                                   ctx.modes.frequencies[qs[k]] * scale,
                                   ctx.modes.vectors(ctx.molecule_ions[static_cast<size_t>(i)], qs[k]),
                                   ctx.kappa);
    return s;
}

inline HilbertLayout protocol_layout(const ProtocolContext& ctx) {
    return HilbertLayout::make(2, {ctx.nmax + 1, ctx.nmax + 1});
}

// start (all stretch modes below both splittings) and end (all above)
inline void sweep_endpoints(const ProtocolContext& ctx, double& w0_low, double& w0_high) {
    const double lo = ctx.omega_mol - 0.5 * std::abs(ctx.delta_mol) - ctx.margin;
    const double hi = ctx.omega_mol + 0.5 * std::abs(ctx.delta_mol) + ctx.margin;
    w0_low = lo / ctx.mode_ratio(ctx.stretch.antisym);
    w0_high = hi / ctx.mode_ratio(ctx.stretch.sym);
}

inline StateVector molecular_product_state(const HilbertLayout& lay,
                                           const Eigen::Vector4cd& psi_mol,
                                           const std::vector<int>& fock) {
    StateVector s = StateVector::zero(lay);
    int reg = 0;
    for (int b0 = 0; b0 < 2; ++b0)
        for (int b1 = 0; b1 < 2; ++b1, ++reg) {
            if (psi_mol[reg] == cd(0.0)) continue;
            auto basis = StateVector::basis(lay, {b0, b1}, fock);
            s.amplitudes += psi_mol[reg] * basis.amplitudes;
        }
    return s;
}

} // namespace detail

struct ProtocolOutcome {
    std::map<std::string, double> molecular_populations;  // ee, ef, fe, ff
    double occupation_sym = 0.0;
    double occupation_antisym = 0.0;
    double fidelity = 0.0;
    std::string target;
    nlohmann::json heralds;
    SimResult trace;
};

namespace detail {

inline ProtocolOutcome collect_outcome(const ProtocolContext& ctx, SimResult&& res,
                                       const std::string& target,
                                       const Eigen::Vector4cd& target_mol) {
    ProtocolOutcome out;
    const auto& fin = res.final_state;
    for (const char* pat : {"ee", "ef", "fe", "ff"})
        out.molecular_populations[pat] = population(fin, pat);
    const long last = static_cast<long>(res.times.size()) - 1;
    out.occupation_sym = res.mode_occupation(last, 0);
    out.occupation_antisym = res.mode_occupation(last, 1);
    if (target_mol.norm() > 0.0) {
        const MatrixXcd rho = reduced_qubit_density(fin);
        out.fidelity = (target_mol.adjoint() * rho * target_mol)(0, 0).real();
    }
    out.target = target;
    out.trace = std::move(res);
    return out;
}

inline Eigen::Vector4cd ket(const std::string& pattern) {
    Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
    const int idx = (pattern[0] == 'f' ? 2 : 0) + (pattern[1] == 'f' ? 1 : 0);
    v[idx] = 1.0;
    return v;
}

inline Eigen::Vector4cd bell_state(bool plus) {
    Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
    v[2] = 1.0 / std::sqrt(2.0);             // |fe>
    v[1] = (plus ? 1.0 : -1.0) / std::sqrt(2.0);  // |ef>
    return v;
}

} // namespace detail

// Upward sweep through both stretch resonances: converts any molecular
// excitation into stretch phonons and leaves |ee>. Starting from |ff> both
// excitations end in the antisymmetric mode (the first one through).
inline ProtocolOutcome prepare_ground(const ProtocolContext& ctx,
                                      const Eigen::Vector4cd& psi_mol) {
    double w0_low = 0.0, w0_high = 0.0;
    detail::sweep_endpoints(ctx, w0_low, w0_high);
    auto spec = detail::protocol_system(ctx, w0_low);
    ControlSchedule sched =
        ControlSchedule::linear_trap_sweep(w0_low, w0_high, ctx.sweep_rate_up, ctx.delta_mol);
    // crossing coupling evaluated at resonance, not at the sweep start
    const double g_res = g_mol_for_mode(ctx.modes, ctx.molecule_ions[0], ctx.stretch.sym,
                                        ctx.dipole_eff_cm, ctx.omega_mol, ctx.kappa);
    auto rep = sweep_adiabaticity_check(sched, spec, g_res);
    if (!rep.pass) throw std::runtime_error("prepare_ground: sweep fails the adiabaticity check");
    auto lay = detail::protocol_layout(ctx);
    auto psi0 = detail::molecular_product_state(lay, psi_mol, {0, 0});
    auto res = propagate_schrodinger(spec, sched, psi0, ctx.integ);
    auto out = detail::collect_outcome(ctx, std::move(res), "ee", detail::ket("ee"));
    out.heralds["two_phonon_antisym"] = out.occupation_antisym > 1.9;
    return out;
}

// Downward sweep with a seeded stretch phonon and equal splittings: the
// antisymmetric seed yields |psi+>, the symmetric seed |psi->.
inline ProtocolOutcome prepare_bell(const ProtocolContext& ctx, SeedMode seed) {
    if (std::abs(ctx.delta_mol) > 1e-6 * ctx.omega_mol)
        throw std::invalid_argument("prepare_bell: unequal splittings, use prepare_product");
    double w0_low = 0.0, w0_high = 0.0;
    detail::sweep_endpoints(ctx, w0_low, w0_high);
    auto spec = detail::protocol_system(ctx, w0_high);
    ControlSchedule sched =
        ControlSchedule::linear_trap_sweep(w0_high, w0_low, ctx.sweep_rate_down, 0.0);
    auto lay = detail::protocol_layout(ctx);
    const std::vector<int> fock = seed == SeedMode::antisymmetric ? std::vector<int>{0, 1}
                                                                  : std::vector<int>{1, 0};
    auto psi0 = detail::molecular_product_state(lay, detail::ket("ee"), fock);
    auto res = propagate_schrodinger(spec, sched, psi0, ctx.integ);
    const bool plus = seed == SeedMode::antisymmetric;
    return detail::collect_outcome(ctx, std::move(res), plus ? "psi+" : "psi-",
                                   detail::bell_state(plus));
}

// Downward sweep with distinct splittings: one-to-one phonon-to-molecule
// mapping. The antisymmetric seed excites the higher-splitting molecule.
inline ProtocolOutcome prepare_product(const ProtocolContext& ctx, SeedMode seed) {
    if (ctx.delta_mol == 0.0)
        throw std::invalid_argument("prepare_product: equal splittings, use prepare_bell");
    double w0_low = 0.0, w0_high = 0.0;
    detail::sweep_endpoints(ctx, w0_low, w0_high);
    auto spec = detail::protocol_system(ctx, w0_high);
    {
        // VDD must be negligible against the splitting difference
        auto park = detail::protocol_system(ctx, w0_high);
        auto p = vdd_params(park);
        if (std::abs(ctx.delta_mol) < 10.0 * std::abs(p.J12))
            throw std::invalid_argument("prepare_product: |delta_mol| < 10 |J12|");
    }
    ControlSchedule sched = ControlSchedule::linear_trap_sweep(w0_high, w0_low,
                                                               ctx.sweep_rate_down, ctx.delta_mol);
    auto lay = detail::protocol_layout(ctx);
    const std::vector<int> fock = seed == SeedMode::antisymmetric ? std::vector<int>{0, 1}
                                                                  : std::vector<int>{1, 0};
    auto psi0 = detail::molecular_product_state(lay, detail::ket("ee"), fock);
    auto res = propagate_schrodinger(spec, sched, psi0, ctx.integ);
    const bool mol1_higher = ctx.delta_mol > 0.0;
    const bool excite_mol1 = (seed == SeedMode::antisymmetric) == mol1_higher;
    const std::string target = excite_mol1 ? "fe" : "ef";
    return detail::collect_outcome(ctx, std::move(res), target, detail::ket(target));
}

enum class WaitPolicy { timed_pi, custom };

// Exchange gate: step the splitting difference to -delta_diff, hold, step
// back. Full transfer |fe> -> |ef> after t_pi = pi / (2 J12).
inline ProtocolOutcome iswap_exchange(const ProtocolContext& ctx,
                                      WaitPolicy policy = WaitPolicy::timed_pi,
                                      double custom_wait_s = 0.0,
                                      const Eigen::Vector4cd& psi_mol = detail::ket("fe")) {
    const double w0_park =
        (ctx.omega_mol - ctx.park_detuning) / ctx.mode_ratio(ctx.stretch.antisym);
    auto spec = detail::protocol_system(ctx, w0_park);
    auto vdd = vdd_params(spec);
    const double t_wait = policy == WaitPolicy::timed_pi ? vdd.t_pi() : custom_wait_s;
    const double delta_hold = ctx.delta_mol != 0.0 ? ctx.delta_mol : units::two_pi * 20e3;
    const double t_edge = 20e-6;

    ControlSchedule sched;
    sched.omega0_ref = w0_park;
    sched.trap.append_hold(w0_park, 2.0 * t_edge + t_wait);
    sched.delta.append_hold(delta_hold, t_edge);
    sched.delta.append_step_to(-vdd.delta_diff, t_wait);
    sched.delta.append_step_to(delta_hold, t_edge);
    sched.duration = 2.0 * t_edge + t_wait;

    auto lay = detail::protocol_layout(ctx);
    auto psi0 = detail::molecular_product_state(lay, psi_mol, {0, 0});
    auto res = propagate_schrodinger(spec, sched, psi0, ctx.integ);
    auto out = detail::collect_outcome(ctx, std::move(res), "ef", detail::ket("ef"));
    out.heralds["J12_rad_s"] = vdd.J12;
    out.heralds["t_pi_s"] = vdd.t_pi();
    out.heralds["delta_diff_rad_s"] = vdd.delta_diff;
    return out;
}

struct DeltaRampSpec {
    bool nonlinear = false;
    double delta0 = units::two_pi * 20e3;  // rad/s, ramp +delta0 -> -delta0
    double linear_rate = 0.0;              // rad/s^2 for the linear ramp
    double tan_adiabaticity = 1.0;         // c for the nonlinear ramp
};

// Adiabatic splitting-difference sweep from +delta0 to -delta0.
inline ProtocolOutcome adiabatic_delta_transfer(const ProtocolContext& ctx,
                                                const DeltaRampSpec& ramp) {
    const double w0_park =
        (ctx.omega_mol - ctx.park_detuning) / ctx.mode_ratio(ctx.stretch.antisym);
    auto spec = detail::protocol_system(ctx, w0_park);
    auto vdd = vdd_params(spec);
    if (std::abs(ramp.delta0) <= std::abs(vdd.delta_diff))
        throw std::invalid_argument("adiabatic_delta_transfer: |delta0| must exceed |delta_diff|");

    ControlSchedule sched;
    sched.omega0_ref = w0_park;
    if (ramp.nonlinear) {
        TanRamp tr;
        tr.J = std::abs(vdd.J12);
        tr.c = ramp.tan_adiabaticity;
        tr.delta0 = ramp.delta0;
        sched.delta.set_tan_ramp(tr);
        sched.duration = tr.duration();
    } else {
        if (ramp.linear_rate <= 0.0)
            throw std::invalid_argument("adiabatic_delta_transfer: linear ramp needs a rate");
        sched.delta.append_ramp_rate(ramp.delta0, -ramp.delta0, ramp.linear_rate);
        sched.duration = sched.delta.duration();
    }
    sched.trap.append_hold(w0_park, sched.duration);

    auto lay = detail::protocol_layout(ctx);
    auto psi0 = detail::molecular_product_state(lay, detail::ket("fe"), {0, 0});
    auto res = propagate_schrodinger(spec, sched, psi0, ctx.integ);
    auto out = detail::collect_outcome(ctx, std::move(res), "ef", detail::ket("ef"));
    out.heralds["J12_rad_s"] = vdd.J12;
    out.heralds["duration_s"] = sched.duration;
    if (!ramp.nonlinear)
        out.heralds["lz_prediction"] =
            1.0 - std::exp(-units::two_pi * vdd.J12 * vdd.J12 / ramp.linear_rate);
    return out;
}

// Upward sweep mapping alpha |fe> + beta |ef> onto a single stretch phonon.
// With molecule 2 the higher-splitting one (delta_mol < 0), the occupations
// are P(antisym) = |beta|^2 and P(sym) = |alpha|^2.
inline ProtocolOutcome detect_state(const ProtocolContext& ctx, cd alpha, cd beta) {
    if (ctx.delta_mol == 0.0)
        throw std::invalid_argument("detect_state: needs distinct splittings");
    {
        const double w0_park =
            (ctx.omega_mol - ctx.park_detuning) / ctx.mode_ratio(ctx.stretch.antisym);
        auto p = vdd_params(detail::protocol_system(ctx, w0_park));
        if (std::abs(ctx.delta_mol) < 10.0 * std::abs(p.J12))
            throw std::invalid_argument("detect_state: |delta_mol| < 10 |J12|");
    }
    const double norm = std::sqrt(std::norm(alpha) + std::norm(beta));
    alpha /= norm;
    beta /= norm;
    double w0_low = 0.0, w0_high = 0.0;
    detail::sweep_endpoints(ctx, w0_low, w0_high);
    auto spec = detail::protocol_system(ctx, w0_low);
    ControlSchedule sched =
        ControlSchedule::linear_trap_sweep(w0_low, w0_high, ctx.sweep_rate_up, ctx.delta_mol);
    auto lay = detail::protocol_layout(ctx);
    Eigen::Vector4cd mol = alpha * detail::ket("fe") + beta * detail::ket("ef");
    auto psi0 = detail::molecular_product_state(lay, mol, {0, 0});
    auto res = propagate_schrodinger(spec, sched, psi0, ctx.integ);
    auto out = detail::collect_outcome(ctx, std::move(res), "ee", detail::ket("ee"));
    // relative phonon phase: |psi_ph> = beta|1_as> + e^{i phi} alpha|1_ss>
    const auto& fin = out.trace.final_state;
    const int idx_as = 0 * lay.strides[0] + 1 * lay.strides[3];  // |ee, 0_ss, 1_as>
    const int idx_ss = 1 * lay.strides[2];                       // |ee, 1_ss, 0_as>
    const cd a_as = fin.amplitudes[idx_as], a_ss = fin.amplitudes[idx_ss];
    if (std::abs(alpha) > 1e-6 && std::abs(beta) > 1e-6)
        out.heralds["relative_phase_rad"] = std::arg((a_ss / alpha) * std::conj(a_as / beta));
    out.heralds["p_antisym"] = out.occupation_antisym;
    out.heralds["p_sym"] = out.occupation_sym;
    return out;
}

// ---------------------------------------------------------------------------
// m_J pumping: an idealized three-step transfer map on the (parity, m_J,
// phonon) populations. The stretched |e, m_J = J> state is the dark fixed
// point.
struct PumpSpec {
    double J = 1.5;
    double pulse_fidelity = 1.0;    // sigma+ pi-pulse swap
    double sweep_fidelity = 1.0;    // |f,m,n> -> |e,m,n+1> conversion
    double cooling_fidelity = 1.0;  // phonon reset
    std::vector<double> initial;    // optional: length 2*(2J+1), parity-major (e first)
};

struct PumpState {
    double J = 1.5;
    int m_count = 0;
    int n_count = 0;
    // populations indexed [parity(0=e,1=f)][m][n]
    std::vector<double> p;

    int idx(int parity, int m, int n) const { return (parity * m_count + m) * n_count + n; }
    double total() const {
        double s = 0.0;
        for (double v : p) s += v;
        return s;
    }
    double target_population() const {  // stretched e-parity state, any phonon
        double s = 0.0;
        for (int n = 0; n < n_count; ++n) s += p[idx(0, m_count - 1, n)];
        return s;
    }
};

inline PumpState pump_mj(const PumpSpec& spec, int cycles) {
    if (cycles < 0) throw std::invalid_argument("pump_mj: cycles must be >= 0");
    const int m_count = static_cast<int>(std::lround(2.0 * spec.J + 1.0));
    PumpState st;
    st.J = spec.J;
    st.m_count = m_count;
    st.n_count = cycles + 2;
    st.p.assign(static_cast<size_t>(2 * m_count * st.n_count), 0.0);
    if (spec.initial.empty()) {
        for (int par = 0; par < 2; ++par)
            for (int m = 0; m < m_count; ++m) st.p[st.idx(par, m, 0)] = 1.0 / (2.0 * m_count);
    } else {
        if (static_cast<int>(spec.initial.size()) != 2 * m_count)
            throw std::invalid_argument("pump_mj: initial distribution size mismatch");
        for (int par = 0; par < 2; ++par)
            for (int m = 0; m < m_count; ++m)
                st.p[st.idx(par, m, 0)] = spec.initial[static_cast<size_t>(par * m_count + m)];
    }

    for (int c = 0; c < cycles; ++c) {
        // (1) sigma+ pulse: swap (e, m-1, n) <-> (f, m, n)
        for (int m = 1; m < m_count; ++m)
            for (int n = 0; n < st.n_count; ++n) {
                const int a = st.idx(0, m - 1, n), b = st.idx(1, m, n);
                const double pa = st.p[a], pb = st.p[b];
                st.p[a] = (1.0 - spec.pulse_fidelity) * pa + spec.pulse_fidelity * pb;
                st.p[b] = (1.0 - spec.pulse_fidelity) * pb + spec.pulse_fidelity * pa;
            }
        // (2) sweep: |f, m, n> -> |e, m, n+1>
        for (int m = 0; m < m_count; ++m)
            for (int n = st.n_count - 2; n >= 0; --n) {
                const double moved = spec.sweep_fidelity * st.p[st.idx(1, m, n)];
                st.p[st.idx(1, m, n)] -= moved;
                st.p[st.idx(0, m, n + 1)] += moved;
            }
        // (3) sideband cooling: phonon reset
        for (int par = 0; par < 2; ++par)
            for (int m = 0; m < m_count; ++m)
                for (int n = 1; n < st.n_count; ++n) {
                    const double moved = spec.cooling_fidelity * st.p[st.idx(par, m, n)];
                    st.p[st.idx(par, m, n)] -= moved;
                    st.p[st.idx(par, m, 0)] += moved;
                }
    }
    return st;
}

} // namespace dpql
