#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "dpql/species.hpp"
#include "dpql/units.hpp"

// Derived molecular structure: Morse potentials, vibrational wavefunctions by
// grid diagonalization, Franck-Condon factors, lambda-doubling constants and
// splittings, thermal rotational populations, Zeeman shifts, and blackbody
// rotational kinetics.
namespace dpql {

struct MorsePotential {
    double depth_j = 0.0;     // well depth D
    double range_inv_m = 0.0; // range parameter a
    double r_e_m = 0.0;       // equilibrium distance
    double mu_kg = 0.0;       // reduced mass

    double value(double r) const {
        const double u = 1.0 - std::exp(-range_inv_m * (r - r_e_m));
        return depth_j * u * u;
    }
    // harmonic frequency implied by (D, a, mu), rad/s
    double omega_harmonic() const { return range_inv_m * std::sqrt(2.0 * depth_j / mu_kg); }
    int bound_level_count() const {
        const double lam = std::sqrt(2.0 * mu_kg * depth_j) / (range_inv_m * units::hbar);
        return static_cast<int>(std::floor(lam - 0.5)) + 1;
    }
};

// R_e from B_e = hbar / (4 pi c mu R_e^2), with B_e in cm^-1.
inline double r_e_from_rotational_constant(double B_e_cm, double mu_kg) {
    return std::sqrt(units::hbar / (4.0 * units::pi * units::c_light * 100.0 * B_e_cm * mu_kg));
}

inline MorsePotential morse_from_constants(const MolecularConstants& c, double mu_kg,
                                           double r_e_m = 0.0) {
    if (c.omega_e_cm <= 0.0 || c.D_e_ev <= 0.0 || mu_kg <= 0.0)
        throw std::invalid_argument("morse_from_constants: nonphysical parameters");
    MorsePotential m;
    m.depth_j = units::ev_to_joule(c.D_e_ev);
    m.mu_kg = mu_kg;
    m.r_e_m = r_e_m > 0.0 ? r_e_m : r_e_from_rotational_constant(c.B_e_cm, mu_kg);
    const double w = units::cm1_to_rad(c.omega_e_cm);
    m.range_inv_m = w * std::sqrt(mu_kg / (2.0 * m.depth_j));
    return m;
}

// Vibrational levels and wavefunctions on a shared uniform grid.
struct VibrationalLevels {
    Eigen::VectorXd grid_m;
    double dx = 0.0;
    Eigen::VectorXd energies_j;  // v = 0..vmax
    Eigen::MatrixXd wavefunctions;  // columns = v, normalized sum |psi|^2 dx = 1
};

namespace detail {
inline VibrationalLevels solve_on_grid(const MorsePotential& pot, int vmax,
                                       const Eigen::VectorXd& grid) {
    const int n = static_cast<int>(grid.size());
    const double dx = grid[1] - grid[0];
    const double t = units::hbar * units::hbar / (2.0 * pot.mu_kg * dx * dx);
    std::vector<double> diag(n), sub(n - 1, -t);
    for (int i = 0; i < n; ++i) diag[i] = pot.value(grid[i]) + 2.0 * t;

    const int nev = vmax + 1;
    std::vector<double> w(n), zv(static_cast<size_t>(n) * nev);
    std::vector<lapack_int> isuppz(2 * static_cast<size_t>(nev));
    lapack_int mfound = 0;
    const lapack_int info = LAPACKE_dstevr(
        LAPACK_COL_MAJOR, 'V', 'I', n, diag.data(), sub.data(), 0.0, 0.0, 1, nev, 0.0,
        &mfound, w.data(), zv.data(), n, isuppz.data());
    if (info != 0 || mfound < nev) throw std::runtime_error("vibrational solve failed");

    VibrationalLevels out;
    out.grid_m = grid;
    out.dx = dx;
    out.energies_j = Eigen::Map<Eigen::VectorXd>(w.data(), nev);
    out.wavefunctions = Eigen::Map<Eigen::MatrixXd>(zv.data(), n, nev) / std::sqrt(dx);
    return out;
}
} // namespace detail

// Grid covering the classically allowed region of both potentials up to
// E_max = hbar*omega*(vmax + 3), padded for tunneling tails.
inline Eigen::VectorXd shared_grid(const MorsePotential& a, const MorsePotential& b, int vmax,
                                   int npts = 2400) {
    auto turning = [&](const MorsePotential& p) {
        const double emax = std::min(0.9 * p.depth_j,
                                     units::hbar * p.omega_harmonic() * (vmax + 3.0));
        const double s = std::sqrt(emax / p.depth_j);
        const double inner = p.r_e_m - std::log(1.0 + s) / p.range_inv_m;
        const double outer = p.r_e_m - std::log(1.0 - s) / p.range_inv_m;
        return std::pair<double, double>{inner, outer};
    };
    auto [ia, oa] = turning(a);
    auto [ib, ob] = turning(b);
    const double pad = 0.35 * (std::max(oa, ob) - std::min(ia, ib));
    const double lo = std::max(1e-12, std::min(ia, ib) - 0.6 * pad);
    const double hi = std::max(oa, ob) + pad;
    return Eigen::VectorXd::LinSpaced(npts, lo, hi);
}

inline VibrationalLevels solve_vibrational(const MorsePotential& pot, int vmax, int npts = 2400) {
    if (vmax + 1 > pot.bound_level_count())
        throw std::invalid_argument("solve_vibrational: unbound level requested");
    return detail::solve_on_grid(pot, vmax, shared_grid(pot, pot, vmax, npts));
}

// |<v_upper | v'_lower>|^2 from numerically integrated wavefunctions.
inline double franck_condon(const MorsePotential& upper, const MorsePotential& lower, int v,
                            int vp, int npts = 2400) {
    if (v + 1 > upper.bound_level_count() || vp + 1 > lower.bound_level_count())
        throw std::invalid_argument("franck_condon: unbound level requested");
    const int vmax = std::max(v, vp);
    const Eigen::VectorXd grid = shared_grid(upper, lower, vmax, npts);
    const auto su = detail::solve_on_grid(upper, vmax, grid);
    const auto sl = detail::solve_on_grid(lower, vmax, grid);
    const double ov = su.wavefunctions.col(v).dot(sl.wavefunctions.col(vp)) * su.dx;
    return ov * ov;
}

// ---------------------------------------------------------------------------
// Lambda doubling

// Model of the perturbing 2Sigma+ state. Only the Pi-Sigma interval T_e is
// tabulated; the Sigma curve shape defaults to the Pi curve with the
// equilibrium distance pulled in by dr_e (the Sigma state binds tighter).
struct SigmaStateModel {
    double dr_e_angstrom = 0.10;
    double omega_scale = 1.0;
    double depth_scale = 1.0;
    int vmax = 19;
    int grid_points = 2400;
};

struct LambdaDoubling {
    double p_v_cm = 0.0;
    double q_v_cm = 0.0;
    double amplitude_cm = 0.0;     // C in splitting = |C| (J-1/2)(J+1/2)(J+3/2)
    bool e_below_f = true;
    std::map<double, double> splitting_hz;  // J -> |splitting|

    double splitting(double J) const {
        return std::abs(amplitude_cm) * (J - 0.5) * (J + 0.5) * (J + 1.5) * units::wavenumber_hz;
    }
};

// p_v, q_v from the vibronic perturbation sums with A_SO(R), B(R) frozen at
// R_e and pure-precession matrix elements <Pi|L+|Sigma> = sqrt(2) hbar. The
// cubic-in-J splitting amplitude follows from second-order S-uncoupling of
// the Omega=3/2 component against Omega=1/2.
inline LambdaDoubling lambda_doubling_from_fcfs(const MolecularConstants& c,
                                                const std::vector<double>& fcfs,
                                                double e_pi0_cm,
                                                const std::vector<double>& e_sigma_cm,
                                                const std::vector<double>& J_list = {1.5, 2.5, 3.5, 4.5}) {
    if (fcfs.size() != e_sigma_cm.size())
        throw std::invalid_argument("lambda_doubling: FCF/energy size mismatch");
    double fsum = 0.0, s = 0.0;
    for (size_t k = 0; k < fcfs.size(); ++k) {
        const double den = e_pi0_cm - e_sigma_cm[k];
        if (std::abs(den) < 0.01 * c.omega_e_cm)
            throw std::runtime_error("lambda_doubling: Pi-Sigma vibronic near-degeneracy for " + c.name);
        fsum += fcfs[k];
        s += fcfs[k] / den;
    }
    if (fsum < 0.999)
        throw std::invalid_argument("lambda_doubling: FCF sum below completeness threshold");

    LambdaDoubling ld;
    ld.p_v_cm = 4.0 * c.A_so_cm * c.B_e_cm * s;
    ld.q_v_cm = 4.0 * c.B_e_cm * c.B_e_cm * s;
    const double da = c.A_so_cm - 2.0 * c.B_e_cm;
    ld.amplitude_cm = 2.0 * c.B_e_cm * ld.q_v_cm / da +
                      c.B_e_cm * c.B_e_cm * (ld.p_v_cm + 2.0 * ld.q_v_cm) / (da * da);
    // Sigma above Pi pushes e below f; a sign flip of the net amplitude
    // (Sigma below) inverts the ordering.
    ld.e_below_f = ld.amplitude_cm > 0.0;
    for (double J : J_list) ld.splitting_hz[J] = ld.splitting(J);
    return ld;
}

inline LambdaDoubling lambda_doubling(const MolecularConstants& c,
                                      const SigmaStateModel& sigma = {},
                                      const std::vector<double>& J_list = {1.5, 2.5, 3.5, 4.5}) {
    const double mu = c.reduced_mass_kg();
    const MorsePotential pi = morse_from_constants(c, mu);
    MorsePotential sg = pi;
    sg.r_e_m = pi.r_e_m - sigma.dr_e_angstrom * 1e-10;
    sg.depth_j *= sigma.depth_scale;
    sg.range_inv_m *= sigma.omega_scale / std::sqrt(sigma.depth_scale);

    const Eigen::VectorXd grid = shared_grid(pi, sg, sigma.vmax, sigma.grid_points);
    const auto spi = detail::solve_on_grid(pi, 0, grid);
    const auto ssg = detail::solve_on_grid(sg, sigma.vmax, grid);

    std::vector<double> fcfs(static_cast<size_t>(sigma.vmax) + 1);
    std::vector<double> esig(fcfs.size());
    for (int v = 0; v <= sigma.vmax; ++v) {
        const double ov = spi.wavefunctions.col(0).dot(ssg.wavefunctions.col(v)) * spi.dx;
        fcfs[static_cast<size_t>(v)] = ov * ov;
        esig[static_cast<size_t>(v)] = c.T_e_cm + ssg.energies_j[v] / units::wavenumber_joule;
    }
    return lambda_doubling_from_fcfs(c, fcfs, spi.energies_j[0] / units::wavenumber_joule, esig,
                                     J_list);
}

// ---------------------------------------------------------------------------
// Thermal rotational populations: Boltzmann over the 2Pi_3/2 ladder,
// degeneracy 2(2J+1), energies B_e (J(J+1) - Omega^2).
inline double thermal_population(const MolecularConstants& c, double temperature_k, double J,
                                 double J_cutoff = 400.5) {
    if (temperature_k <= 0.0) throw std::invalid_argument("thermal_population: T must be > 0");
    constexpr double omega = 1.5;
    auto energy = [&](double j) {
        return units::cm1_to_joule(c.B_e_cm * (j * (j + 1.0) - omega * omega));
    };
    const double e0 = energy(1.5);
    double z = 0.0, wj = 0.0;
    for (double j = 1.5; j <= J_cutoff; j += 1.0) {
        const double w = 2.0 * (2.0 * j + 1.0) *
                         std::exp(-(energy(j) - e0) / (units::k_boltzmann * temperature_k));
        z += w;
        if (j == J) wj = w;
    }
    return wj / z;
}

// ---------------------------------------------------------------------------
// Zeeman structure. Base case (a) g-factor g_J = Omega (Lambda + 2 Sigma) /
// (J(J+1)); the parity-dependent part delta_g (Hz/Gauss) splits e and f so
// that the doublet frequency shifts by 2 delta_g B m_J.
struct ZeemanSpec {
    double delta_g_hz_per_gauss = 0.0;
    double field_gauss = 0.0;
    double J = 1.5;
    double g_J = 0.0;
    std::map<std::pair<char, double>, double> level_shift_hz;  // (parity, m_J)

    double splitting_shift_hz(double m_J) const {
        return 2.0 * delta_g_hz_per_gauss * field_gauss * m_J;
    }
    double adjacent_mj_offset_hz() const {
        return g_J * units::bohr_magneton_hz_per_gauss * field_gauss;
    }
};

inline ZeemanSpec zeeman_shifts(double delta_g_hz_per_gauss, double field_gauss, double J) {
    if (field_gauss < 0.0) throw std::invalid_argument("zeeman_shifts: B must be >= 0");
    ZeemanSpec zs;
    zs.delta_g_hz_per_gauss = delta_g_hz_per_gauss;
    zs.field_gauss = field_gauss;
    zs.J = J;
    zs.g_J = 1.5 * (1.0 + 2.0 * 0.5) / (J * (J + 1.0));  // Omega=3/2, Lambda=1, Sigma=1/2
    const double base = zs.g_J * units::bohr_magneton_hz_per_gauss * field_gauss;
    for (double m = -J; m <= J + 0.1; m += 1.0) {
        zs.level_shift_hz[{'e', m}] = (base - delta_g_hz_per_gauss * field_gauss) * m;
        zs.level_shift_hz[{'f', m}] = (base + delta_g_hz_per_gauss * field_gauss) * m;
    }
    return zs;
}

// Splitting difference between two molecules in a field gradient.
inline double delta_mol_from_gradient(double delta_g_hz_per_gauss, double gradient_t_per_cm,
                                      double separation_m, double m_J) {
    const double db_gauss = gradient_t_per_cm / 1e-4 / 1e-2 * separation_m;  // G
    return 2.0 * delta_g_hz_per_gauss * db_gauss * m_J;
}

// ---------------------------------------------------------------------------
// Blackbody rotational kinetics. Case (a) 2Pi_3/2 ladder with Hoenl-London
// line strengths; spontaneous plus blackbody-stimulated rates. States (v, J)
// with v in {0, 1}: at room temperature absorption on the fundamental band
// dominates the depopulation and freezes out at cryogenic temperature.
struct BlackbodyModel {
    double temperature_k = 0.0;
    double J_max = 0.5;
    std::vector<std::pair<int, double>> states;  // (v, J)
    Eigen::MatrixXd generator;                   // rows sum to zero; G(i,j) = rate i->j for i!=j
    double dmu_dr_d_per_angstrom = 6.0;

    int index_of(int v, double J) const {
        for (size_t i = 0; i < states.size(); ++i)
            if (states[i].first == v && std::abs(states[i].second - J) < 1e-9)
                return static_cast<int>(i);
        throw std::out_of_range("blackbody: state not in model");
    }
    double lifetime_s(double J, int v = 0) const {
        const int i = index_of(v, J);
        const double out = -generator(i, i);
        return out > 0.0 ? 1.0 / out : std::numeric_limits<double>::infinity();
    }
};

namespace detail {
inline double planck_nbar(double nu_hz, double temperature_k) {
    if (temperature_k <= 0.0 || nu_hz <= 0.0) return 0.0;
    const double x = units::h_planck * nu_hz / (units::k_boltzmann * temperature_k);
    if (x > 700.0) return 0.0;
    return 1.0 / std::expm1(x);
}
// spontaneous emission for transition dipole mu2 (C m)^2 at nu with line
// strength fraction s (already divided by upper-state degeneracy)
inline double einstein_a(double nu_hz, double mu2, double s) {
    return 16.0 * units::pi * units::pi * units::pi * nu_hz * nu_hz * nu_hz * mu2 * s /
           (3.0 * units::eps0 * units::h_planck * units::c_light * units::c_light *
            units::c_light);
}
} // namespace detail

inline BlackbodyModel blackbody_rates(const MolecularConstants& c, double temperature_k,
                                      double J_max = 20.5, double dmu_dr_d_per_angstrom = 6.0) {
    if (temperature_k < 0.0) throw std::invalid_argument("blackbody_rates: T must be >= 0");
    constexpr double omega = 1.5;
    BlackbodyModel m;
    m.temperature_k = temperature_k;
    m.J_max = J_max;
    m.dmu_dr_d_per_angstrom = dmu_dr_d_per_angstrom;
    for (int v = 0; v <= 1; ++v)
        for (double J = omega; J <= J_max + 0.1; J += 1.0) m.states.emplace_back(v, J);
    const int n = static_cast<int>(m.states.size());
    m.generator = Eigen::MatrixXd::Zero(n, n);
    auto add_pair = [&](int lo, int hi, double a_spont, double nu, double glo, double ghi) {
        const double nb = detail::planck_nbar(nu, temperature_k);
        m.generator(hi, lo) += a_spont * (1.0 + nb);            // emission
        m.generator(lo, hi) += a_spont * nb * ghi / glo;        // absorption
    };

    const double mu_pdm = units::debye_to_cm(c.pdm_debye);
    const double b_hz = c.B_e_cm * units::wavenumber_hz;
    // rotational ladder within each v (same B; vibration-rotation coupling ignored)
    for (int v = 0; v <= 1; ++v) {
        for (double J = omega + 1.0; J <= J_max + 0.1; J += 1.0) {
            const double nu = b_hz * (J * (J + 1.0) - (J - 1.0) * J);
            const double s_p = (J * J - omega * omega) / J;  // P branch from upper J
            const double a = detail::einstein_a(nu, mu_pdm * mu_pdm, s_p / (2.0 * J + 1.0));
            add_pair(m.index_of(v, J - 1.0), m.index_of(v, J), a, nu, 2.0 * J - 1.0,
                     2.0 * J + 1.0);
        }
    }
    // fundamental vibrational band, v=0 <-> v=1, R/P/Q branches
    const double nu_vib = c.omega_e_cm * units::wavenumber_hz;
    const double x0 = std::sqrt(units::hbar / (2.0 * c.reduced_mass_kg() *
                                               units::cm1_to_rad(c.omega_e_cm)));
    const double mu01 = dmu_dr_d_per_angstrom * units::debye / 1e-10 * x0;
    for (double J1 = omega; J1 <= J_max + 0.1; J1 += 1.0) {
        // branches from upper state (v=1, J1) down to (v=0, J0)
        const double sr = ((J1 + 1.0) * (J1 + 1.0) - omega * omega) / (J1 + 1.0);
        const double sq = (2.0 * J1 + 1.0) * omega * omega / (J1 * (J1 + 1.0));
        const double sp = (J1 * J1 - omega * omega) / J1;
        struct Br { double J0, s; };
        for (const Br& br : {Br{J1 + 1.0, sr}, Br{J1, sq}, Br{J1 - 1.0, sp}}) {
            if (br.J0 < omega - 0.1 || br.J0 > J_max + 0.1 || br.s <= 0.0) continue;
            const double nu = nu_vib + b_hz * (J1 * (J1 + 1.0) - br.J0 * (br.J0 + 1.0));
            const double a = detail::einstein_a(nu, mu01 * mu01, br.s / (2.0 * J1 + 1.0));
            add_pair(m.index_of(0, br.J0), m.index_of(1, J1), a, nu, 2.0 * br.J0 + 1.0,
                     2.0 * J1 + 1.0);
        }
    }
    for (int i = 0; i < n; ++i) {
        double out = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i) out += m.generator(i, j);
        m.generator(i, i) = -out;
    }
    return m;
}

} // namespace dpql
