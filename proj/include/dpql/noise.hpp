#pragma once

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "dpql/chain.hpp"
#include "dpql/molecule.hpp"
#include "dpql/species.hpp"
#include "dpql/units.hpp"

// Electric-field-noise analysis: motional heating near the ground state from
// uniform-field and quadrupole (spring-constant) noise, the spectral energy
// density seen by the molecular dipole, and the induced internal transition
// rate compared against blackbody thermalization.
namespace dpql {

struct NoiseSpec {
    // uniform-field noise PSD, (V/m)^2/Hz, quoted at omega_z and extrapolated
    // with a power law below the crossover, flat above
    double s_zeta_ref = 0.0;
    double power_law_exponent = -0.6;
    double crossover = units::two_pi * 100e6;  // rad/s
    double s_eps_ref = 0.0;   // fractional spring-constant noise PSD, 1/Hz, at 2 omega_z
    double omega_z = 0.0;     // rad/s axial secular frequency
    double mass_kg = 0.0;
    double charge_c = units::elementary_charge;
    double gamma_star = 0.0;  // quanta/s, measured uniform-field heating rate
    double temperature_k = 300.0;

    void validate() const {
        if (s_zeta_ref < 0.0 || s_eps_ref < 0.0)
            throw std::invalid_argument("noise: PSDs must be >= 0");
        if (omega_z <= 0.0 || mass_kg <= 0.0)
            throw std::invalid_argument("noise: omega_z and mass must be positive");
    }
    double s_zeta(double omega) const {
        if (omega <= 0.0) throw std::invalid_argument("noise: omega must be positive");
        const double w = std::min(omega, crossover);
        return s_zeta_ref * std::pow(w / omega_z, power_law_exponent);
    }
    // S_zeta(omega_z) implied by a measured heating rate
    static double s_zeta_from_heating(double gamma_star, double mass_kg, double omega_z,
                                      double charge_c = units::elementary_charge) {
        return 2.0 * mass_kg * units::hbar * omega_z * gamma_star / (charge_c * charge_c);
    }
    static NoiseSpec from_heating_rate(double gamma_star, double omega_z, double mass_kg,
                                       double temperature_k = 300.0) {
        NoiseSpec n;
        n.gamma_star = gamma_star;
        n.omega_z = omega_z;
        n.mass_kg = mass_kg;
        n.temperature_k = temperature_k;
        n.s_zeta_ref = s_zeta_from_heating(gamma_star, mass_kg, omega_z);
        return n;
    }
};

struct NoiseReport {
    double heating_quadrupole = 0.0;  // quanta/s
    double heating_uniform = 0.0;
    double heating_total = 0.0;
    double rho_h_at_omega_z = 0.0;    // J s / m^3
    double internal_rate = 0.0;       // 1/s
    double blackbody_rate = 0.0;      // 1/s, for the comparison
    nlohmann::json metadata;
};

// d<n>/dt = (pi w_z^2 / 4) S_eps(2 w_z) + (q^2 / (2 M hbar w_z)) S_zeta(w_z).
// The cross term of the two noises is neglected.
inline NoiseReport heating_rate(const NoiseSpec& spec) {
    spec.validate();
    NoiseReport r;
    r.heating_quadrupole = units::pi * spec.omega_z * spec.omega_z / 4.0 * spec.s_eps_ref;
    r.heating_uniform = spec.charge_c * spec.charge_c /
                        (2.0 * spec.mass_kg * units::hbar * spec.omega_z) *
                        spec.s_zeta(spec.omega_z);
    r.heating_total = r.heating_quadrupole + r.heating_uniform;
    return r;
}

// rho_H(omega) = eps0 S_zeta(omega); at omega_z this equals
// 2 M hbar eps0 omega_z Gamma* / q^2 when S_zeta came from a measured rate.
inline double spectral_energy_density(const NoiseSpec& spec, double omega) {
    spec.validate();
    return units::eps0 * spec.s_zeta(omega);
}

// Einstein B in the energy-density convention, B = pi d^2 / (3 eps0 hbar^2),
// so that B * rho_H is a rate.
inline double einstein_b_coefficient(double dipole_cm) {
    return units::pi * dipole_cm * dipole_cm /
           (3.0 * units::eps0 * units::hbar * units::hbar);
}

// Electric-field-noise-driven doublet transition rate for (molecule, J), with
// d_eff the stretched-state lab-frame dipole. The doublet frequency comes from
// the recomputed lambda doubling unless an explicit splitting is supplied.
inline NoiseReport internal_transition_rate(const NoiseSpec& spec, const MolecularConstants& mol,
                                            double J, double splitting_hz = 0.0,
                                            double dmu_dr_d_per_angstrom = 6.0) {
    spec.validate();
    NoiseReport r = heating_rate(spec);
    const double f_ef = splitting_hz > 0.0 ? splitting_hz : lambda_doubling(mol).splitting(J);
    const double d_eff = effective_dipole(units::debye_to_cm(mol.pdm_debye), J, J);
    const double rho = spectral_energy_density(spec, units::two_pi * f_ef);
    r.rho_h_at_omega_z = spectral_energy_density(spec, spec.omega_z);
    r.internal_rate = einstein_b_coefficient(d_eff) * rho;
    auto bb = blackbody_rates(mol, spec.temperature_k, 12.5, dmu_dr_d_per_angstrom);
    const double tau = bb.lifetime_s(J);
    r.blackbody_rate = tau > 0.0 && std::isfinite(tau) ? 1.0 / tau : 0.0;
    r.metadata = {{"splitting_hz", f_ef},
                  {"d_eff_cm", d_eff},
                  {"b_convention", "energy-density, B = pi d^2 / (3 eps0 hbar^2)"},
                  {"power_law_exponent", spec.power_law_exponent},
                  {"crossover_rad_s", spec.crossover}};
    return r;
}

} // namespace dpql
