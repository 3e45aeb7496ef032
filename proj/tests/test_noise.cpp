#include <catch2/catch_amalgamated.hpp>

#include "dpql/noise.hpp"

using namespace dpql;
using Catch::Approx;
namespace u = dpql::units;

namespace {
const double m_cao = u::amu_to_kg(55.9575055);
const double wz = u::two_pi * 450e3;
} // namespace

TEST_CASE("heating rate structure") {
    NoiseSpec spec;
    spec.omega_z = wz;
    spec.mass_kg = m_cao;

    SECTION("no noise, no heating") {
        auto r = heating_rate(spec);
        REQUIRE(r.heating_total == 0.0);
    }
    SECTION("uniform-field term is linear with the stated coefficient") {
        spec.s_zeta_ref = 1e-12;
        auto r1 = heating_rate(spec);
        REQUIRE(r1.heating_quadrupole == 0.0);
        const double coeff = u::elementary_charge * u::elementary_charge /
                             (2.0 * m_cao * u::hbar * wz);
        REQUIRE(r1.heating_uniform == Approx(coeff * 1e-12).epsilon(1e-12));
        spec.s_zeta_ref = 3e-12;
        REQUIRE(heating_rate(spec).heating_uniform == Approx(3.0 * r1.heating_uniform));
    }
    SECTION("superposition of the two noise terms") {
        spec.s_zeta_ref = 1e-12;
        spec.s_eps_ref = 1e-16;
        auto both = heating_rate(spec);
        spec.s_eps_ref = 0.0;
        auto uz = heating_rate(spec);
        spec.s_eps_ref = 1e-16;
        spec.s_zeta_ref = 0.0;
        auto ue = heating_rate(spec);
        REQUIRE(both.heating_total == Approx(uz.heating_total + ue.heating_total));
    }
    SECTION("inversion: a 300 quanta/s spec round-trips exactly") {
        auto n = NoiseSpec::from_heating_rate(300.0, wz, m_cao);
        auto r = heating_rate(n);
        REQUIRE(r.heating_uniform == Approx(300.0).epsilon(1e-9));
    }
}

TEST_CASE("spectral energy density") {
    auto spec = NoiseSpec::from_heating_rate(300.0, wz, m_cao);

    SECTION("definition at omega_z") {
        const double expect = 2.0 * m_cao * u::hbar * u::eps0 * wz * 300.0 /
                              (u::elementary_charge * u::elementary_charge);
        REQUIRE(spectral_energy_density(spec, wz) == Approx(expect).epsilon(1e-12));
    }
    SECTION("power law below the crossover") {
        const double r = spectral_energy_density(spec, 4.0 * wz) /
                         spectral_energy_density(spec, 2.0 * wz);
        REQUIRE(r == Approx(std::pow(2.0, -0.6)).epsilon(1e-12));
    }
    SECTION("flat above the crossover and continuous across it") {
        const double at = spectral_energy_density(spec, spec.crossover);
        const double above = spectral_energy_density(spec, 3.0 * spec.crossover);
        const double just_below = spectral_energy_density(spec, spec.crossover * (1 - 1e-9));
        REQUIRE(above == Approx(at).epsilon(1e-12));
        REQUIRE(just_below == Approx(at).epsilon(1e-6));
    }
    SECTION("nonpositive frequency rejected") {
        REQUIRE_THROWS_AS(spectral_energy_density(spec, 0.0), std::invalid_argument);
    }
}

TEST_CASE("internal transition rate") {
    const auto& mol = species("CaO+");

    SECTION("no heating, no internal rate") {
        auto spec = NoiseSpec::from_heating_rate(0.0, wz, m_cao);
        auto r = internal_transition_rate(spec, mol, 3.5, 5.0e6);
        REQUIRE(r.internal_rate == 0.0);
    }
    SECTION("published order of magnitude at J = 7/2") {
        auto spec = NoiseSpec::from_heating_rate(300.0, wz, m_cao);
        auto r = internal_transition_rate(spec, mol, 3.5, 5.0e6);
        REQUIRE(r.internal_rate > 0.0001);
        REQUIRE(r.internal_rate < 0.01);
        // negligible against blackbody thermalization (1/4 s at 300 K)
        REQUIRE(r.internal_rate < 0.1 * r.blackbody_rate);
        REQUIRE(r.blackbody_rate > 1.0 / (4.0 * 3.0));
        REQUIRE(r.blackbody_rate < 3.0 / 4.0);
    }
    SECTION("rate scales as the effective dipole squared") {
        auto spec = NoiseSpec::from_heating_rate(300.0, wz, m_cao);
        auto mol2 = mol;
        mol2.pdm_debye *= 2.0;
        auto r1 = internal_transition_rate(spec, mol, 3.5, 5.0e6);
        auto r2 = internal_transition_rate(spec, mol2, 3.5, 5.0e6);
        REQUIRE(r2.internal_rate / r1.internal_rate == Approx(4.0).epsilon(1e-9));
    }
}
