#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dpql/chain.hpp"
#include "dpql/species.hpp"
#include "dpql/units.hpp"

using namespace dpql;
using Catch::Approx;
namespace u = dpql::units;

namespace {

ChainSpec make_chain(std::vector<double> masses_amu, double omega_ref, double ref_mass_amu) {
    ChainSpec c;
    for (double m : masses_amu) c.ions.push_back({u::amu_to_kg(m), 1.0, IonTag::atom, ""});
    c.reference_omega = omega_ref;
    c.reference_mass_kg = u::amu_to_kg(ref_mass_amu);
    return c;
}

double chain_potential(const ChainSpec& spec, const Eigen::VectorXd& z) {
    double v = 0.0;
    for (size_t i = 0; i < spec.ions.size(); ++i) v += 0.5 * spec.curvature(i) * z[i] * z[i];
    for (size_t i = 0; i < spec.ions.size(); ++i)
        for (size_t j = i + 1; j < spec.ions.size(); ++j)
            v += u::coulomb_k * spec.ions[i].charge_e * spec.ions[j].charge_e *
                 u::elementary_charge * u::elementary_charge / std::abs(z[i] - z[j]);
    return v;
}

// independent oracle: coordinate-descent minimization of the potential
Eigen::VectorXd brute_force_minimum(const ChainSpec& spec, Eigen::VectorXd z0) {
    const double l = spec.length_scale();
    double step = 0.05 * l;
    Eigen::VectorXd z = z0;
    double best = chain_potential(spec, z);
    while (step > 1e-9 * l) {
        bool improved = false;
        for (int i = 0; i < z.size(); ++i) {
            for (double s : {step, -step}) {
                Eigen::VectorXd trial = z;
                trial[i] += s;
                const double v = chain_potential(spec, trial);
                if (v < best) {
                    best = v;
                    z = trial;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return z;
}

} // namespace

TEST_CASE("single ion sits at the trap center") {
    auto c = make_chain({40.0}, u::mhz_to_rad(1.0), 40.0);
    auto z = solve_equilibrium(c);
    REQUIRE(std::abs(z[0]) < 1e-15);
}

TEST_CASE("two equal ions at the textbook separation") {
    const double w = u::mhz_to_rad(1.0);
    auto c = make_chain({40.0, 40.0}, w, 40.0);
    auto z = solve_equilibrium(c);
    const double l = c.length_scale();
    const double expect = std::pow(0.5, 2.0 / 3.0) * l;
    REQUIRE(z[1] == Approx(expect).epsilon(1e-10));
    REQUIRE(z[0] == Approx(-expect).epsilon(1e-10));
}

TEST_CASE("mixed three-ion equilibrium matches brute-force minimization") {
    const double mCa = 39.9625909, mCaO = 55.9575055;
    auto c = make_chain({mCa, mCaO, mCa}, u::mhz_to_rad(0.8), mCaO);
    auto z = solve_equilibrium(c);
    Eigen::VectorXd z0(3);
    const double l = c.length_scale();
    z0 << -1.2 * l, 0.1 * l, 1.1 * l;
    auto zb = brute_force_minimum(c, z0);
    for (int i = 0; i < 3; ++i) REQUIRE(z[i] == Approx(zb[i]).margin(2e-8 * l));
}

TEST_CASE("equal-mass mode frequencies are the textbook ladder") {
    const double w = u::mhz_to_rad(1.0);
    auto two = solve_modes(make_chain({40, 40}, w, 40));
    REQUIRE(two.frequencies[0] == Approx(w).epsilon(1e-9));
    REQUIRE(two.frequencies[1] == Approx(std::sqrt(3.0) * w).epsilon(1e-9));

    auto three = solve_modes(make_chain({40, 40, 40}, w, 40));
    REQUIRE(three.frequencies[0] == Approx(w).epsilon(1e-9));
    REQUIRE(three.frequencies[1] == Approx(std::sqrt(3.0) * w).epsilon(1e-9));
    REQUIRE(three.frequencies[2] == Approx(std::sqrt(29.0 / 5.0) * w).epsilon(1e-9));

    // lowest mode of an equal-mass chain is uniform
    for (int i = 0; i < 3; ++i)
        REQUIRE(three.vectors(i, 0) == Approx(1.0 / std::sqrt(3.0)).epsilon(1e-9));
}

TEST_CASE("mixed-chain modes against an independently assembled Hessian") {
    const double mCa = 39.9625909, mCaO = 55.9575055;
    const double w = u::mhz_to_rad(0.7);
    auto c = make_chain({mCaO, mCa, mCaO}, w, mCaO);
    auto nm = solve_modes(c);

    // oracle: numerical second differences of the potential at equilibrium
    auto z = nm.equilibrium_positions;
    const double h = 1e-4 * c.length_scale();
    Eigen::MatrixXd hess(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Eigen::VectorXd zpp = z, zpm = z, zmp = z, zmm = z;
            zpp[i] += h; zpp[j] += h;
            zpm[i] += h; zpm[j] -= h;
            zmp[i] -= h; zmp[j] += h;
            zmm[i] -= h; zmm[j] -= h;
            hess(i, j) = (chain_potential(c, zpp) - chain_potential(c, zpm) -
                          chain_potential(c, zmp) + chain_potential(c, zmm)) /
                         (4 * h * h);
        }
    Eigen::VectorXd m(3);
    for (int i = 0; i < 3; ++i) m[i] = c.ions[static_cast<size_t>(i)].mass_kg;
    Eigen::MatrixXd k = hess.cwiseQuotient(m.cwiseSqrt() * m.cwiseSqrt().transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    for (int q = 0; q < 3; ++q)
        REQUIRE(nm.frequencies[q] == Approx(std::sqrt(es.eigenvalues()[q])).epsilon(1e-5));
}

TEST_CASE("mode vectors are orthonormal and complete") {
    auto nm = solve_modes(make_chain({55.96, 39.96, 55.96}, u::mhz_to_rad(1.1), 55.96));
    Eigen::MatrixXd bbt = nm.vectors * nm.vectors.transpose();
    REQUIRE((bbt - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
    for (int q = 0; q < 3; ++q) REQUIRE(nm.vectors.col(q).norm() == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mass-weighted vs displacement representations stay consistent") {
    auto nm = solve_modes(make_chain({39.96, 55.96}, u::mhz_to_rad(1.0), 55.96));
    for (int q = 0; q < 2; ++q) {
        Eigen::VectorXd d = nm.displacement_pattern(q);
        for (int i = 0; i < 2; ++i)
            REQUIRE(d[i] * std::sqrt(nm.masses[i]) == Approx(nm.vectors(i, q)).epsilon(1e-12));
    }
    // mass-weighted vectors orthonormal while displacements are not
    REQUIRE(std::abs(nm.displacement_pattern(0).dot(nm.displacement_pattern(1))) > 1e-12);
}

TEST_CASE("unstable configuration is rejected") {
    // negative curvature cannot happen through ChainSpec validation; check the
    // error path with a pathological reference instead
    auto c = make_chain({40.0, 40.0}, u::mhz_to_rad(1.0), 40.0);
    c.ions[0].mass_kg = -1.0;
    REQUIRE_THROWS(solve_modes(c));
}

TEST_CASE("coupling vanishes for a non-participating ion") {
    // symmetric stretch of a symmetric 3-ion chain: center ion at rest
    auto nm = solve_modes(make_chain({55.96, 39.96, 55.96}, u::mhz_to_rad(1.0), 55.96));
    auto cs = coupling(nm, 1, u::debye_to_cm(2.9), u::mhz_to_rad(5.0));
    REQUIRE(std::abs(cs.g[1]) < 1e-6 * std::abs(cs.g[2]));
}

TEST_CASE("published coupling benchmark and omega^{3/2} scaling") {
    const double mCa = 39.9625909, mCaO = 55.9575055;
    auto nm = solve_modes(make_chain({mCa, mCaO}, u::mhz_to_rad(1.0), mCaO));
    const double d_eff = effective_dipole(u::debye_to_cm(8.7), 3.5, 3.5);
    REQUIRE(d_eff == Approx(u::debye_to_cm(8.7) / 3.0).epsilon(1e-12));

    const double wmol = u::mhz_to_rad(5.0);
    const double g_mol = g_mol_for_mode(nm, 1, 0, d_eff, wmol);
    const double published = u::mhz_to_rad(0.058);
    REQUIRE(g_mol / published > 0.5);
    REQUIRE(g_mol / published < 2.0);
    // kappa = 2 lands within a few percent
    REQUIRE(g_mol == Approx(published).epsilon(0.05));

    // doubling the curvature scales every g by 2^{3/4} exactly
    auto nm2 = solve_modes(make_chain({mCa, mCaO}, std::sqrt(2.0) * u::mhz_to_rad(1.0), mCaO));
    auto c1 = coupling(nm, 1, d_eff, wmol);
    auto c2 = coupling(nm2, 1, d_eff, wmol);
    for (int q = 0; q < 2; ++q)
        REQUIRE(c2.g[q] / c1.g[q] == Approx(std::pow(2.0, 0.75)).epsilon(1e-9));
}

TEST_CASE("heavier-ion chain keeps reproducible mode-vector signs") {
    auto nm = solve_modes(make_chain({55.96, 39.96, 55.96}, u::mhz_to_rad(1.0), 55.96));
    for (int q = 0; q < 3; ++q) {
        int first = 0;
        while (std::abs(nm.vectors(first, q)) < 1e-12) ++first;
        REQUIRE(nm.vectors(first, q) > 0.0);
    }
    // antisymmetric stretch (molecules in phase) is the top mode of this chain
    REQUIRE(nm.vectors(0, 2) * nm.vectors(2, 2) > 0.0);
    REQUIRE(nm.vectors(0, 1) * nm.vectors(2, 1) < 0.0);
}

TEST_CASE("validation errors") {
    ChainSpec empty;
    empty.reference_omega = 1.0;
    empty.reference_mass_kg = 1.0;
    REQUIRE_THROWS_AS(solve_equilibrium(empty), std::invalid_argument);

    auto bad = make_chain({40.0, 40.0}, u::mhz_to_rad(1.0), 40.0);
    bad.ions[0].charge_e = -1.0;
    REQUIRE_THROWS_AS(solve_equilibrium(bad), std::invalid_argument);
}
