#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpql/units.hpp"

// Linear ion chains: Coulomb equilibrium, axial normal modes of the
// mass-weighted Hessian, and dipole-phonon coupling strengths.
namespace dpql {

enum class IonTag { atom, molecule };

struct IonDef {
    double mass_kg = 0.0;
    double charge_e = 1.0;
    IonTag tag = IonTag::atom;
    std::string label;
};

struct ChainSpec {
    std::vector<IonDef> ions;
    // Axial curvature given as the secular frequency of a single reference ion.
    double reference_omega = 0.0;   // rad/s
    double reference_mass_kg = 0.0;
    double reference_charge_e = 1.0;

    void validate() const {
        if (ions.empty()) throw std::invalid_argument("chain: at least one ion required");
        for (size_t i = 0; i < ions.size(); ++i) {
            if (ions[i].mass_kg <= 0.0)
                throw std::invalid_argument("chain: ions[" + std::to_string(i) + "].mass must be positive");
            if (ions[i].charge_e <= 0.0)
                throw std::invalid_argument("chain: ions[" + std::to_string(i) + "].charge must be positive");
        }
        if (reference_omega <= 0.0 || reference_mass_kg <= 0.0)
            throw std::invalid_argument("chain: reference frequency and mass must be positive");
    }
    // energy curvature q_i * kappa for ion i, with kappa from the reference ion
    double curvature(size_t i) const {
        const double kappa = reference_mass_kg * reference_omega * reference_omega / reference_charge_e;
        return ions[i].charge_e * kappa;
    }
    double length_scale() const {
        const double q = ions[0].charge_e * units::elementary_charge;
        return std::cbrt(units::coulomb_k * q * q /
                         (reference_mass_kg * reference_omega * reference_omega));
    }
};

struct NormalModes {
    Eigen::VectorXd frequencies;            // rad/s ascending
    Eigen::MatrixXd vectors;                // b_q^(i): rows = ions, cols = modes; mass-weighted
    Eigen::VectorXd equilibrium_positions;  // m
    Eigen::VectorXd masses;                 // kg

    int count() const { return static_cast<int>(frequencies.size()); }
    // Unweighted physical displacement pattern of mode q (not normalized).
    Eigen::VectorXd displacement_pattern(int q) const {
        return vectors.col(q).cwiseQuotient(masses.cwiseSqrt());
    }
};

inline Eigen::VectorXd solve_equilibrium(const ChainSpec& spec) {
    spec.validate();
    const size_t n = spec.ions.size();
    const double ke = units::coulomb_k;
    const double l = spec.length_scale();
    Eigen::VectorXd z(n);
    for (size_t i = 0; i < n; ++i) z[i] = (double(i) - double(n - 1) / 2.0) * l;

    std::vector<double> qc(n);
    for (size_t i = 0; i < n; ++i) qc[i] = spec.ions[i].charge_e * units::elementary_charge;

    const double fscale = spec.curvature(0) * l;  // characteristic force
    Eigen::VectorXd force(n);
    Eigen::MatrixXd jac(n, n);
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
        force.setZero();
        jac.setZero();
        for (size_t i = 0; i < n; ++i) {
            force[i] = -spec.curvature(i) * z[i];
            jac(i, i) = -spec.curvature(i);
            for (size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const double d = z[i] - z[j];
                const double cc = ke * qc[i] * qc[j];
                force[i] += cc * (d > 0 ? 1.0 : -1.0) / (d * d);
                jac(i, i) -= 2.0 * cc / std::abs(d * d * d);
                jac(i, j) = 2.0 * cc / std::abs(d * d * d);
            }
        }
        if (force.cwiseAbs().maxCoeff() < 1e-12 * fscale) {
            converged = true;
            break;
        }
        Eigen::VectorXd dz = jac.partialPivLu().solve(-force);
        const double maxstep = 0.2 * l;
        const double s = std::min(1.0, maxstep / (dz.cwiseAbs().maxCoeff() + 1e-300));
        z += s * dz;
        // ordering must survive each damped step
        for (size_t i = 0; i + 1 < n; ++i)
            if (z[i] >= z[i + 1]) throw std::runtime_error("equilibrium: ion ordering lost");
    }
    if (!converged) throw std::runtime_error("equilibrium: no convergence after 200 iterations");
    return z;
}

inline NormalModes solve_modes(const ChainSpec& spec) {
    const Eigen::VectorXd z = solve_equilibrium(spec);
    const size_t n = spec.ions.size();
    const double ke = units::coulomb_k;
    std::vector<double> qc(n);
    for (size_t i = 0; i < n; ++i) qc[i] = spec.ions[i].charge_e * units::elementary_charge;

    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n, n);
    for (size_t i = 0; i < n; ++i) {
        hess(i, i) = spec.curvature(i);
        for (size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double kc = 2.0 * ke * qc[i] * qc[j] / std::pow(std::abs(z[i] - z[j]), 3);
            hess(i, i) += kc;
            hess(i, j) = -kc;
        }
    }
    Eigen::VectorXd m(n);
    for (size_t i = 0; i < n; ++i) m[i] = spec.ions[i].mass_kg;
    const Eigen::VectorXd sqm = m.cwiseSqrt();
    Eigen::MatrixXd k = hess.cwiseQuotient(sqm * sqm.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::runtime_error("modes: non-positive-definite Hessian (unstable configuration)");

    NormalModes nm;
    nm.frequencies = es.eigenvalues().cwiseSqrt();
    nm.vectors = es.eigenvectors();
    nm.equilibrium_positions = z;
    nm.masses = m;
    // sign convention: first ion component positive (ties broken by next ion)
    for (int q = 0; q < nm.count(); ++q) {
        for (int i = 0; i < static_cast<int>(n); ++i) {
            if (std::abs(nm.vectors(i, q)) > 1e-12) {
                if (nm.vectors(i, q) < 0) nm.vectors.col(q) *= -1.0;
                break;
            }
        }
    }
    return nm;
}

// Vacuum Rabi couplings g_q^(i) for a molecular ion with effective transition
// dipole d. hbar-restored form g = (d/(e hbar)) sqrt(hbar m w^3 / 2) b kappa;
// kappa = 2 reproduces the published Ca+/CaO+ COM benchmark.
struct CouplingSpec {
    double dipole_cm = 0.0;        // C m
    int ion = 0;
    Eigen::VectorXd g;             // rad/s, per mode, sign carried from b
    double g_mol = 0.0;            // |g| evaluated at omega = omega_mol
    double kappa = 2.0;
};

inline double coupling_g(double dipole_cm, double mass_kg, double omega, double b,
                         double kappa = 2.0) {
    return dipole_cm / (units::elementary_charge * units::hbar) *
           std::sqrt(units::hbar * mass_kg * omega * omega * omega / 2.0) * b * kappa;
}

inline CouplingSpec coupling(const NormalModes& modes, int ion, double dipole_cm,
                             double omega_mol, double kappa = 2.0) {
    if (ion < 0 || ion >= static_cast<int>(modes.masses.size()))
        throw std::out_of_range("coupling: ion index");
    if (dipole_cm <= 0.0) throw std::invalid_argument("coupling: dipole must be positive");
    CouplingSpec cs;
    cs.dipole_cm = dipole_cm;
    cs.ion = ion;
    cs.kappa = kappa;
    cs.g.resize(modes.count());
    for (int q = 0; q < modes.count(); ++q)
        cs.g[q] = coupling_g(dipole_cm, modes.masses[ion], modes.frequencies[q],
                             modes.vectors(ion, q), kappa);
    // pick the mode with the largest participation for the resonant benchmark
    int qbest = 0;
    modes.vectors.row(ion).cwiseAbs().maxCoeff(&qbest);
    cs.g_mol = std::abs(coupling_g(dipole_cm, modes.masses[ion], omega_mol,
                                   modes.vectors(ion, qbest), kappa));
    return cs;
}

// g at omega_mol for a specific mode's geometry.
inline double g_mol_for_mode(const NormalModes& modes, int ion, int mode, double dipole_cm,
                             double omega_mol, double kappa = 2.0) {
    return std::abs(coupling_g(dipole_cm, modes.masses[ion], omega_mol,
                               modes.vectors(ion, mode), kappa));
}

// Body-to-lab projection of the molecule-frame dipole for a Hund's case (a)
// parity doublet: d_eff = d_body * Omega * m_J / (J (J+1)).
inline double effective_dipole(double d_body_cm, double J, double m_J, double Omega = 1.5) {
    return d_body_cm * Omega * m_J / (J * (J + 1.0));
}

} // namespace dpql
