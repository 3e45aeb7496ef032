#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpql/units.hpp"

namespace dpql {

// Spectroscopic constants for one candidate cation, plus the published
// lambda-doublet splittings and rotational populations used for
// cross-checking recomputed values. Shipped as a versioned data file
// (data/species_table.json); this embedded copy is the compiled-in default.
struct MolecularConstants {
    std::string name;
    double A_so_cm = 0.0;     // spin-orbit coupling constant, cm^-1 (negative)
    double B_e_cm = 0.0;      // rotational constant, cm^-1
    double omega_e_cm = 0.0;  // vibrational constant, cm^-1
    double D_e_ev = 0.0;      // dissociation energy, eV
    double pdm_debye = 0.0;   // body-frame permanent dipole moment
    double T_e_cm = 0.0;      // Pi-Sigma interval, cm^-1
    std::string ground_state; // "2Pi3/2" or "2Sigma+"
    double metal_mass_amu = 0.0;
    double partner_mass_amu = 0.0;  // O or S, main isotope
    // published values, J = 3/2, 5/2, 7/2, 9/2
    std::array<double, 4> lambda_split_mhz{};
    std::array<double, 4> pop_4k_pct{};
    std::array<double, 4> pop_300k_pct{};

    double reduced_mass_kg() const {
        return units::amu * metal_mass_amu * partner_mass_amu /
               (metal_mass_amu + partner_mass_amu);
    }
    double total_mass_amu() const { return metal_mass_amu + partner_mass_amu; }
    bool pi_ground() const { return ground_state == "2Pi3/2"; }
};

inline constexpr int species_table_version = 1;

inline const std::vector<MolecularConstants>& species_table() {
    static const std::vector<MolecularConstants> t = {
        {"BeO+", -117, 1.44, 1242, 3.8, 7.5, 9.4e3, "2Pi3/2", 9.0121831, 15.9949146,
         {3.8, 16, 42, 84}, {89, 10, 1, 0}, {2.1, 3.1, 3.9, 4.6}},
        {"MgO+", -130, 0.53, 718, 2.3, 8.9, 7.3e3, "2Pi3/2", 23.98504170, 15.9949146,
         {0.19, 0.84, 2.1, 4.3}, {54, 32, 11, 3}, {0.8, 1.1, 1.5, 1.8}},
        {"CaO+", -130, 0.37, 634, 3.3, 8.7, 0.7e3, "2Pi3/2", 39.9625909, 15.9949146,
         {0.45, 1.9, 5.0, 10}, {42, 32, 17, 6}, {0.5, 0.8, 1.0, 1.3}},
        {"SrO+", -147, 0.31, 659, 4.2, 7.5, 0.4e3, "2Sigma+", 87.9056125, 15.9949146,
         {0.16, 0.67, 1.7, 3.5}, {0, 0, 0, 0}, {0.1, 0.1, 0.1, 0.1}},
        {"BaO+", -214, 0.24, 506, 2.2, 7.9, 1.5e3, "2Sigma+", 137.9052472, 15.9949146,
         {0.089, 0.39, 0.98, 2.0}, {0, 0, 0, 0}, {0, 0, 0, 0}},
        {"YbO+", -132, 0.28, 601, 2.2, 7.0, 1.0e3, "2Pi3/2", 173.9388664, 15.9949146,
         {0.14, 0.59, 1.5, 3.0}, {33, 30, 20, 10}, {0.4, 0.6, 0.8, 1.0}},
        {"RaO+", -228, 0.20, 451, 3.3, 7.7, 0.3e3, "2Pi3/2", 226.0254103, 15.9949146,
         {0.081, 0.35, 0.89, 1.8}, {25, 26, 21, 14}, {0.3, 0.5, 0.6, 0.8}},
        {"BeS+", -310, 0.71, 875, 3.4, 7.6, 15.7e3, "2Pi3/2", 9.0121831, 31.9720712,
         {0.11, 0.45, 1.2, 2.3}, {66, 27, 6, 1}, {1.2, 1.8, 2.3, 2.8}},
        {"MgS+", -303, 0.25, 469, 2.0, 9.2, 12.9e3, "2Pi3/2", 23.98504170, 31.9720712,
         {0.0051, 0.022, 0.056, 0.11}, {30, 29, 21, 12}, {0.4, 0.6, 0.8, 1.0}},
        {"CaS+", -299, 0.15, 390, 4.0, 11.3, 5.0e3, "2Pi3/2", 39.9625909, 31.9720712,
         {0.0028, 0.012, 0.031, 0.062}, {19, 22, 20, 16}, {0.3, 0.4, 0.5, 0.6}},
        {"SrS+", -316, 0.12, 423, 3.1, 8.7, 0.3e3, "2Pi3/2", 87.9056125, 31.9720712,
         {0.0086, 0.036, 0.094, 0.19}, {16, 20, 19, 16}, {0.1, 0.2, 0.3, 0.4}},
        {"BaS+", -273, 0.08, 291, 3.3, 9.1, 2.5e3, "2Pi3/2", 137.9052472, 31.9720712,
         {0.00093, 0.0040, 0.010, 0.021}, {11, 14, 15, 15}, {0.1, 0.2, 0.2, 0.3}},
        {"YbS+", -254, 0.10, 345, 2.2, 7.8, 4.6e3, "2Pi3/2", 173.9388664, 31.9720712,
         {0.0013, 0.0056, 0.014, 0.029}, {13, 17, 18, 16}, {0.1, 0.2, 0.3, 0.3}},
        {"RaS+", -405, 0.07, 266, 4.5, 9.4, 2.7e3, "2Pi3/2", 226.0254103, 31.9720712,
         {0.00043, 0.0018, 0.0047, 0.0094}, {10, 13, 14, 14}, {0.1, 0.1, 0.2, 0.2}},
    };
    return t;
}

inline const MolecularConstants& species(const std::string& name) {
    for (const auto& s : species_table())
        if (s.name == name) return s;
    throw std::invalid_argument("unknown species: " + name);
}

// Common atomic ions co-trapped with the molecules. Mass of main isotope.
inline double atomic_ion_mass_amu(const std::string& name) {
    if (name == "Ca+") return 39.9625909;
    if (name == "Be+") return 9.0121831;
    if (name == "Mg+") return 23.98504170;
    if (name == "Sr+") return 87.9056125;
    if (name == "Ba+") return 137.9052472;
    if (name == "Yb+") return 173.9388664;
    if (name == "Ra+") return 226.0254103;
    throw std::invalid_argument("unknown atomic ion: " + name);
}

} // namespace dpql
