#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace blochflow {

using Vec3 = Eigen::Vector3d;
using cxd = std::complex<double>;

struct CrystalCell {
  double a = 0.0;                  // cubic lattice constant, Angstrom
  std::vector<Vec3> basis;         // fractional coordinates in [0,1)
  std::string element = "Cu";
  double volume() const { return a * a * a; }
};

// Three-term Kirkland-style parametrization: f(g^2) = sum A/(g^2+B) + C exp(-D g^2).
struct ScatteringParams {
  std::array<double, 3> A{}, B{}, C{}, D{};
};

struct Crystal {
  CrystalCell cell;
  ScatteringParams params;
  std::string preset_name;  // empty when loaded from a file
};

struct Kinematics {
  double energy_kev = 0.0;
  double lambda = 0.0;     // Angstrom
  double k0 = 0.0;         // 1/lambda, A^-1; phases are exp(2 pi i k.r)
  double gamma_rel = 1.0;  // 1 + E/(m0 c^2)
  bool relativistic_ug = true;
  // scale applied to U_g (and to the mass in the hydrodynamic layer)
  double u_scale() const { return relativistic_ug ? gamma_rel : 1.0; }
};

CrystalCell build_cell(double lattice_a, std::vector<Vec3> basis_frac,
                       std::string element);

Crystal cu_fcc_preset();
std::optional<Crystal> crystal_preset(const std::string& name);  // "Cu-fcc"
Crystal load_crystal_file(const std::string& path);
// canonical text form of a crystal; hashed into the run manifest
std::string crystal_canonical_text(const Crystal& c);

// cubic reciprocal vector in the crystal frame: (h,k,l)/a
Vec3 reciprocal_vector(const CrystalCell& cell, const std::array<int, 3>& hkl);

double scattering_factor(const ScatteringParams& p, double g_sq);

cxd structure_factor(const CrystalCell& cell, const ScatteringParams& p,
                     const std::array<int, 3>& hkl);

// U_g = u_scale * F_g / (pi * cell volume), in A^-2
cxd potential_coefficient_U(const CrystalCell& cell, const ScatteringParams& p,
                            const std::array<int, 3>& hkl, const Kinematics& kin);

Kinematics electron_kinematics(double energy_kev, bool relativistic_ug);

// One Fourier component of the electrostatic potential in the lab frame.
// v_volts is always built from the non-relativistic U_g: the physical potential
// does not depend on the beam energy.
struct PotentialCoefficient {
  std::array<int, 3> hkl{};
  Vec3 g_lab = Vec3::Zero();  // A^-1
  cxd v_volts{};
};

using PotentialCoeffs = std::vector<PotentialCoefficient>;

// set must be closed under g -> -g so the synthesized potential is real
double real_space_potential(const PotentialCoeffs& coeffs, const Vec3& r);

// analytic +grad of the potential in eV/A: the force on the electron,
// attractive toward the atom columns
Vec3 electrostatic_force(const PotentialCoeffs& coeffs, const Vec3& r);

void validate_potential_coeffs(const PotentialCoeffs& coeffs);

}  // namespace blochflow
