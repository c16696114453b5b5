#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "blochflow/beams.hpp"
#include "blochflow/crystal.hpp"

namespace blochflow {

// Dynamical matrix over the strong beams: diagonal 2 k0 s_g, off-diagonal
// U_{g-h}, then each weak beam folded in perturbatively (diagonal included).
// Throws BetheFloorError when a weak beam has |2 k0 s_w| < 1e-6 A^-2.
Eigen::MatrixXcd assemble_dynamical_matrix(const BeamSet& set, const Crystal& crystal,
                                           const Kinematics& kin);

struct BlochSolution {
  Eigen::VectorXd gammas;       // descending, A^-1
  Eigen::MatrixXcd C;           // rows = strong beams, cols = branches
  Eigen::VectorXcd alphas;      // excitation amplitudes
  std::vector<Beam> beams;      // the strong beams, matrix order (000 first)
  Vec3 incident_k = Vec3::Zero();
  Kinematics kin;

  // per-beam complex amplitude phi_g(z) and its z-derivatives
  Eigen::VectorXcd beam_amplitudes(double z, int deriv = 0) const;
};

BlochSolution solve_bloch(const Eigen::MatrixXcd& A, const BeamSet& set,
                          const Kinematics& kin);

struct WaveSample {
  cxd psi{};
  Eigen::Vector3cd grad = Eigen::Vector3cd::Zero();    // d/dx, d/dy, d/dz
  Eigen::Vector3cd second = Eigen::Vector3cd::Zero();  // d2/dx2, d2/dy2, d2/dz2
  int order = 0;
};

WaveSample wave_at(const BlochSolution& sol, const Vec3& r, int order);

std::vector<std::pair<std::array<int, 3>, double>> beam_intensities(
    const BlochSolution& sol, double z);

// rms intensity difference between a full and a reduced solve over the strong
// beams of the reduced one, with the thickness sum taken as a mean over N_z
// uniform depths in (0, T] under the 1/T prefactor
double delta_I(const BlochSolution& full, const BlochSolution& reduced, double T,
               int N_z);

// xi_g = |k0+g| cos(alpha) / |U_g|; infinity when U_g = 0 (no coupling)
double extinction_distance(const cxd& U_g, const Vec3& k, const Vec3& g,
                           const Vec3& surface_normal);

}  // namespace blochflow
