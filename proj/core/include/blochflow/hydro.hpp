#pragma once

#include <optional>
#include <vector>

#include "blochflow/bloch.hpp"

namespace blochflow {

// node floor: 1e-12 x cell-average |Psi|^2 at the point's depth
double node_floor(const BlochSolution& sol, double z);

// local wavevector Im(grad Psi / Psi) / (2 pi), A^-1; equals k for a plane wave.
// Throws NodeError below the node floor.
Vec3 velocity_field(const BlochSolution& sol, const Vec3& r);

// Q from a density sample: rho, its gradient and Laplacian, and the
// hbar^2/(2m) coefficient in eV*A^2. Exposed so synthetic amplitudes can be
// injected in tests.
double quantum_potential_from_density(double rho, const Vec3& grad_rho,
                                      double lap_rho, double coeff_ev_a2);

double quantum_potential(const BlochSolution& sol, const Vec3& r);  // eV

// central finite differences of Q with step h_fd (default 1e-3 A), eV/A
Vec3 quantum_force(const BlochSolution& sol, const Vec3& r, double h_fd = 1e-3);

enum class TrajectoryStatus { completed, aborted_node, aborted_backflow };

struct TrajectoryPoint {
  Vec3 r = Vec3::Zero();
  // filled when diagnostics were requested
  std::optional<double> psi2, speed, q_ev;
};

struct Trajectory {
  Vec3 seed = Vec3::Zero();
  std::vector<TrajectoryPoint> points;
  TrajectoryStatus status = TrajectoryStatus::completed;
};

enum class Rk2Variant { midpoint, heun };

struct RecordFlags {
  bool psi2 = false, speed = false, q = false;
};

// depth-parameterized dx/dz = v_x/v_z, dy/dz = v_y/v_z
Trajectory propagate_trajectory(const BlochSolution& sol, const Vec3& seed,
                                double z_max, double dz, RecordFlags record = {},
                                Rk2Variant variant = Rk2Variant::midpoint);

// n x n seeds over one cell face at z=0, offset half a spacing off the columns
std::vector<Vec3> seed_grid(const CrystalCell& cell, int n);

// n seeds on a line parallel to x at y = y_frac * a
std::vector<Vec3> seed_line(const CrystalCell& cell, int n, double y_frac = 0.5);

}  // namespace blochflow
