#include "blochflow/hydro.hpp"

#include <cmath>

#include "blochflow/constants.hpp"
#include "blochflow/errors.hpp"

namespace blochflow {

double node_floor(const BlochSolution& sol, double z) {
  // transverse cell average of |Psi|^2 is sum_g |phi_g(z)|^2 (cross terms cancel)
  return 1e-12 * sol.beam_amplitudes(z, 0).squaredNorm();
}

Vec3 velocity_field(const BlochSolution& sol, const Vec3& r) {
  WaveSample s = wave_at(sol, r, 1);
  double rho = std::norm(s.psi);
  if (rho < node_floor(sol, r.z()))
    throw NodeError("velocity undefined at a wave-function node");
  Vec3 v;
  for (int ax = 0; ax < 3; ++ax) v[ax] = std::imag(s.grad[ax] / s.psi) / two_pi;
  return v;
}

double quantum_potential_from_density(double rho, const Vec3& grad_rho,
                                      double lap_rho, double coeff_ev_a2) {
  double R = std::sqrt(rho);
  double lap_R = lap_rho / (2.0 * R) - grad_rho.squaredNorm() / (4.0 * R * R * R);
  return -coeff_ev_a2 * lap_R / R;
}

namespace {

// |Psi|^2 equals the squared modulus of the carrier-free envelope
// sum_g phi_g(z) exp(2 pi i g.r): the plane-wave factor exp(2 pi i k.r) has
// unit modulus and drops out of rho and all its derivatives. Evaluating Q from
// the envelope avoids cancellations of size (2 pi k0)^2 that would otherwise
// swamp small quantum potentials (vacuum Q comes out exactly zero).
struct EnvelopeSample {
  cxd psi{};
  Eigen::Vector3cd grad = Eigen::Vector3cd::Zero();
  Eigen::Vector3cd second = Eigen::Vector3cd::Zero();
};

EnvelopeSample envelope_at(const BlochSolution& sol, const Vec3& r) {
  EnvelopeSample s;
  Eigen::VectorXcd phi = sol.beam_amplitudes(r.z(), 0);
  Eigen::VectorXcd dphi = sol.beam_amplitudes(r.z(), 1);
  Eigen::VectorXcd ddphi = sol.beam_amplitudes(r.z(), 2);
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    const Vec3& g = sol.beams[static_cast<std::size_t>(i)].g_lab;
    double phase = two_pi * g.dot(r);
    cxd carrier(std::cos(phase), std::sin(phase));
    s.psi += phi[i] * carrier;
    for (int ax = 0; ax < 3; ++ax) {
      cxd ig(0.0, two_pi * g[ax]);
      cxd d = ig * phi[i];
      cxd dd = ig * ig * phi[i];
      if (ax == 2) {
        d += dphi[i];
        dd += 2.0 * ig * dphi[i] + ddphi[i];
      }
      s.grad[ax] += d * carrier;
      s.second[ax] += dd * carrier;
    }
  }
  return s;
}

}  // namespace

double quantum_potential(const BlochSolution& sol, const Vec3& r) {
  EnvelopeSample s = envelope_at(sol, r);
  double rho = std::norm(s.psi);
  if (rho < node_floor(sol, r.z()))
    throw NodeError("quantum potential undefined at a wave-function node");
  Vec3 grad_rho;
  double lap_rho = 0.0;
  for (int ax = 0; ax < 3; ++ax) {
    grad_rho[ax] = 2.0 * std::real(std::conj(s.psi) * s.grad[ax]);
    lap_rho += 2.0 * std::real(std::conj(s.psi) * s.second[ax]) +
               2.0 * std::norm(s.grad[ax]);
  }
  double coeff = hbar_sq_over_2m0_ev_angstrom2 / sol.kin.u_scale();
  return quantum_potential_from_density(rho, grad_rho, lap_rho, coeff);
}

Vec3 quantum_force(const BlochSolution& sol, const Vec3& r, double h_fd) {
  if (h_fd <= 0.0) throw NumericError("quantum force needs a positive step");
  Vec3 f;
  for (int ax = 0; ax < 3; ++ax) {
    Vec3 e = Vec3::Zero();
    e[ax] = h_fd;
    f[ax] = -(quantum_potential(sol, r + e) - quantum_potential(sol, r - e)) /
            (2.0 * h_fd);
  }
  return f;
}

namespace {

// transverse slope (dx/dz, dy/dz); throws NodeError, flags backflow via v_z
struct Slope {
  double sx, sy;
  bool backflow;
};

Slope slope_at(const BlochSolution& sol, const Vec3& r) {
  Vec3 v = velocity_field(sol, r);
  if (v.z() <= 0.0) return {0.0, 0.0, true};
  return {v.x() / v.z(), v.y() / v.z(), false};
}

}  // namespace

Trajectory propagate_trajectory(const BlochSolution& sol, const Vec3& seed,
                                double z_max, double dz, RecordFlags record,
                                Rk2Variant variant) {
  if (dz <= 0.0 || z_max <= 0.0)
    throw ConfigError("trajectory integration needs positive dz and z_max");

  Trajectory traj;
  traj.seed = seed;
  const auto steps = static_cast<long>(std::llround(z_max / dz));

  Vec3 r = seed;
  auto push = [&](const Vec3& p) {
    TrajectoryPoint tp;
    tp.r = p;
    if (record.psi2) tp.psi2 = std::norm(wave_at(sol, p, 0).psi);
    if (record.speed) tp.speed = velocity_field(sol, p).norm();
    if (record.q) tp.q_ev = quantum_potential(sol, p);
    traj.points.push_back(std::move(tp));
  };

  try {
    push(r);
    for (long i = 0; i < steps; ++i) {
      Slope s1 = slope_at(sol, r);
      if (s1.backflow) {
        traj.status = TrajectoryStatus::aborted_backflow;
        return traj;
      }
      Slope s2{};
      if (variant == Rk2Variant::midpoint) {
        Vec3 mid = r + Vec3(s1.sx * dz / 2.0, s1.sy * dz / 2.0, dz / 2.0);
        s2 = slope_at(sol, mid);
        if (s2.backflow) {
          traj.status = TrajectoryStatus::aborted_backflow;
          return traj;
        }
      } else {  // heun: average of endpoint slopes
        Vec3 end = r + Vec3(s1.sx * dz, s1.sy * dz, dz);
        Slope se = slope_at(sol, end);
        if (se.backflow) {
          traj.status = TrajectoryStatus::aborted_backflow;
          return traj;
        }
        s2 = {(s1.sx + se.sx) / 2.0, (s1.sy + se.sy) / 2.0, false};
      }
      r += Vec3(s2.sx * dz, s2.sy * dz, dz);
      push(r);
    }
  } catch (const NodeError&) {
    traj.status = TrajectoryStatus::aborted_node;
    return traj;
  }
  traj.status = TrajectoryStatus::completed;
  return traj;
}

std::vector<Vec3> seed_grid(const CrystalCell& cell, int n) {
  if (n < 1) throw ConfigError("seed grid needs n >= 1");
  std::vector<Vec3> seeds;
  seeds.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      seeds.emplace_back((i + 0.5) * cell.a / n, (j + 0.5) * cell.a / n, 0.0);
  return seeds;
}

std::vector<Vec3> seed_line(const CrystalCell& cell, int n, double y_frac) {
  if (n < 2) throw ConfigError("seed line needs n >= 2");
  std::vector<Vec3> seeds;
  seeds.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    seeds.emplace_back((i + 0.5) * cell.a / n, y_frac * cell.a, 0.0);
  return seeds;
}

}  // namespace blochflow
