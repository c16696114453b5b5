#include "blochflow/scenario.hpp"

#include <cmath>
#include <iostream>
#include <limits>

#include "blochflow/constants.hpp"
#include "blochflow/errors.hpp"

namespace blochflow {

namespace {

// lab frame for two-beam / row geometry: x along g, beam along [001]
LabFrame row_frame(const CrystalCell& cell, const std::array<int, 3>& g_hkl) {
  if (g_hkl == std::array<int, 3>{0, 0, 0})
    throw ConfigError("g must be a nonzero reflection");
  if (g_hkl[2] != 0)
    throw ConfigError("row geometry needs g in the (001) plane (l = 0)");
  Vec3 x = reciprocal_vector(cell, g_hkl).normalized();
  Vec3 z(0, 0, 1);
  Vec3 y = z.cross(x);
  LabFrame f;
  f.crystal_to_lab.row(0) = x.transpose();
  f.crystal_to_lab.row(1) = y.transpose();
  f.crystal_to_lab.row(2) = z.transpose();
  return f;
}

Vec3 tilted_k(double k0, double kt_x, double kt_y) {
  double t2 = kt_x * kt_x + kt_y * kt_y;
  if (t2 >= k0 * k0)
    throw ConfigError("transverse tilt exceeds the incident wave vector");
  return Vec3(kt_x, kt_y, std::sqrt(k0 * k0 - t2));
}

BlochSolution solve_with_promotion(BeamSet& set, const Crystal& crystal,
                                   const Kinematics& kin) {
  for (std::size_t attempt = 0; attempt <= set.beams.size(); ++attempt) {
    try {
      auto A = assemble_dynamical_matrix(set, crystal, kin);
      return solve_bloch(A, set, kin);
    } catch (const BetheFloorError& e) {
      auto idx = set.find(e.hkl);
      if (!idx || set.beams[*idx].tag != BeamTag::weak) throw;
      set.beams[*idx].tag = BeamTag::strong;  // promote and retry
    }
  }
  throw NumericError("beam promotion did not converge");
}

}  // namespace

ScenarioSetup zone_axis_setup(const Crystal& crystal, const std::array<int, 3>& zone,
                              double energy_kev, double c_s, double c_w, double g_max,
                              bool relativistic_ug) {
  Kinematics kin = electron_kinematics(energy_kev, relativistic_ug);
  LabFrame frame = zone_axis_frame(zone);
  Vec3 k(0, 0, kin.k0);
  auto cand = generate_zone_beams(crystal, kin, zone, g_max, frame);
  BeamSet set = partition_bethe(std::move(cand), k, kin, c_s, c_w);
  BlochSolution sol = solve_with_promotion(set, crystal, kin);
  return {std::move(set), std::move(sol), frame, kin};
}

ScenarioSetup two_beam_setup(const Crystal& crystal, const std::array<int, 3>& g_hkl,
                             double energy_kev, bool at_bragg, bool relativistic_ug) {
  Kinematics kin = electron_kinematics(energy_kev, relativistic_ug);
  LabFrame frame = row_frame(crystal.cell, g_hkl);
  Vec3 g_lab = frame.to_lab(reciprocal_vector(crystal.cell, g_hkl));
  cxd U = potential_coefficient_U(crystal.cell, crystal.params, g_hkl, kin);
  if (std::abs(U) < 1e-14)
    throw ConfigError("two-beam geometry on a forbidden reflection");

  BeamSet set;
  Beam b0;
  b0.hkl = {0, 0, 0};
  b0.U_g = potential_coefficient_U(crystal.cell, crystal.params, b0.hkl, kin);
  Beam bg;
  bg.hkl = g_hkl;
  bg.g_lab = g_lab;
  bg.U_g = U;
  set.beams = {b0, bg};
  set.incident_k =
      at_bragg ? tilted_k(kin.k0, -0.5 * g_lab.x(), 0.0) : Vec3(0, 0, kin.k0);
  set_excitation_errors(set.beams, set.incident_k);

  auto A = assemble_dynamical_matrix(set, crystal, kin);
  BlochSolution sol = solve_bloch(A, set, kin);
  return {std::move(set), std::move(sol), frame, kin};
}

ScenarioSetup systematic_row_setup(const Crystal& crystal,
                                   const std::array<int, 3>& g_hkl, int n_max,
                                   double energy_kev,
                                   const std::array<double, 2>& kt_per_aa,
                                   bool relativistic_ug) {
  Kinematics kin = electron_kinematics(energy_kev, relativistic_ug);
  LabFrame frame = row_frame(crystal.cell, g_hkl);
  BeamSet set;
  set.beams = generate_row_beams(crystal, kin, g_hkl, n_max, frame);
  set.incident_k = tilted_k(kin.k0, kt_per_aa[0], kt_per_aa[1]);
  set_excitation_errors(set.beams, set.incident_k);
  if (set.n_strong() <= 1 && n_max > 0)
    std::cerr << "warning: every row reflection is forbidden, "
                 "proceeding single-beam\n";
  auto A = assemble_dynamical_matrix(set, crystal, kin);
  BlochSolution sol = solve_bloch(A, set, kin);
  return {std::move(set), std::move(sol), frame, kin};
}

RockingTable rocking_curve(const Crystal& crystal, const std::array<int, 3>& g_hkl,
                           int n_max, double energy_kev, double thickness,
                           double kt_over_g_min, double kt_over_g_max, int steps,
                           bool relativistic_ug) {
  if (steps < 2) throw ConfigError("rocking curve needs at least 2 tilt samples");
  if (!(kt_over_g_max > kt_over_g_min))
    throw ConfigError("rocking range must have kt_over_g_min < kt_over_g_max");
  double g_len = reciprocal_vector(crystal.cell, g_hkl).norm();

  RockingTable table;
  for (int i = 0; i < steps; ++i) {
    double u = kt_over_g_min +
               (kt_over_g_max - kt_over_g_min) * i / double(steps - 1);
    auto setup = systematic_row_setup(crystal, g_hkl, n_max, energy_kev,
                                      {u * g_len, 0.0}, relativistic_ug);
    table.kt_over_g.push_back(u);
    if (table.beams.empty())
      for (const auto& b : setup.sol.beams) table.beams.push_back(b.hkl);
    std::vector<double> row;
    for (const auto& [hkl, I] : beam_intensities(setup.sol, thickness)) {
      (void)hkl;
      row.push_back(I);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

PotentialCoeffs build_potential_coeffs(const BlochSolution& sol) {
  PotentialCoeffs coeffs;
  auto has = [&](const std::array<int, 3>& hkl) {
    for (const auto& c : coeffs)
      if (c.hkl == hkl) return true;
    return false;
  };
  const double scale = h_sq_over_2m0e_v_angstrom2 / sol.kin.u_scale();
  for (const auto& b : sol.beams)
    coeffs.push_back({b.hkl, b.g_lab, scale * b.U_g});
  // complete inversion partners so the synthesized potential is real
  for (const auto& b : sol.beams) {
    std::array<int, 3> m{-b.hkl[0], -b.hkl[1], -b.hkl[2]};
    if (!has(m)) coeffs.push_back({m, -b.g_lab, std::conj(scale * b.U_g)});
  }
  validate_potential_coeffs(coeffs);
  return coeffs;
}

FieldGrid field_map(const BlochSolution& sol, const Crystal& crystal,
                    const std::string& quantity, double z, int n) {
  if (n < 2) throw ConfigError("field grid needs n >= 2");
  FieldGrid grid;
  grid.n = n;
  grid.extent = crystal.cell.a;
  grid.z = z;
  grid.quantity = quantity;
  grid.values.assign(static_cast<std::size_t>(n) * n,
                     std::numeric_limits<double>::quiet_NaN());

  int axis = -1;
  enum class Kind { intensity, speed, q, fq, fe } kind;
  if (quantity == "intensity") {
    kind = Kind::intensity;
    grid.unit_suffix = "_norm";
  } else if (quantity == "speed") {
    kind = Kind::speed;
    grid.unit_suffix = "_aainv";
  } else if (quantity == "q") {
    kind = Kind::q;
    grid.unit_suffix = "_ev";
  } else if (quantity == "fq_x" || quantity == "fq_y" || quantity == "fq_z") {
    kind = Kind::fq;
    axis = quantity[3] - 'x';
    grid.unit_suffix = "_ev_per_angstrom";
  } else if (quantity == "fe_x" || quantity == "fe_y" || quantity == "fe_z") {
    kind = Kind::fe;
    axis = quantity[3] - 'x';
    grid.unit_suffix = "_ev_per_angstrom";
  } else {
    throw ConfigError("unknown field quantity: " + quantity);
  }

  PotentialCoeffs coeffs;
  if (kind == Kind::fe) coeffs = build_potential_coeffs(sol);

  const double a = crystal.cell.a;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      Vec3 r((ix + 0.5) * a / n, (iy + 0.5) * a / n, z);
      double& out = grid.values[static_cast<std::size_t>(iy) * n + ix];
      try {
        switch (kind) {
          case Kind::intensity:
            out = std::norm(wave_at(sol, r, 0).psi);
            break;
          case Kind::speed:
            out = velocity_field(sol, r).norm();
            break;
          case Kind::q:
            out = quantum_potential(sol, r);
            break;
          case Kind::fq:
            out = quantum_force(sol, r)[axis];
            break;
          case Kind::fe:
            out = electrostatic_force(coeffs, r)[axis];
            break;
        }
      } catch (const NodeError&) {
        // hole stays NaN
      }
    }
  return grid;
}

}  // namespace blochflow
