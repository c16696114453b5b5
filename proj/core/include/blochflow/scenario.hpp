#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "blochflow/bloch.hpp"
#include "blochflow/hydro.hpp"

namespace blochflow {

enum class ScenarioKind { zone_axis, two_beam, two_beam_normal, systematic_row, rocking };

enum class SeedMode { line, grid };

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::zone_axis;
  double energy_kev = 200.0;
  std::array<int, 3> g_hkl{2, 0, 0};
  std::array<int, 3> zone_hkl{1, 0, 0};
  int n_max = 3;
  bool at_bragg = true;
  std::array<double, 2> kt_per_aa{0.0, 0.0};
  double thickness_aa = 500.0;
  // rocking range
  double kt_over_g_min = -0.5, kt_over_g_max = 0.5;
  int kt_steps = 41;
  std::optional<double> reference_xi_angstrom;

  double g_max_aa_inv = 2.0;
  double c_s = 80.0, c_w = 90.0;

  double dz_aa = 0.1;
  Rk2Variant rk2_variant = Rk2Variant::midpoint;

  SeedMode seed_mode = SeedMode::line;
  int seed_n = 50;
  double seed_y_frac = 0.5;

  std::vector<std::string> quantities{"intensity"};
  int grid_n = 64;
  bool raster = true;
  int curve_n = 500;
  std::optional<double> fields_z;  // defaults to thickness

  std::string crystal_preset = "Cu-fcc";
  std::string crystal_file;  // overrides the preset when set

  bool relativistic_ug = true;
};

struct ScenarioSetup {
  BeamSet set;
  BlochSolution sol;
  LabFrame frame;
  Kinematics kin;
};

// normal-incidence zone-axis pipeline: generate, partition, promote weak beams
// hitting the Bethe floor, assemble, diagonalize
ScenarioSetup zone_axis_setup(const Crystal& crystal, const std::array<int, 3>& zone,
                              double energy_kev, double c_s, double c_w, double g_max,
                              bool relativistic_ug);

// exactly {000, g}; tilted so s_g = 0 when at_bragg, else normal incidence
ScenarioSetup two_beam_setup(const Crystal& crystal, const std::array<int, 3>& g_hkl,
                             double energy_kev, bool at_bragg, bool relativistic_ug);

// row {n g : -n_max..n_max}; forbidden members eliminated; k_t in the lab frame
ScenarioSetup systematic_row_setup(const Crystal& crystal,
                                   const std::array<int, 3>& g_hkl, int n_max,
                                   double energy_kev,
                                   const std::array<double, 2>& kt_per_aa,
                                   bool relativistic_ug);

struct RockingTable {
  std::vector<double> kt_over_g;
  std::vector<std::array<int, 3>> beams;     // active beams, solve order
  std::vector<std::vector<double>> rows;     // rows[sample][beam]
};

RockingTable rocking_curve(const Crystal& crystal, const std::array<int, 3>& g_hkl,
                           int n_max, double energy_kev, double thickness,
                           double kt_over_g_min, double kt_over_g_max, int steps,
                           bool relativistic_ug);

struct FieldGrid {
  int n = 0;
  double extent = 0.0;  // cell edge, A
  double z = 0.0;
  std::string quantity;
  std::string unit_suffix;           // _norm, _aainv, _ev, _ev_per_angstrom
  std::vector<double> values;        // row-major, NaN marks node holes
};

// quantity: intensity, speed, q, fq_x/fq_y/fq_z, fe_x/fe_y/fe_z
FieldGrid field_map(const BlochSolution& sol, const Crystal& crystal,
                    const std::string& quantity, double z, int n);

// Fourier components of the physical potential carried by the solve's beams;
// always non-relativistic regardless of the U_g flag
PotentialCoeffs build_potential_coeffs(const BlochSolution& sol);

}  // namespace blochflow
