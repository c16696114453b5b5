#pragma once

#include <array>
#include <complex>
#include <optional>
#include <vector>

#include "blochflow/crystal.hpp"

namespace blochflow {

enum class BeamTag { strong, weak, eliminated };

struct Beam {
  std::array<int, 3> hkl{};
  Vec3 g_lab = Vec3::Zero();  // Cartesian A^-1, lab frame
  double s_g = 0.0;           // excitation error, A^-1
  cxd U_g{};                  // A^-2 (with the configured scaling)
  BeamTag tag = BeamTag::strong;
};

// Rotation from crystal (hkl) axes into the lab frame: row i of `axes` is the
// crystal direction mapped onto lab axis i. Beam travels along +z(lab).
struct LabFrame {
  Eigen::Matrix3d crystal_to_lab = Eigen::Matrix3d::Identity();
  Vec3 to_lab(const Vec3& v_crystal) const { return crystal_to_lab * v_crystal; }
};

// Zone (100): lab x <- [010], y <- [001], z <- [100]. Same pattern for (010)/(001).
LabFrame zone_axis_frame(const std::array<int, 3>& zone);

struct BeamSet {
  std::vector<Beam> beams;  // index 0 is always (000), always strong
  Vec3 incident_k = Vec3::Zero();  // lab frame, includes tilt, |k| = k0
  double c_s = 0.0, c_w = 0.0;
  std::size_t n_strong() const;
  std::size_t n_weak() const;
  std::vector<std::size_t> strong_indices() const;
  std::optional<std::size_t> find(const std::array<int, 3>& hkl) const;
};

// s_g = -(2 k.g + g^2) / (2|k|); positive inside the Ewald sphere
double excitation_error(const Vec3& incident_k, const Vec3& g);

// All zero-order-Laue-zone reflections of the zone axis with |g| <= g_max,
// zero-structure-factor beams tagged eliminated. (000) first, then by |g|.
std::vector<Beam> generate_zone_beams(const Crystal& crystal, const Kinematics& kin,
                                      const std::array<int, 3>& zone, double g_max,
                                      const LabFrame& frame);

// Row {n*g : -n_max..n_max}; forbidden members retained but tagged eliminated.
std::vector<Beam> generate_row_beams(const Crystal& crystal, const Kinematics& kin,
                                     const std::array<int, 3>& g_hkl, int n_max,
                                     const LabFrame& frame);

// Strong if |s|/(lambda |U|) <= c_s, weak if in (c_s, c_w], dropped otherwise.
// (000) is forced strong; eliminated beams are kept but not partitioned.
BeamSet partition_bethe(std::vector<Beam> candidates, const Vec3& incident_k,
                        const Kinematics& kin, double c_s, double c_w);

void set_excitation_errors(std::vector<Beam>& beams, const Vec3& incident_k);

struct CountScanRow {
  double g_max;
  std::size_t n_strong, n_weak;
};

// Coarse g_max scan at fixed thresholds; reports counts per cutoff.
std::vector<CountScanRow> scan_beam_counts(const Crystal& crystal,
                                           const Kinematics& kin,
                                           const std::array<int, 3>& zone,
                                           double c_s, double c_w, double g_max_lo,
                                           double g_max_hi, double step);

struct ThresholdScanResult {
  double c_s, c_w, g_max;
  std::size_t n_strong, n_weak;
};

// Wider discovery: scan selection thresholds (and g_max) for the configuration
// closest to the requested strong/weak counts. Exact match wins; ties broken by
// total distance |ds| + |dw|.
ThresholdScanResult scan_selection_thresholds(const Crystal& crystal,
                                              const Kinematics& kin,
                                              const std::array<int, 3>& zone,
                                              std::size_t want_strong,
                                              std::size_t want_weak);

}  // namespace blochflow
