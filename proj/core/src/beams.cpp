#include "blochflow/beams.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "blochflow/constants.hpp"
#include "blochflow/errors.hpp"

namespace blochflow {

LabFrame zone_axis_frame(const std::array<int, 3>& zone) {
  LabFrame f;
  // rows: crystal direction seen along lab x, y, z
  if (zone == std::array<int, 3>{1, 0, 0}) {
    f.crystal_to_lab << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  } else if (zone == std::array<int, 3>{0, 1, 0}) {
    f.crystal_to_lab << 0, 0, 1, 1, 0, 0, 0, 1, 0;
  } else if (zone == std::array<int, 3>{0, 0, 1}) {
    f.crystal_to_lab.setIdentity();
  } else {
    throw ConfigError("supported zone axes: (100), (010), (001)");
  }
  return f;
}

double excitation_error(const Vec3& incident_k, const Vec3& g) {
  double kn = incident_k.norm();
  if (kn <= 0.0) throw NumericError("zero incident wave vector");
  return -(2.0 * incident_k.dot(g) + g.squaredNorm()) / (2.0 * kn);
}

namespace {

bool forbidden(const Crystal& c, const std::array<int, 3>& hkl, double f0_scale) {
  if (hkl == std::array<int, 3>{0, 0, 0}) return false;
  return std::abs(structure_factor(c.cell, c.params, hkl)) < 1e-12 * f0_scale;
}

void sort_beams(std::vector<Beam>& beams) {
  std::sort(beams.begin(), beams.end(), [](const Beam& a, const Beam& b) {
    double ga = a.g_lab.squaredNorm(), gb = b.g_lab.squaredNorm();
    if (ga != gb) return ga < gb;
    return a.hkl < b.hkl;
  });
}

}  // namespace

std::vector<Beam> generate_zone_beams(const Crystal& crystal, const Kinematics& kin,
                                      const std::array<int, 3>& zone, double g_max,
                                      const LabFrame& frame) {
  if (g_max <= 0.0) throw ConfigError("g_max must be positive");
  const double f0_scale =
      crystal.cell.basis.size() * scattering_factor(crystal.params, 0.0);
  const int nmax = static_cast<int>(std::ceil(g_max * crystal.cell.a));
  std::vector<Beam> out;
  for (int u = -nmax; u <= nmax; ++u)
    for (int v = -nmax; v <= nmax; ++v) {
      // span the two crystal axes transverse to the zone
      std::array<int, 3> hkl{};
      int zi = zone[0] != 0 ? 0 : (zone[1] != 0 ? 1 : 2);
      hkl[(zi + 1) % 3] = u;
      hkl[(zi + 2) % 3] = v;
      Vec3 g = reciprocal_vector(crystal.cell, hkl);
      if (g.norm() > g_max) continue;
      Beam b;
      b.hkl = hkl;
      b.g_lab = frame.to_lab(g);
      b.U_g = potential_coefficient_U(crystal.cell, crystal.params, hkl, kin);
      b.tag = forbidden(crystal, hkl, f0_scale) ? BeamTag::eliminated : BeamTag::strong;
      out.push_back(b);
    }
  sort_beams(out);
  return out;
}

std::vector<Beam> generate_row_beams(const Crystal& crystal, const Kinematics& kin,
                                     const std::array<int, 3>& g_hkl, int n_max,
                                     const LabFrame& frame) {
  if (n_max < 0) throw ConfigError("n_max must be >= 0");
  const double f0_scale =
      crystal.cell.basis.size() * scattering_factor(crystal.params, 0.0);
  std::vector<Beam> out;
  for (int n = -n_max; n <= n_max; ++n) {
    std::array<int, 3> hkl{n * g_hkl[0], n * g_hkl[1], n * g_hkl[2]};
    Beam b;
    b.hkl = hkl;
    b.g_lab = frame.to_lab(reciprocal_vector(crystal.cell, hkl));
    b.U_g = potential_coefficient_U(crystal.cell, crystal.params, hkl, kin);
    b.tag = forbidden(crystal, hkl, f0_scale) ? BeamTag::eliminated : BeamTag::strong;
    out.push_back(b);
  }
  sort_beams(out);
  return out;
}

void set_excitation_errors(std::vector<Beam>& beams, const Vec3& incident_k) {
  for (auto& b : beams) b.s_g = excitation_error(incident_k, b.g_lab);
}

BeamSet partition_bethe(std::vector<Beam> candidates, const Vec3& incident_k,
                        const Kinematics& kin, double c_s, double c_w) {
  if (c_s >= c_w) throw ConfigError("selection thresholds need c_s < c_w");
  bool has_000 = false;
  for (const auto& b : candidates)
    if (b.hkl == std::array<int, 3>{0, 0, 0}) has_000 = true;
  if (!has_000) throw ConfigError("candidate list must include (000)");

  set_excitation_errors(candidates, incident_k);
  BeamSet set;
  set.incident_k = incident_k;
  set.c_s = c_s;
  set.c_w = c_w;
  for (auto& b : candidates) {
    if (b.hkl == std::array<int, 3>{0, 0, 0}) {
      b.tag = BeamTag::strong;  // forced
      set.beams.push_back(b);
      continue;
    }
    if (b.tag == BeamTag::eliminated) {
      set.beams.push_back(b);
      continue;
    }
    double ratio = std::abs(b.s_g) / (kin.lambda * std::abs(b.U_g));
    if (ratio <= c_s) {
      b.tag = BeamTag::strong;
      set.beams.push_back(b);
    } else if (ratio <= c_w) {
      b.tag = BeamTag::weak;
      set.beams.push_back(b);
    }
    // otherwise dropped
  }
  return set;
}

std::size_t BeamSet::n_strong() const {
  return static_cast<std::size_t>(
      std::count_if(beams.begin(), beams.end(),
                    [](const Beam& b) { return b.tag == BeamTag::strong; }));
}

std::size_t BeamSet::n_weak() const {
  return static_cast<std::size_t>(
      std::count_if(beams.begin(), beams.end(),
                    [](const Beam& b) { return b.tag == BeamTag::weak; }));
}

std::vector<std::size_t> BeamSet::strong_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < beams.size(); ++i)
    if (beams[i].tag == BeamTag::strong) idx.push_back(i);
  return idx;
}

std::optional<std::size_t> BeamSet::find(const std::array<int, 3>& hkl) const {
  for (std::size_t i = 0; i < beams.size(); ++i)
    if (beams[i].hkl == hkl) return i;
  return std::nullopt;
}

std::vector<CountScanRow> scan_beam_counts(const Crystal& crystal,
                                           const Kinematics& kin,
                                           const std::array<int, 3>& zone,
                                           double c_s, double c_w, double g_max_lo,
                                           double g_max_hi, double step) {
  LabFrame frame = zone_axis_frame(zone);
  Vec3 k = Vec3(0, 0, kin.k0);
  std::vector<CountScanRow> rows;
  for (double g = g_max_lo; g <= g_max_hi + 1e-12; g += step) {
    auto cand = generate_zone_beams(crystal, kin, zone, g, frame);
    auto set = partition_bethe(std::move(cand), k, kin, c_s, c_w);
    rows.push_back({g, set.n_strong(), set.n_weak()});
  }
  return rows;
}

ThresholdScanResult scan_selection_thresholds(const Crystal& crystal,
                                              const Kinematics& kin,
                                              const std::array<int, 3>& zone,
                                              std::size_t want_strong,
                                              std::size_t want_weak) {
  const double g_max = 3.0;
  LabFrame frame = zone_axis_frame(zone);
  Vec3 k = Vec3(0, 0, kin.k0);
  auto cand = generate_zone_beams(crystal, kin, zone, g_max, frame);
  set_excitation_errors(cand, k);

  // distinct selection ratios; candidate thresholds sit between neighbours.
  // Ratios of one degenerate shell differ only by rounding noise, so collapse
  // near-twins: a cut between them would split the shell unreproducibly.
  std::set<double> raw;
  for (const auto& b : cand) {
    if (b.tag == BeamTag::eliminated || b.hkl == std::array<int, 3>{0, 0, 0})
      continue;
    raw.insert(std::abs(b.s_g) / (kin.lambda * std::abs(b.U_g)));
  }
  std::vector<double> ratios;
  for (double r : raw)
    if (ratios.empty() || r - ratios.back() > 1e-9 * r) ratios.push_back(r);
  std::vector<double> cuts;
  cuts.push_back(ratios.front() / 2.0);
  for (std::size_t i = 0; i + 1 < ratios.size(); ++i)
    cuts.push_back((ratios[i] + ratios[i + 1]) / 2.0);
  cuts.push_back(ratios.back() * 1.1);

  ThresholdScanResult best{};
  long best_dist = -1;
  for (std::size_t i = 0; i < cuts.size(); ++i)
    for (std::size_t j = i + 1; j < cuts.size(); ++j) {
      auto set = partition_bethe(cand, k, kin, cuts[i], cuts[j]);
      long d = std::labs(static_cast<long>(set.n_strong()) -
                         static_cast<long>(want_strong)) +
               std::labs(static_cast<long>(set.n_weak()) -
                         static_cast<long>(want_weak));
      if (best_dist < 0 || d < best_dist) {
        best_dist = d;
        best = {cuts[i], cuts[j], g_max, set.n_strong(), set.n_weak()};
      }
      if (best_dist == 0) return best;
    }
  return best;
}

}  // namespace blochflow
