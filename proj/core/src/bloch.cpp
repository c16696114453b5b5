#include "blochflow/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "blochflow/constants.hpp"
#include "blochflow/errors.hpp"

namespace blochflow {

Eigen::MatrixXcd assemble_dynamical_matrix(const BeamSet& set, const Crystal& crystal,
                                           const Kinematics& kin) {
  auto strong = set.strong_indices();
  const auto n = static_cast<Eigen::Index>(strong.size());
  if (n == 0) throw NumericError("no strong beams to assemble");

  auto U_diff = [&](const Beam& a, const Beam& b) {
    std::array<int, 3> d{a.hkl[0] - b.hkl[0], a.hkl[1] - b.hkl[1],
                         a.hkl[2] - b.hkl[2]};
    return potential_coefficient_U(crystal.cell, crystal.params, d, kin);
  };

  Eigen::MatrixXcd A(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Beam& gi = set.beams[strong[i]];
    for (Eigen::Index j = 0; j < n; ++j) {
      const Beam& gj = set.beams[strong[j]];
      A(i, j) = (i == j) ? cxd(2.0 * kin.k0 * gi.s_g, 0.0) : U_diff(gi, gj);
    }
  }

  for (const auto& b : set.beams) {
    if (b.tag != BeamTag::weak) continue;
    double denom = 2.0 * kin.k0 * b.s_g;
    if (std::abs(denom) < 1e-6) throw BetheFloorError(b.hkl);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        A(i, j) -= U_diff(set.beams[strong[i]], b) * U_diff(b, set.beams[strong[j]]) /
                   denom;
  }
  return A;
}

BlochSolution solve_bloch(const Eigen::MatrixXcd& A, const BeamSet& set,
                          const Kinematics& kin) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
  if (es.info() != Eigen::Success) throw NumericError("eigensolver failed");

  const auto n = A.rows();
  BlochSolution sol;
  sol.kin = kin;
  sol.incident_k = set.incident_k;
  for (auto i : set.strong_indices()) sol.beams.push_back(set.beams[i]);

  // Eigen returns ascending eigenvalues; flip to descending gamma
  sol.gammas.resize(n);
  sol.C.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    sol.gammas[j] = es.eigenvalues()[n - 1 - j] / (2.0 * kin.k0);
    sol.C.col(j) = es.eigenvectors().col(n - 1 - j);
  }

  // entrance face: amplitude 1 in (000), 0 elsewhere; beam 0 is (000)
  std::size_t i000 = 0;
  for (std::size_t i = 0; i < sol.beams.size(); ++i)
    if (sol.beams[i].hkl == std::array<int, 3>{0, 0, 0}) i000 = i;
  sol.alphas = sol.C.row(static_cast<Eigen::Index>(i000)).conjugate().transpose();
  return sol;
}

Eigen::VectorXcd BlochSolution::beam_amplitudes(double z, int deriv) const {
  const auto n = gammas.size();
  Eigen::VectorXcd w(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    cxd factor = alphas[j] * std::exp(cxd(0.0, two_pi * gammas[j] * z));
    for (int d = 0; d < deriv; ++d) factor *= cxd(0.0, two_pi * gammas[j]);
    w[j] = factor;
  }
  return C * w;
}

WaveSample wave_at(const BlochSolution& sol, const Vec3& r, int order) {
  WaveSample s;
  s.order = order;
  Eigen::VectorXcd phi = sol.beam_amplitudes(r.z(), 0);
  Eigen::VectorXcd dphi, ddphi;
  if (order >= 1) dphi = sol.beam_amplitudes(r.z(), 1);
  if (order >= 2) ddphi = sol.beam_amplitudes(r.z(), 2);

  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    Vec3 kg = sol.incident_k + sol.beams[static_cast<std::size_t>(i)].g_lab;
    double phase = two_pi * kg.dot(r);
    cxd carrier(std::cos(phase), std::sin(phase));
    s.psi += phi[i] * carrier;
    if (order >= 1) {
      for (int ax = 0; ax < 3; ++ax) {
        cxd d = cxd(0.0, two_pi * kg[ax]) * phi[i];
        if (ax == 2) d += dphi[i];
        s.grad[ax] += d * carrier;
      }
    }
    if (order >= 2) {
      for (int ax = 0; ax < 3; ++ax) {
        cxd ik = cxd(0.0, two_pi * kg[ax]);
        cxd dd = ik * ik * phi[i];
        if (ax == 2) dd += 2.0 * ik * dphi[i] + ddphi[i];
        s.second[ax] += dd * carrier;
      }
    }
  }
  return s;
}

std::vector<std::pair<std::array<int, 3>, double>> beam_intensities(
    const BlochSolution& sol, double z) {
  Eigen::VectorXcd phi = sol.beam_amplitudes(z, 0);
  std::vector<std::pair<std::array<int, 3>, double>> out;
  out.reserve(sol.beams.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i)
    out.emplace_back(sol.beams[static_cast<std::size_t>(i)].hkl, std::norm(phi[i]));
  return out;
}

double delta_I(const BlochSolution& full, const BlochSolution& reduced, double T,
               int N_z) {
  if (T <= 0.0 || N_z < 2) throw NumericError("delta_I needs T > 0 and N_z >= 2");
  std::vector<Eigen::Index> map;  // reduced beam -> full beam
  for (const auto& rb : reduced.beams) {
    auto it = std::find_if(full.beams.begin(), full.beams.end(),
                           [&](const Beam& fb) { return fb.hkl == rb.hkl; });
    if (it == full.beams.end())
      throw NumericError("delta_I: beam lists not aligned");
    map.push_back(static_cast<Eigen::Index>(it - full.beams.begin()));
  }
  const auto ns = static_cast<double>(reduced.beams.size());
  double mean_acc = 0.0;
  for (int i = 1; i <= N_z; ++i) {
    double z = T * i / N_z;
    Eigen::VectorXcd pf = full.beam_amplitudes(z, 0);
    Eigen::VectorXcd pr = reduced.beam_amplitudes(z, 0);
    double sum = 0.0;
    for (std::size_t b = 0; b < map.size(); ++b) {
      double d = std::norm(pf[map[b]]) - std::norm(pr[static_cast<Eigen::Index>(b)]);
      sum += d * d;
    }
    mean_acc += sum;
  }
  mean_acc /= N_z;
  return std::sqrt(mean_acc / ns / T);
}

double extinction_distance(const cxd& U_g, const Vec3& k, const Vec3& g,
                           const Vec3& surface_normal) {
  double u = std::abs(U_g);
  if (u == 0.0) return std::numeric_limits<double>::infinity();
  Vec3 kg = k + g;
  double cos_alpha = kg.dot(surface_normal.normalized()) / kg.norm();
  return kg.norm() * std::abs(cos_alpha) / u;
}

}  // namespace blochflow
