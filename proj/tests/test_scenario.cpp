#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "blochflow/constants.hpp"
#include "blochflow/errors.hpp"
#include "blochflow/scenario.hpp"

using namespace blochflow;

namespace {
const Crystal cu = cu_fcc_preset();

double intensity_of(const BlochSolution& sol, const std::array<int, 3>& hkl,
                    double z) {
  for (const auto& [h, I] : beam_intensities(sol, z))
    if (h == hkl) return I;
  FAIL("beam not present");
  return 0.0;
}

// two carriers with equal weight and opposite sign: node planes at x = m a/2
BlochSolution standing_pair() {
  Kinematics kin = electron_kinematics(200.0, true);
  BlochSolution sol;
  sol.kin = kin;
  sol.incident_k = Vec3(0, 0, kin.k0);
  Beam b0;
  b0.hkl = {0, 0, 0};
  Beam bg;
  bg.hkl = {2, 0, 0};
  bg.g_lab = Vec3(2.0 / cu.cell.a, 0, 0);
  sol.beams = {b0, bg};
  sol.gammas = Eigen::Vector2d(0, 0);
  sol.C = Eigen::Matrix2cd::Identity();
  sol.alphas = Eigen::Vector2cd(1 / std::sqrt(2.0), -1 / std::sqrt(2.0));
  return sol;
}
}  // namespace

TEST_CASE("zone axis beam counts at the reference settings") {
  auto s200 = zone_axis_setup(cu, {1, 0, 0}, 200.0, 80.0, 90.0, 2.0, false);
  CHECK(s200.set.n_strong() == 29);
  CHECK(s200.set.n_weak() == 8);
  CHECK(s200.sol.beams.size() == 29);

  auto s30 = zone_axis_setup(cu, {1, 0, 0}, 30.0, 245.0, 500.0, 2.8, false);
  CHECK(s30.set.n_strong() == 57);
  CHECK(s30.set.n_weak() == 24);

  // unit total intensity at depth survives the perturbative fold
  double sum = 0;
  for (const auto& [h, I] : beam_intensities(s30.sol, 312.5)) {
    (void)h;
    sum += I;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("two-beam geometry") {
  auto bragg = two_beam_setup(cu, {2, 0, 0}, 200.0, true, true);
  REQUIRE(bragg.set.beams.size() == 2);
  CHECK(bragg.set.beams[1].s_g == 0.0);  // exact by construction
  double k0 = bragg.kin.k0;
  CHECK(bragg.set.incident_k.norm() == doctest::Approx(k0).epsilon(1e-13));
  CHECK(bragg.set.incident_k.x() ==
        doctest::Approx(-0.5 * bragg.set.beams[1].g_lab.x()));
  CHECK(bragg.set.incident_k.z() > 0);

  auto normal = two_beam_setup(cu, {2, 0, 0}, 200.0, false, true);
  double g2 = normal.set.beams[1].g_lab.squaredNorm();
  CHECK(normal.set.beams[1].s_g == doctest::Approx(-g2 / (2 * k0)).epsilon(1e-14));

  CHECK_THROWS_AS(two_beam_setup(cu, {2, 1, 0}, 200.0, true, true), ConfigError);
  CHECK_THROWS_AS(two_beam_setup(cu, {1, 0, 0}, 200.0, true, true), ConfigError);
  CHECK_THROWS_AS(two_beam_setup(cu, {0, 0, 2}, 200.0, true, true), ConfigError);
  CHECK_THROWS_AS(two_beam_setup(cu, {0, 0, 0}, 200.0, true, true), ConfigError);
}

TEST_CASE("systematic row membership") {
  auto row = systematic_row_setup(cu, {1, 0, 0}, 3, 200.0, {0, 0}, true);
  CHECK(row.set.beams.size() == 7);
  CHECK(row.set.n_strong() == 3);  // 000 and the +-200 members survive
  REQUIRE(row.sol.beams.size() == 3);
  CHECK(row.sol.beams[0].hkl == std::array<int, 3>{0, 0, 0});
  CHECK(row.sol.beams[1].hkl == std::array<int, 3>{-2, 0, 0});
  CHECK(row.sol.beams[2].hkl == std::array<int, 3>{2, 0, 0});

  // a row where every reflection is forbidden degrades to a free beam
  auto empty = systematic_row_setup(cu, {1, 1, 0}, 1, 200.0, {0, 0}, true);
  CHECK(empty.sol.beams.size() == 1);
  CHECK(std::abs(std::abs(wave_at(empty.sol, Vec3(0.7, 0.4, 90.0), 0).psi) - 1.0) <
        1e-12);

  CHECK_THROWS_AS(systematic_row_setup(cu, {2, 0, 0}, 1, 200.0, {50.0, 0}, true),
                  ConfigError);  // tilt beyond |k|
}

TEST_CASE("row wave is mirror symmetric at normal incidence") {
  auto row = systematic_row_setup(cu, {2, 0, 0}, 1, 200.0, {0, 0}, true);
  for (double z : {137.0, 402.3})
    for (double x : {0.3, 1.1}) {
      double plus = std::abs(wave_at(row.sol, Vec3(x, 0.5, z), 0).psi);
      double minus = std::abs(wave_at(row.sol, Vec3(-x, 0.5, z), 0).psi);
      CHECK(std::abs(plus - minus) < 1e-8);
    }
}

TEST_CASE("rocking curve table") {
  CHECK_THROWS_AS(rocking_curve(cu, {2, 0, 0}, 1, 200.0, 500.0, -0.5, 0.5, 1, true),
                  ConfigError);
  CHECK_THROWS_AS(rocking_curve(cu, {2, 0, 0}, 1, 200.0, 500.0, 0.5, -0.5, 11, true),
                  ConfigError);

  auto t = rocking_curve(cu, {2, 0, 0}, 1, 200.0, 500.0, -0.5, 0.5, 11, true);
  REQUIRE(t.kt_over_g.size() == 11);
  REQUIRE(t.beams.size() == 3);
  CHECK(t.beams[1] == std::array<int, 3>{-2, 0, 0});
  CHECK(t.kt_over_g.front() == doctest::Approx(-0.5));
  CHECK(t.kt_over_g.back() == doctest::Approx(0.5));

  for (const auto& row : t.rows) {
    REQUIRE(row.size() == 3);
    CHECK(row[0] + row[1] + row[2] == doctest::Approx(1.0).epsilon(1e-9));
  }
  // tilting by +u excites -g exactly as -u excites +g
  for (int i = 0; i < 11; ++i)
    CHECK(std::abs(t.rows[i][2] - t.rows[10 - i][1]) < 1e-9);
}

TEST_CASE("tilted row reproduces the two-beam oscillation") {
  auto tb = two_beam_setup(cu, {2, 0, 0}, 200.0, true, true);
  double xi = 1.0 / (tb.sol.gammas[0] - tb.sol.gammas[1]);

  double g_len = tb.set.beams[1].g_lab.norm();
  auto row = systematic_row_setup(cu, {2, 0, 0}, 1, 200.0, {0.5 * g_len, 0}, true);
  std::size_t im = *row.set.find({-2, 0, 0});
  CHECK(row.set.beams[im].s_g == 0.0);  // Bragg matched by the tilt

  for (double T : {100.0, 200.0, 300.0, 400.0, 500.0}) {
    double two_beam = std::pow(std::sin(pi * T / xi), 2);
    double dev = std::abs(intensity_of(row.sol, {-2, 0, 0}, T) - two_beam);
    CHECK(dev < 0.25);  // third beam perturbs but does not bury the oscillation
    if (T == 400.0) CHECK(dev < 0.05);
  }
}

TEST_CASE("field maps sample the wave on cell-centered points") {
  auto tb = two_beam_setup(cu, {2, 0, 0}, 200.0, true, true);
  auto grid = field_map(tb.sol, cu, "intensity", 100.0, 4);
  CHECK(grid.n == 4);
  CHECK(grid.extent == doctest::Approx(cu.cell.a));
  CHECK(grid.z == 100.0);
  CHECK(grid.unit_suffix == "_norm");
  for (int iy = 0; iy < 4; ++iy)
    for (int ix = 0; ix < 4; ++ix) {
      Vec3 r((ix + 0.5) * cu.cell.a / 4, (iy + 0.5) * cu.cell.a / 4, 100.0);
      double direct = std::norm(wave_at(tb.sol, r, 0).psi);
      CHECK(grid.values[iy * 4 + ix] == doctest::Approx(direct).epsilon(1e-12));
    }

  CHECK(field_map(tb.sol, cu, "speed", 50.0, 2).unit_suffix == "_aainv");
  CHECK(field_map(tb.sol, cu, "q", 50.0, 2).unit_suffix == "_ev");
  CHECK(field_map(tb.sol, cu, "fq_y", 50.0, 2).unit_suffix == "_ev_per_angstrom");
  CHECK_THROWS_AS(field_map(tb.sol, cu, "curl", 50.0, 2), ConfigError);
  CHECK_THROWS_AS(field_map(tb.sol, cu, "intensity", 50.0, 1), ConfigError);
}

TEST_CASE("node holes become NaN cells") {
  auto sol = standing_pair();
  auto grid = field_map(sol, cu, "q", 10.0, 3);  // center column sits on x = a/2
  int holes = 0;
  for (int iy = 0; iy < 3; ++iy)
    for (int ix = 0; ix < 3; ++ix) {
      bool nan = std::isnan(grid.values[iy * 3 + ix]);
      if (nan) ++holes;
      CHECK(nan == (ix == 1));
    }
  CHECK(holes == 3);
}

TEST_CASE("electrostatic force maps complete the inversion partners") {
  auto tb = two_beam_setup(cu, {2, 0, 0}, 200.0, true, true);
  auto coeffs = build_potential_coeffs(tb.sol);
  REQUIRE(coeffs.size() == 3);  // 000, g, and the added -g conjugate

  // the synthesized potential is the physical one, independent of the
  // relativistic scaling used in the solve
  auto tb_nr = two_beam_setup(cu, {2, 0, 0}, 200.0, true, false);
  auto coeffs_nr = build_potential_coeffs(tb_nr.sol);
  for (const auto& c : coeffs) {
    bool found = false;
    for (const auto& d : coeffs_nr)
      if (d.hkl == c.hkl) {
        CHECK(std::abs(d.v_volts - c.v_volts) < 1e-12 * std::abs(c.v_volts));
        found = true;
      }
    CHECK(found);
  }

  auto fx = field_map(tb.sol, cu, "fe_x", 75.0, 6);
  for (int iy = 0; iy < 6; ++iy)
    for (int ix = 0; ix < 6; ++ix) {
      double v = fx.values[iy * 6 + ix];
      double mirrored = fx.values[iy * 6 + (5 - ix)];
      CHECK(v == doctest::Approx(-mirrored).epsilon(1e-9));
    }
}

TEST_CASE("exit-face intensity concentrates on the columns") {
  auto setup = zone_axis_setup(cu, {1, 0, 0}, 200.0, 55.0, 90.0, 2.0, true);
  REQUIRE(setup.set.n_strong() == 29);
  REQUIRE(setup.set.n_weak() == 8);
  auto grid = field_map(setup.sol, cu, "intensity", 500.0, 64);

  double vmax = -1, vmin = 1e300;
  int imax = -1;
  for (int i = 0; i < 64 * 64; ++i) {
    REQUIRE(std::isfinite(grid.values[i]));
    if (grid.values[i] > vmax) {
      vmax = grid.values[i];
      imax = i;
    }
    vmin = std::min(vmin, grid.values[i]);
  }
  CHECK(vmax == doctest::Approx(1.912).epsilon(5e-3));
  CHECK(vmin == doctest::Approx(0.689).epsilon(5e-3));

  // brightest cell lies on a projected atomic column (multiples of a/2)
  const double a = cu.cell.a;
  double x = (imax % 64 + 0.5) * a / 64;
  double y = (imax / 64 + 0.5) * a / 64;
  auto col_dist = [&](double u) {
    double m = std::fmod(u, a / 2);
    return std::min(m, a / 2 - m);
  };
  CHECK(col_dist(x) < 1.5 * a / 64);
  CHECK(col_dist(y) < 1.5 * a / 64);
}
