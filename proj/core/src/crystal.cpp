#include "blochflow/crystal.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "blochflow/constants.hpp"
#include "blochflow/errors.hpp"

namespace blochflow {

CrystalCell build_cell(double lattice_a, std::vector<Vec3> basis_frac,
                       std::string element) {
  if (lattice_a <= 0.0) throw ConfigError("lattice constant must be positive");
  if (basis_frac.empty()) throw ConfigError("crystal basis must be non-empty");
  for (auto& p : basis_frac)
    for (int i = 0; i < 3; ++i) {
      double f = p[i] - std::floor(p[i]);
      if (f < 0.0 || f >= 1.0) throw ConfigError("basis coordinate outside [0,1)");
      p[i] = f;
    }
  return CrystalCell{lattice_a, std::move(basis_frac), std::move(element)};
}

Crystal cu_fcc_preset() {
  Crystal c;
  c.cell = build_cell(3.615,
                      {Vec3(0, 0, 0), Vec3(0.5, 0.5, 0), Vec3(0.5, 0, 0.5),
                       Vec3(0, 0.5, 0.5)},
                      "Cu");
  c.params.A = {0.358774531, 1.76181348, 0.636905053};
  c.params.B = {0.106153463, 1.01640995, 15.3659093};
  c.params.C = {0.00744930667, 0.189002347, 0.229619589};
  c.params.D = {0.0385345989, 0.398427790, 0.901419843};
  c.preset_name = "Cu-fcc";
  return c;
}

std::optional<Crystal> crystal_preset(const std::string& name) {
  if (name == "Cu-fcc") return cu_fcc_preset();
  return std::nullopt;
}

namespace {

std::vector<double> parse_numbers(const std::string& s, std::size_t line_no) {
  std::vector<double> out;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (...) {
      throw ConfigError("crystal file line " + std::to_string(line_no) +
                        ": bad number '" + tok + "'");
    }
  }
  return out;
}

}  // namespace

Crystal load_crystal_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open crystal file: " + path);
  double a = -1.0;
  std::string element;
  std::vector<Vec3> basis;
  std::vector<std::array<double, 4>> rows;  // A,B,C,D per term
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw ConfigError("crystal file line " + std::to_string(line_no) +
                          ": expected key = value");
      continue;
    }
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key == "lattice_a_angstrom") {
      a = std::stod(val);
    } else if (key == "element") {
      element = val;
    } else if (key == "basis") {
      auto v = parse_numbers(val, line_no);
      if (v.size() != 3)
        throw ConfigError("crystal file line " + std::to_string(line_no) +
                          ": basis row needs three fractions");
      basis.emplace_back(v[0], v[1], v[2]);
    } else if (key == "parametrization") {
      auto v = parse_numbers(val, line_no);
      if (v.size() != 4)
        throw ConfigError("crystal file line " + std::to_string(line_no) +
                          ": parametrization row needs A,B,C,D");
      rows.push_back({v[0], v[1], v[2], v[3]});
    } else {
      throw ConfigError("crystal file line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    }
  }
  if (a <= 0.0) throw ConfigError("crystal file: missing lattice_a_angstrom");
  if (rows.size() != 3)
    throw ConfigError("crystal file: need exactly three parametrization rows");
  Crystal c;
  c.cell = build_cell(a, std::move(basis), element.empty() ? "X" : element);
  for (int k = 0; k < 3; ++k) {
    c.params.A[k] = rows[k][0];
    c.params.B[k] = rows[k][1];
    c.params.C[k] = rows[k][2];
    c.params.D[k] = rows[k][3];
    if (c.params.B[k] <= 0.0 || c.params.D[k] <= 0.0)
      throw ConfigError("crystal file: B and D terms must be positive");
  }
  return c;
}

std::string crystal_canonical_text(const Crystal& c) {
  std::ostringstream os;
  os.precision(17);
  os << "lattice_a_angstrom=" << c.cell.a << "\nelement=" << c.cell.element << "\n";
  for (const auto& b : c.cell.basis)
    os << "basis=" << b.x() << "," << b.y() << "," << b.z() << "\n";
  for (int k = 0; k < 3; ++k)
    os << "parametrization=" << c.params.A[k] << "," << c.params.B[k] << ","
       << c.params.C[k] << "," << c.params.D[k] << "\n";
  return os.str();
}

Vec3 reciprocal_vector(const CrystalCell& cell, const std::array<int, 3>& hkl) {
  return Vec3(hkl[0], hkl[1], hkl[2]) / cell.a;
}

double scattering_factor(const ScatteringParams& p, double g_sq) {
  if (g_sq < 0.0) throw NumericError("scattering factor: negative g^2");
  double f = 0.0;
  for (int k = 0; k < 3; ++k)
    f += p.A[k] / (g_sq + p.B[k]) + p.C[k] * std::exp(-p.D[k] * g_sq);
  return f;
}

cxd structure_factor(const CrystalCell& cell, const ScatteringParams& p,
                     const std::array<int, 3>& hkl) {
  const Vec3 g = reciprocal_vector(cell, hkl);
  const double f = scattering_factor(p, g.squaredNorm());
  cxd sum = 0.0;
  for (const auto& frac : cell.basis) {
    // g.r with r = a*frac reduces to h*fx + k*fy + l*fz
    double phase = -two_pi * (hkl[0] * frac.x() + hkl[1] * frac.y() + hkl[2] * frac.z());
    sum += cxd(std::cos(phase), std::sin(phase));
  }
  return f * sum;
}

cxd potential_coefficient_U(const CrystalCell& cell, const ScatteringParams& p,
                            const std::array<int, 3>& hkl, const Kinematics& kin) {
  return kin.u_scale() * structure_factor(cell, p, hkl) / (pi * cell.volume());
}

Kinematics electron_kinematics(double energy_kev, bool relativistic_ug) {
  if (energy_kev <= 0.0) throw ConfigError("beam energy must be positive");
  Kinematics kin;
  kin.energy_kev = energy_kev;
  kin.lambda = hc_kev_angstrom /
               std::sqrt(energy_kev * (2.0 * electron_rest_kev + energy_kev));
  kin.k0 = 1.0 / kin.lambda;
  kin.gamma_rel = 1.0 + energy_kev / electron_rest_kev;
  kin.relativistic_ug = relativistic_ug;
  return kin;
}

void validate_potential_coeffs(const PotentialCoeffs& coeffs) {
  for (const auto& c : coeffs) {
    bool found = false;
    for (const auto& d : coeffs)
      if (d.hkl[0] == -c.hkl[0] && d.hkl[1] == -c.hkl[1] && d.hkl[2] == -c.hkl[2]) {
        found = true;
        break;
      }
    if (!found)
      throw NumericError("potential coefficient set not closed under g -> -g");
  }
}

double real_space_potential(const PotentialCoeffs& coeffs, const Vec3& r) {
  cxd v = 0.0;
  for (const auto& c : coeffs) {
    double phase = two_pi * c.g_lab.dot(r);
    v += c.v_volts * cxd(std::cos(phase), std::sin(phase));
  }
  return v.real();
}

Vec3 electrostatic_force(const PotentialCoeffs& coeffs, const Vec3& r) {
  // d/dr of sum V_g exp(2 pi i g.r); imaginary parts cancel for a closed set
  Vec3 f = Vec3::Zero();
  for (const auto& c : coeffs) {
    double phase = two_pi * c.g_lab.dot(r);
    cxd dv = c.v_volts * cxd(0.0, two_pi) * cxd(std::cos(phase), std::sin(phase));
    f += dv.real() * c.g_lab;
  }
  return f;
}

}  // namespace blochflow
