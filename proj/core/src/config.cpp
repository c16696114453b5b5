#include "blochflow/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "blochflow/errors.hpp"
#include "blochflow/textutil.hpp"

namespace blochflow {

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::zone_axis: return "zone_axis";
    case ScenarioKind::two_beam: return "two_beam";
    case ScenarioKind::two_beam_normal: return "two_beam_normal";
    case ScenarioKind::systematic_row: return "systematic_row";
    case ScenarioKind::rocking: return "rocking";
  }
  throw NumericError("bad scenario kind");
}

ScenarioKind scenario_kind_from(const std::string& name) {
  if (name == "zone_axis") return ScenarioKind::zone_axis;
  if (name == "two_beam") return ScenarioKind::two_beam;
  if (name == "two_beam_normal") return ScenarioKind::two_beam_normal;
  if (name == "systematic_row") return ScenarioKind::systematic_row;
  if (name == "rocking") return ScenarioKind::rocking;
  throw ConfigError("unknown scenario kind '" + name +
                    "' (zone_axis, two_beam, two_beam_normal, systematic_row, "
                    "rocking)");
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

struct LineCtx {
  int line = 0;
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("config line " + std::to_string(line) + ": " + msg);
  }
};

double parse_double(const std::string& v, const LineCtx& ctx) {
  double out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    ctx.fail("expected a number, got '" + v + "'");
  return out;
}

int parse_int(const std::string& v, const LineCtx& ctx) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    ctx.fail("expected an integer, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& v, const LineCtx& ctx) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  ctx.fail("expected a boolean (true/false/on/off), got '" + v + "'");
}

std::array<int, 3> parse_int3(const std::string& v, const LineCtx& ctx) {
  auto toks = split_ws(v);
  if (toks.size() != 3) ctx.fail("expected three integers, got '" + v + "'");
  return {parse_int(toks[0], ctx), parse_int(toks[1], ctx), parse_int(toks[2], ctx)};
}

std::array<double, 2> parse_double2(const std::string& v, const LineCtx& ctx) {
  auto toks = split_ws(v);
  if (toks.size() != 2) ctx.fail("expected two numbers, got '" + v + "'");
  return {parse_double(toks[0], ctx), parse_double(toks[1], ctx)};
}

using Handler = std::function<void(ScenarioConfig&, const std::string&, const LineCtx&)>;

const std::map<std::string, std::map<std::string, Handler>>& handlers() {
  static const std::map<std::string, std::map<std::string, Handler>> table = {
      {"scenario",
       {
           {"kind", [](ScenarioConfig& c, const std::string& v, const LineCtx& ctx) {
              try {
                c.kind = scenario_kind_from(v);
              } catch (const ConfigError& e) {
                ctx.fail(e.what());
              }
            }},
           {"energy_kev", [](ScenarioConfig& c, const std::string& v,
                             const LineCtx& x) { c.energy_kev = parse_double(v, x); }},
           {"g_hkl", [](ScenarioConfig& c, const std::string& v, const LineCtx& x) {
              c.g_hkl = parse_int3(v, x);
            }},
           {"zone_hkl", [](ScenarioConfig& c, const std::string& v, const LineCtx& x) {
              c.zone_hkl = parse_int3(v, x);
            }},
           {"n_max", [](ScenarioConfig& c, const std::string& v, const LineCtx& x) {
              c.n_max = parse_int(v, x);
            }},
           {"at_bragg", [](ScenarioConfig& c, const std::string& v, const LineCtx& x) {
              c.at_bragg = parse_bool(v, x);
            }},
           {"kt_per_aa", [](ScenarioConfig& c, const std::string& v, const LineCtx& x) {
              c.kt_per_aa = parse_double2(v, x);
            }},
           {"thickness_aa", [](ScenarioConfig& c, const std::string& v,
                               const LineCtx& x) { c.thickness_aa = parse_double(v, x); }},
           {"kt_over_g_min", [](ScenarioConfig& c, const std::string& v,
                                const LineCtx& x) { c.kt_over_g_min = parse_double(v, x); }},
           {"kt_over_g_max", [](ScenarioConfig& c, const std::string& v,
                                const LineCtx& x) { c.kt_over_g_max = parse_double(v, x); }},
           {"kt_steps", [](ScenarioConfig& c, const std::string& v, const LineCtx& x) {
              c.kt_steps = parse_int(v, x);
            }},
           {"reference_xi_angstrom",
            [](ScenarioConfig& c, const std::string& v, const LineCtx& x) {
              c.reference_xi_angstrom = parse_double(v, x);
            }},
       }},
      {"beams",
       {
           {"g_max_aa_inv", [](ScenarioConfig& c, const std::string& v,
                               const LineCtx& x) { c.g_max_aa_inv = parse_double(v, x); }},
           {"c_s", [](ScenarioConfig& c, const std::string& v, const LineCtx& x) {
              c.c_s = parse_double(v, x);
            }},
           {"c_w", [](ScenarioConfig& c, const std::string& v, const LineCtx& x) {
              c.c_w = parse_double(v, x);
            }},
       }},
      {"integration",
       {
           {"dz_aa", [](ScenarioConfig& c, const std::string& v, const LineCtx& x) {
              c.dz_aa = parse_double(v, x);
            }},
           {"rk2_variant", [](ScenarioConfig& c, const std::string& v, const LineCtx& x) {
              if (v == "midpoint")
                c.rk2_variant = Rk2Variant::midpoint;
              else if (v == "heun")
                c.rk2_variant = Rk2Variant::heun;
              else
                x.fail("rk2_variant is 'midpoint' or 'heun', got '" + v + "'");
            }},
       }},
      {"seeding",
       {
           {"mode", [](ScenarioConfig& c, const std::string& v, const LineCtx& x) {
              if (v == "line")
                c.seed_mode = SeedMode::line;
              else if (v == "grid")
                c.seed_mode = SeedMode::grid;
              else
                x.fail("seeding mode is 'line' or 'grid', got '" + v + "'");
            }},
           {"n", [](ScenarioConfig& c, const std::string& v, const LineCtx& x) {
              c.seed_n = parse_int(v, x);
            }},
           {"y_frac", [](ScenarioConfig& c, const std::string& v, const LineCtx& x) {
              c.seed_y_frac = parse_double(v, x);
            }},
       }},
      {"output",
       {
           {"quantities", [](ScenarioConfig& c, const std::string& v, const LineCtx& x) {
              c.quantities = split_ws(v);
              if (c.quantities.empty()) x.fail("quantities list is empty");
            }},
           {"grid_n", [](ScenarioConfig& c, const std::string& v, const LineCtx& x) {
              c.grid_n = parse_int(v, x);
            }},
           {"raster", [](ScenarioConfig& c, const std::string& v, const LineCtx& x) {
              c.raster = parse_bool(v, x);
            }},
           {"curve_n", [](ScenarioConfig& c, const std::string& v, const LineCtx& x) {
              c.curve_n = parse_int(v, x);
            }},
           {"fields_z", [](ScenarioConfig& c, const std::string& v, const LineCtx& x) {
              c.fields_z = parse_double(v, x);
            }},
       }},
      {"crystal",
       {
           {"preset", [](ScenarioConfig& c, const std::string& v, const LineCtx&) {
              c.crystal_preset = v;
            }},
           {"file", [](ScenarioConfig& c, const std::string& v, const LineCtx&) {
              c.crystal_file = v;
            }},
       }},
      {"potential",
       {
           {"relativistic_ug", [](ScenarioConfig& c, const std::string& v,
                                  const LineCtx& x) { c.relativistic_ug = parse_bool(v, x); }},
       }},
  };
  return table;
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& text) {
  ScenarioConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  LineCtx ctx;
  while (std::getline(in, raw)) {
    ++ctx.line;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') ctx.fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!handlers().count(section)) ctx.fail("unknown section [" + section + "]");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) ctx.fail("expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (section.empty()) ctx.fail("key '" + key + "' before any [section]");
    const auto& sec = handlers().at(section);
    auto it = sec.find(key);
    if (it == sec.end()) ctx.fail("unknown key '" + key + "' in [" + section + "]");
    it->second(cfg, value, ctx);
  }
  validate_config(cfg);
  return cfg;
}

ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void validate_config(const ScenarioConfig& cfg) {
  auto bad = [](const std::string& msg) { throw ConfigError(msg); };
  if (!(cfg.energy_kev > 0)) bad("energy_kev must be positive");
  if (!(cfg.thickness_aa > 0)) bad("thickness_aa must be positive");
  if (!(cfg.dz_aa > 0)) bad("dz_aa must be positive");
  if (!(cfg.c_s > 0) || !(cfg.c_w > 0)) bad("selection thresholds must be positive");
  if (cfg.c_s >= cfg.c_w) bad("selection thresholds need c_s < c_w");
  if (!(cfg.g_max_aa_inv > 0)) bad("g_max_aa_inv must be positive");
  if (cfg.n_max < 0) bad("n_max must be >= 0");
  if (cfg.seed_n < 1) bad("seeding n must be >= 1");
  if (cfg.seed_y_frac < 0 || cfg.seed_y_frac >= 1) bad("y_frac must be in [0, 1)");
  if (cfg.grid_n < 2) bad("grid_n must be >= 2");
  if (cfg.curve_n < 2) bad("curve_n must be >= 2");
  if (cfg.kind == ScenarioKind::rocking) {
    if (cfg.kt_steps < 2) bad("kt_steps must be >= 2");
    if (!(cfg.kt_over_g_max > cfg.kt_over_g_min))
      bad("rocking range must have kt_over_g_min < kt_over_g_max");
  }
  if (cfg.quantities.empty()) bad("quantities list is empty");
  for (const auto& q : cfg.quantities) {
    static const char* known[] = {"intensity", "speed", "q",    "fq_x", "fq_y",
                                  "fq_z",      "fe_x",  "fe_y", "fe_z"};
    bool ok = false;
    for (const char* k : known) ok = ok || q == k;
    if (!ok) bad("unknown field quantity: " + q);
  }
  if (cfg.fields_z && !(*cfg.fields_z >= 0)) bad("fields_z must be >= 0");
  if (cfg.crystal_preset.empty() && cfg.crystal_file.empty())
    bad("crystal preset or file required");
}

std::string canonical_config_text(const ScenarioConfig& cfg) {
  std::ostringstream out;
  auto d = [](double v) { return format_double(v); };
  out << "[scenario]\n";
  out << "kind = " << to_string(cfg.kind) << "\n";
  out << "energy_kev = " << d(cfg.energy_kev) << "\n";
  out << "g_hkl = " << cfg.g_hkl[0] << " " << cfg.g_hkl[1] << " " << cfg.g_hkl[2]
      << "\n";
  out << "zone_hkl = " << cfg.zone_hkl[0] << " " << cfg.zone_hkl[1] << " "
      << cfg.zone_hkl[2] << "\n";
  out << "n_max = " << cfg.n_max << "\n";
  out << "at_bragg = " << (cfg.at_bragg ? "true" : "false") << "\n";
  out << "kt_per_aa = " << d(cfg.kt_per_aa[0]) << " " << d(cfg.kt_per_aa[1]) << "\n";
  out << "thickness_aa = " << d(cfg.thickness_aa) << "\n";
  out << "kt_over_g_min = " << d(cfg.kt_over_g_min) << "\n";
  out << "kt_over_g_max = " << d(cfg.kt_over_g_max) << "\n";
  out << "kt_steps = " << cfg.kt_steps << "\n";
  if (cfg.reference_xi_angstrom)
    out << "reference_xi_angstrom = " << d(*cfg.reference_xi_angstrom) << "\n";
  out << "\n[beams]\n";
  out << "g_max_aa_inv = " << d(cfg.g_max_aa_inv) << "\n";
  out << "c_s = " << d(cfg.c_s) << "\n";
  out << "c_w = " << d(cfg.c_w) << "\n";
  out << "\n[integration]\n";
  out << "dz_aa = " << d(cfg.dz_aa) << "\n";
  out << "rk2_variant = "
      << (cfg.rk2_variant == Rk2Variant::midpoint ? "midpoint" : "heun") << "\n";
  out << "\n[seeding]\n";
  out << "mode = " << (cfg.seed_mode == SeedMode::line ? "line" : "grid") << "\n";
  out << "n = " << cfg.seed_n << "\n";
  out << "y_frac = " << d(cfg.seed_y_frac) << "\n";
  out << "\n[output]\n";
  out << "quantities =";
  for (const auto& q : cfg.quantities) out << " " << q;
  out << "\n";
  out << "grid_n = " << cfg.grid_n << "\n";
  out << "raster = " << (cfg.raster ? "true" : "false") << "\n";
  out << "curve_n = " << cfg.curve_n << "\n";
  if (cfg.fields_z) out << "fields_z = " << d(*cfg.fields_z) << "\n";
  out << "\n[crystal]\n";
  out << "preset = " << cfg.crystal_preset << "\n";
  if (!cfg.crystal_file.empty()) out << "file = " << cfg.crystal_file << "\n";
  out << "\n[potential]\n";
  out << "relativistic_ug = " << (cfg.relativistic_ug ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace blochflow
