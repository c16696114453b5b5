#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <zlib.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "blochflow/config.hpp"
#include "blochflow/errors.hpp"
#include "blochflow/run.hpp"
#include "blochflow/textutil.hpp"
#include "blochflow/writers.hpp"

using namespace blochflow;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string l;
  while (std::getline(in, l)) out.push_back(l);
  return out;
}

void expect_parse_error(const std::string& text, const std::string& needle) {
  try {
    parse_config_text(text);
    FAIL("expected a config error for: ", text);
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    INFO("message: ", msg);
    CHECK(msg.find(needle) != std::string::npos);
  }
}

fs::path fresh_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("blochflow_test_" + tag);
  fs::remove_all(p);
  return p;
}

std::uint32_t be32(const std::string& s, std::size_t at) {
  return (std::uint32_t(std::uint8_t(s[at])) << 24) |
         (std::uint32_t(std::uint8_t(s[at + 1])) << 16) |
         (std::uint32_t(std::uint8_t(s[at + 2])) << 8) |
         std::uint32_t(std::uint8_t(s[at + 3]));
}

}  // namespace

TEST_CASE("scenario kind names round-trip") {
  for (auto k : {ScenarioKind::zone_axis, ScenarioKind::two_beam,
                 ScenarioKind::two_beam_normal, ScenarioKind::systematic_row,
                 ScenarioKind::rocking})
    CHECK(scenario_kind_from(to_string(k)) == k);
  CHECK_THROWS_AS(scenario_kind_from("three_beam"), ConfigError);
}

TEST_CASE("canonical config text round-trips") {
  ScenarioConfig defaults;
  std::string echo = canonical_config_text(defaults);
  CHECK(canonical_config_text(parse_config_text(echo)) == echo);
  CHECK(canonical_config_text(parse_config_text("")) == echo);

  ScenarioConfig full;
  full.kind = ScenarioKind::rocking;
  full.energy_kev = 30.0;
  full.g_hkl = {-2, 0, 0};
  full.zone_hkl = {0, 1, 0};
  full.n_max = 5;
  full.at_bragg = false;
  full.kt_per_aa = {0.1, -0.2};
  full.thickness_aa = 123.5;
  full.kt_over_g_min = -0.25;
  full.kt_over_g_max = 0.75;
  full.kt_steps = 7;
  full.reference_xi_angstrom = 431.1;
  full.g_max_aa_inv = 2.8;
  full.c_s = 245.0;
  full.c_w = 500.0;
  full.dz_aa = 0.05;
  full.rk2_variant = Rk2Variant::heun;
  full.seed_mode = SeedMode::grid;
  full.seed_n = 9;
  full.seed_y_frac = 0.25;
  full.quantities = {"intensity", "q", "fe_x"};
  full.grid_n = 32;
  full.raster = false;
  full.curve_n = 100;
  full.fields_z = 250.0;
  full.crystal_file = "alt.crystal";
  full.relativistic_ug = false;
  std::string echo_full = canonical_config_text(full);
  ScenarioConfig back = parse_config_text(echo_full);
  CHECK(canonical_config_text(back) == echo_full);
  CHECK(back.kind == ScenarioKind::rocking);
  CHECK(back.rk2_variant == Rk2Variant::heun);
  CHECK(back.seed_mode == SeedMode::grid);
  CHECK(back.quantities == full.quantities);
  REQUIRE(back.reference_xi_angstrom.has_value());
  CHECK(*back.reference_xi_angstrom == 431.1);
  REQUIRE(back.fields_z.has_value());
  CHECK(*back.fields_z == 250.0);
  CHECK(back.crystal_file == "alt.crystal");
}

TEST_CASE("parser reports the offending line") {
  expect_parse_error("[nope]\n", "line 1");
  expect_parse_error("[nope]\n", "unknown section");
  expect_parse_error("[scenario]\nbogus = 1\n", "line 2");
  expect_parse_error("[scenario]\nbogus = 1\n", "unknown key");
  expect_parse_error("energy_kev = 5\n", "before any [section]");
  expect_parse_error("[scenario]\nenergy_kev = fast\n", "expected a number");
  expect_parse_error("[scenario]\nat_bragg = maybe\n", "boolean");
  expect_parse_error("[scenario\n", "unterminated");
  expect_parse_error("[scenario]\ng_hkl = 1 2\n", "three integers");
  expect_parse_error("[scenario]\nenergy_kev\n", "expected 'key = value'");
  expect_parse_error("[integration]\nrk2_variant = rk4\n", "midpoint");
  expect_parse_error("[seeding]\nmode = spiral\n", "line 2");

  auto dup = parse_config_text("[scenario]\nenergy_kev = 100\nenergy_kev = 200\n");
  CHECK(dup.energy_kev == 200.0);
  auto inline_comment =
      parse_config_text("[scenario]\nenergy_kev = 100 # overrides nothing\n");
  CHECK(inline_comment.energy_kev == 100.0);
}

TEST_CASE("validation rejects inconsistent settings") {
  auto broken = [](auto mutate) {
    ScenarioConfig c;
    mutate(c);
    CHECK_THROWS_AS(validate_config(c), ConfigError);
  };
  broken([](ScenarioConfig& c) { c.energy_kev = -1; });
  broken([](ScenarioConfig& c) { c.thickness_aa = 0; });
  broken([](ScenarioConfig& c) { c.dz_aa = 0; });
  broken([](ScenarioConfig& c) { c.c_s = c.c_w; });
  broken([](ScenarioConfig& c) { c.c_s = -1; });
  broken([](ScenarioConfig& c) { c.g_max_aa_inv = 0; });
  broken([](ScenarioConfig& c) { c.n_max = -1; });
  broken([](ScenarioConfig& c) { c.seed_n = 0; });
  broken([](ScenarioConfig& c) { c.seed_y_frac = 1.0; });
  broken([](ScenarioConfig& c) { c.grid_n = 1; });
  broken([](ScenarioConfig& c) { c.curve_n = 1; });
  broken([](ScenarioConfig& c) { c.quantities = {"vorticity"}; });
  broken([](ScenarioConfig& c) { c.quantities.clear(); });
  broken([](ScenarioConfig& c) { c.fields_z = -1.0; });
  broken([](ScenarioConfig& c) { c.crystal_preset.clear(); });
  broken([](ScenarioConfig& c) {
    c.kind = ScenarioKind::rocking;
    c.kt_steps = 1;
  });
  broken([](ScenarioConfig& c) {
    c.kind = ScenarioKind::rocking;
    c.kt_over_g_min = c.kt_over_g_max;
  });
  CHECK_NOTHROW(validate_config(ScenarioConfig{}));
}

TEST_CASE("column names must carry units") {
  CHECK_NOTHROW(lint_column_name("x_angstrom"));
  CHECK_NOTHROW(lint_column_name("speed_aainv"));
  CHECK_NOTHROW(lint_column_name("run_id"));
  CHECK_NOTHROW(lint_column_name("kt_over_g"));
  CHECK_NOTHROW(lint_column_name("seed_index"));
  CHECK_THROWS_AS(lint_column_name("position"), NumericError);
  CHECK_THROWS_AS(lint_column_name("energy_joules"), NumericError);
  CHECK_THROWS_AS(lint_column_name("_norm"), NumericError);  // suffix alone

  CHECK(beam_column_name({-2, 0, 0}) == "i_m2_0_0_norm");
  CHECK(beam_column_name({2, 0, 0}) == "i_2_0_0_norm");
  CHECK(beam_column_name({0, -1, 3}) == "i_0_m1_3_norm");
}

TEST_CASE("trajectory csv layout") {
  fs::path dir = fresh_dir("traj");
  fs::create_directories(dir);
  Trajectory a;
  a.points.resize(2);
  a.points[0].r = Vec3(0.5, 1.0, 0.0);
  a.points[0].psi2 = 1.0;
  a.points[1].r = Vec3(0.625, 1.0, 0.25);
  a.points[1].psi2 = 0.75;
  Trajectory b;
  b.status = TrajectoryStatus::aborted_node;
  b.points.resize(1);
  b.points[0].r = Vec3(0.1, 0.2, 0.0);  // no diagnostics recorded

  RecordFlags flags;
  flags.psi2 = true;
  fs::path file = dir / "trajectories.csv";
  write_trajectories_csv(file.string(), "deadbeefdeadbeef", {a, b}, flags);
  auto rows = lines_of(slurp(file));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "run_id,seed_index,z_angstrom,x_angstrom,y_angstrom,psi2_norm");
  CHECK(rows[1] == "deadbeefdeadbeef,0,0,0.5,1,1");
  CHECK(rows[2] == "deadbeefdeadbeef,0,0.25,0.625,1,0.75");
  CHECK(rows[3] == "deadbeefdeadbeef,1,0,0.1,0.2,nan");
  fs::remove_all(dir);
}

TEST_CASE("curve csv layout and mismatch checks") {
  fs::path dir = fresh_dir("curve");
  fs::create_directories(dir);
  fs::path file = dir / "curve.csv";
  std::vector<std::array<int, 3>> beams = {{0, 0, 0}, {-2, 0, 0}};
  write_curve_csv(file.string(), "z_angstrom", {0.0, 1.5}, beams,
                  {{1.0, 0.0}, {0.5, 0.5}});
  auto rows = lines_of(slurp(file));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "z_angstrom,i_0_0_0_norm,i_m2_0_0_norm");
  CHECK(rows[1] == "0,1,0");
  CHECK(rows[2] == "1.5,0.5,0.5");

  CHECK_THROWS_AS(write_curve_csv(file.string(), "z_angstrom", {0.0}, beams,
                                  {{1.0, 0.0}, {0.5, 0.5}}),
                  NumericError);
  CHECK_THROWS_AS(
      write_curve_csv(file.string(), "z_angstrom", {0.0}, beams, {{1.0}}),
      NumericError);
  CHECK_THROWS_AS(write_curve_csv(file.string(), "depth", {0.0}, beams,
                                  {{1.0, 0.0}}),
                  NumericError);
  fs::remove_all(dir);
}

TEST_CASE("field text layout") {
  fs::path dir = fresh_dir("fieldtxt");
  fs::create_directories(dir);
  FieldGrid grid;
  grid.n = 2;
  grid.extent = 3.615;
  grid.z = 500.0;
  grid.quantity = "q";
  grid.unit_suffix = "_ev";
  grid.values = {1.5, std::nan(""), 0.25, 2.0};
  fs::path file = dir / "field_q.txt";
  write_field_text(file.string(), "deadbeefdeadbeef", grid);
  auto rows = lines_of(slurp(file));
  REQUIRE(rows.size() == 8);
  CHECK(rows[0] == "# quantity = q");
  CHECK(rows[1] == "# unit = _ev");
  CHECK(rows[2] == "# n = 2");
  CHECK(rows[3] == "# extent_angstrom = 3.615");
  CHECK(rows[4] == "# z_angstrom = 500");
  CHECK(rows[5] == "# run_id = deadbeefdeadbeef");
  CHECK(rows[6] == "1.5 nan");  // y = 0 edge first
  CHECK(rows[7] == "0.25 2");
  fs::remove_all(dir);
}

TEST_CASE("png structure") {
  fs::path dir = fresh_dir("png");
  fs::create_directories(dir);
  FieldGrid grid;
  grid.n = 5;
  grid.extent = 3.615;
  grid.z = 10.0;
  grid.quantity = "intensity";
  grid.unit_suffix = "_norm";
  grid.values.resize(25);
  for (int i = 0; i < 25; ++i) grid.values[i] = i;
  grid.values[7] = std::nan("");  // iy = 1, ix = 2
  fs::path file = dir / "field.png";
  write_field_png(file.string(), grid);

  std::string png = slurp(file);
  REQUIRE(png.size() > 8 + 25 + 12 * 3);
  CHECK(png.compare(0, 8, "\x89PNG\r\n\x1a\n", 8) == 0);

  // IHDR: length, type, 13 bytes, crc (verified against zlib)
  CHECK(be32(png, 8) == 13);
  CHECK(png.compare(12, 4, "IHDR") == 0);
  CHECK(be32(png, 16) == 5);  // width
  CHECK(be32(png, 20) == 5);  // height
  CHECK(png[24] == 8);        // bit depth
  CHECK(png[25] == 0);        // grayscale
  auto crc = crc32(0L, reinterpret_cast<const Bytef*>(png.data() + 12), 17);
  CHECK(be32(png, 29) == std::uint32_t(crc));

  CHECK(png.compare(37, 4, "IDAT") == 0);
  std::uint32_t idat_len = be32(png, 33);
  CHECK(png.compare(png.size() - 12 + 4, 4, "IEND") == 0);

  // decode the scanlines: filter byte 0, top row is the largest y
  std::vector<unsigned char> raw(5 * 6);
  uLongf raw_len = uLongf(raw.size());
  REQUIRE(uncompress(raw.data(), &raw_len,
                     reinterpret_cast<const Bytef*>(png.data() + 41),
                     idat_len) == Z_OK);
  REQUIRE(raw_len == raw.size());
  for (int row = 0; row < 5; ++row) CHECK(raw[row * 6] == 0);
  CHECK(raw[0 * 6 + 5] == 255);              // value 24 tops the stretch
  CHECK(raw[4 * 6 + 1] == 0);                // value 0 maps to black
  CHECK(raw[3 * 6 + 1 + 2] == 0);            // the NaN hole renders black
  for (int ix = 1; ix < 5; ++ix)             // top row increases monotonically
    CHECK(raw[0 * 6 + 1 + ix] > raw[0 * 6 + ix]);
  fs::remove_all(dir);
}

TEST_CASE("runs are reproducible byte for byte") {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::two_beam;
  cfg.thickness_aa = 40.0;
  cfg.dz_aa = 0.5;
  cfg.seed_n = 4;
  cfg.curve_n = 11;
  cfg.grid_n = 8;

  fs::path dir_a = fresh_dir("run_a");
  fs::path dir_b = fresh_dir("run_b");
  auto ra = run_scenario(cfg, dir_a.string());
  auto rb = run_scenario(cfg, dir_b.string());
  CHECK(ra.run_id == rb.run_id);
  REQUIRE(ra.files == rb.files);
  REQUIRE(ra.files.size() == 5);
  CHECK(ra.files.back() == "manifest.json");

  for (const auto& f : ra.files) {
    if (f == "manifest.json") continue;  // timing differs
    CHECK_MESSAGE(slurp(dir_a / f) == slurp(dir_b / f), "file differs: ", f);
  }

  json manifest = json::parse(slurp(dir_a / "manifest.json"));
  CHECK(manifest["run_id"] == ra.run_id);
  CHECK(manifest["artifact_version"] == "1.0.0");
  CHECK(manifest["scenario"] == "two_beam");
  CHECK(manifest["error"].is_null());
  CHECK(manifest["derived"]["n_strong"] == 2);
  CHECK(manifest["derived"]["trajectories_completed"] == 4);
  CHECK(manifest["derived"]["xi"]["relativistic"]["splitting_angstrom"]
            .get<double>() == doctest::Approx(410.2096660).epsilon(1e-8));
  CHECK(manifest["derived"]["xi"]["nonrelativistic"]["splitting_angstrom"]
            .get<double>() == doctest::Approx(570.7617).epsilon(1e-6));
  CHECK(manifest["outputs"].size() == 4);
  CHECK(manifest.contains("timing_ms"));
  std::string echo = manifest["config_echo"].get<std::string>();
  CHECK(canonical_config_text(parse_config_text(echo)) == echo);

  // any config change moves the run id
  ScenarioConfig other = cfg;
  other.energy_kev = 199.0;
  fs::path dir_c = fresh_dir("run_c");
  auto rc = run_scenario(other, dir_c.string());
  CHECK(rc.run_id != ra.run_id);

  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  fs::remove_all(dir_c);
}

TEST_CASE("failed runs leave a manifest with the failing stage") {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::rocking;
  fs::path dir = fresh_dir("run_err");
  CHECK_THROWS_AS(run_scenario(cfg, dir.string(), true), ConfigError);
  json manifest = json::parse(slurp(dir / "manifest.json"));
  REQUIRE(!manifest["error"].is_null());
  CHECK(manifest["error"]["stage"] == "setup");
  std::string msg = manifest["error"]["message"].get<std::string>();
  CHECK(msg.find("rocking") != std::string::npos);
  CHECK(manifest["outputs"].empty());
  fs::remove_all(dir);

  ScenarioConfig bad;
  bad.crystal_preset = "Nb-bcc";
  CHECK_THROWS_AS(run_scenario(bad, fresh_dir("run_bad").string()), ConfigError);
}

TEST_CASE("hash helpers are stable") {
  CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
  CHECK(hex64(fnv1a64("blochflow")) != hex64(fnv1a64("blochflow ")));
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(410.2096660297456) == "410.2096660297456");
  CHECK(format_double(1.0) == "1");
}
