#include <CLI11.hpp>
#include <iostream>

#include "blochflow/errors.hpp"
#include "blochflow/run.hpp"

namespace bf = blochflow;

namespace {

struct CliValues {
  std::string config_path;
  std::string out_dir = "out";
  double energy = 0, thickness = 0, dz = 0, fields_z = 0;
  double kt_min = 0, kt_max = 0;
  int kt_steps = 0, n_max = 0, grid_n = 0, seed_n = 0;
  std::vector<int> g;
  std::vector<int> zone;
  std::vector<std::string> quantities;
  bool no_raster = false, off_bragg = false;
};

void add_common(CLI::App* sub, CliValues& v) {
  sub->add_option("--config", v.config_path, "config file; explicit flags win");
  sub->add_option("--out-dir", v.out_dir, "output directory (default: out)");
  sub->add_option("--energy", v.energy, "beam energy, keV");
  sub->add_option("--thickness", v.thickness, "exit depth, Angstrom");
  sub->add_option("--dz", v.dz, "trajectory step, Angstrom");
  sub->add_option("--seed-n", v.seed_n, "seed count (line) or grid edge");
  sub->add_flag("--no-raster", v.no_raster, "skip PNG rasters");
}

void add_g(CLI::App* sub, CliValues& v) {
  sub->add_option("--g", v.g, "reflection h k l")->expected(3);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"electron Bloch-wave channeling with Bohmian trajectory analysis"};
  app.require_subcommand(1);
  CliValues v;

  auto* zone = app.add_subcommand("zone-axis", "multi-beam zone-axis channeling");
  add_common(zone, v);
  zone->add_option("--zone", v.zone, "zone axis h k l")->expected(3);
  double c_s = 0, c_w = 0, g_max = 0;
  zone->add_option("--c-s", c_s, "strong-beam selection threshold");
  zone->add_option("--c-w", c_w, "weak-beam selection threshold");
  zone->add_option("--g-max", g_max, "reflection cutoff, 1/Angstrom");

  auto* two = app.add_subcommand("two-beam", "tilted two-beam pendelloesung");
  add_common(two, v);
  add_g(two, v);
  two->add_flag("--off-bragg", v.off_bragg, "normal incidence instead of the Bragg tilt");

  auto* row = app.add_subcommand("systematic-row", "row of reflections n*g");
  add_common(row, v);
  add_g(row, v);
  row->add_option("--n-max", v.n_max, "row extent");

  auto* rock = app.add_subcommand("rocking", "tilt scan of exit intensities");
  add_common(rock, v);
  add_g(rock, v);
  rock->add_option("--n-max", v.n_max, "row extent");
  rock->add_option("--kt-min", v.kt_min, "tilt range start, k_t/|g|");
  rock->add_option("--kt-max", v.kt_max, "tilt range end, k_t/|g|");
  rock->add_option("--kt-steps", v.kt_steps, "tilt samples");

  auto* fields = app.add_subcommand("fields", "field maps only, scenario from config");
  add_common(fields, v);
  fields->add_option("--quantities", v.quantities,
                     "intensity speed q fq_x fq_y fq_z fe_x fe_y fe_z");
  fields->add_option("--z", v.fields_z, "map depth, Angstrom");
  fields->add_option("--grid-n", v.grid_n, "grid edge length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    bf::ScenarioConfig cfg;
    if (!v.config_path.empty()) cfg = bf::parse_config_file(v.config_path);

    CLI::App* sub = app.get_subcommands().front();
    bool fields_only = sub == fields;
    if (sub == zone) cfg.kind = bf::ScenarioKind::zone_axis;
    if (sub == two) cfg.kind = bf::ScenarioKind::two_beam;
    if (sub == row) cfg.kind = bf::ScenarioKind::systematic_row;
    if (sub == rock) cfg.kind = bf::ScenarioKind::rocking;

    auto given = [&](const char* name) {
      auto* opt = sub->get_option_no_throw(name);
      return opt && opt->count() > 0;
    };
    if (given("--energy")) cfg.energy_kev = v.energy;
    if (given("--thickness")) cfg.thickness_aa = v.thickness;
    if (given("--dz")) cfg.dz_aa = v.dz;
    if (given("--seed-n")) cfg.seed_n = v.seed_n;
    if (given("--no-raster")) cfg.raster = false;
    if (sub == zone) {
      if (given("--zone")) cfg.zone_hkl = {v.zone[0], v.zone[1], v.zone[2]};
      if (given("--c-s")) cfg.c_s = c_s;
      if (given("--c-w")) cfg.c_w = c_w;
      if (given("--g-max")) cfg.g_max_aa_inv = g_max;
    }
    if (given("--g")) cfg.g_hkl = {v.g[0], v.g[1], v.g[2]};
    if (given("--off-bragg")) cfg.at_bragg = false;
    if (given("--n-max")) cfg.n_max = v.n_max;
    if (given("--kt-min")) cfg.kt_over_g_min = v.kt_min;
    if (given("--kt-max")) cfg.kt_over_g_max = v.kt_max;
    if (given("--kt-steps")) cfg.kt_steps = v.kt_steps;
    if (given("--quantities")) cfg.quantities = v.quantities;
    if (given("--z")) cfg.fields_z = v.fields_z;
    if (given("--grid-n")) cfg.grid_n = v.grid_n;

    auto result = bf::run_scenario(cfg, v.out_dir, fields_only);
    std::cout << "run_id " << result.run_id << "\n";
    for (const auto& f : result.files)
      std::cout << "  " << result.out_dir << "/" << f << "\n";
    return 0;
  } catch (const bf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const bf::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
