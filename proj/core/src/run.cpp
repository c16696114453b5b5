#include "blochflow/run.hpp"

#include <chrono>
#include <filesystem>
#include <limits>
#include <nlohmann/json.hpp>

#include "blochflow/constants.hpp"
#include "blochflow/errors.hpp"
#include "blochflow/textutil.hpp"
#include "blochflow/writers.hpp"

namespace blochflow {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

Crystal resolve_crystal(const ScenarioConfig& cfg) {
  if (!cfg.crystal_file.empty()) return load_crystal_file(cfg.crystal_file);
  auto preset = crystal_preset(cfg.crystal_preset);
  if (!preset) throw ConfigError("unknown crystal preset: " + cfg.crystal_preset);
  return *preset;
}

double stage_ms(std::chrono::steady_clock::time_point& mark) {
  auto now = std::chrono::steady_clock::now();
  double ms = std::chrono::duration<double, std::milli>(now - mark).count();
  mark = now;
  return ms;
}

// extinction distances under both potential-scaling conventions, so the
// manifest documents the discrepancy of each against a reference value
json xi_report(const Crystal& crystal, const ScenarioConfig& cfg) {
  json out;
  for (bool rel : {true, false}) {
    auto tb = two_beam_setup(crystal, cfg.g_hkl, cfg.energy_kev, true, rel);
    double splitting = tb.sol.gammas(0) - tb.sol.gammas(1);
    double xi_split = splitting > 0 ? 1.0 / splitting
                                    : std::numeric_limits<double>::infinity();
    auto ig = tb.set.find(cfg.g_hkl);
    const Beam& bg = tb.set.beams[*ig];
    double xi_formula = extinction_distance(bg.U_g, tb.set.incident_k, bg.g_lab,
                                            Vec3(0, 0, 1));
    json entry;
    entry["splitting_angstrom"] = xi_split;
    entry["formula_angstrom"] = xi_formula;
    if (cfg.reference_xi_angstrom) {
      entry["reference_angstrom"] = *cfg.reference_xi_angstrom;
      entry["deviation_percent"] = 100.0 * (xi_split - *cfg.reference_xi_angstrom) /
                                   *cfg.reference_xi_angstrom;
    }
    out[rel ? "relativistic" : "nonrelativistic"] = std::move(entry);
  }
  return out;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg, const std::string& out_dir,
                       bool fields_only) {
  validate_config(cfg);
  Crystal crystal = resolve_crystal(cfg);
  const std::string canonical = canonical_config_text(cfg);
  const std::string crystal_text = crystal_canonical_text(crystal);
  const std::string run_id = hex64(fnv1a64(canonical + "\n" + crystal_text));

  fs::create_directories(out_dir);
  auto path_of = [&](const std::string& name) {
    return (fs::path(out_dir) / name).string();
  };

  RunResult result;
  result.run_id = run_id;
  result.out_dir = out_dir;

  json manifest;
  manifest["run_id"] = run_id;
  manifest["artifact_version"] = artifact_version;
  manifest["scenario"] = to_string(cfg.kind);
  manifest["config_echo"] = canonical;
  manifest["crystal_hash"] = hex64(fnv1a64(crystal_text));
  manifest["error"] = nullptr;
  json timing;
  json outputs = json::array();

  std::string stage = "setup";
  auto mark = std::chrono::steady_clock::now();
  try {
    Kinematics kin = electron_kinematics(cfg.energy_kev, cfg.relativistic_ug);
    json derived;
    derived["lambda_angstrom"] = kin.lambda;
    derived["k0_aainv"] = kin.k0;
    derived["gamma_rel"] = kin.gamma_rel;

    if (cfg.kind == ScenarioKind::rocking) {
      if (fields_only)
        throw ConfigError("rocking scans have no field maps");
      stage = "curve";
      auto table = rocking_curve(crystal, cfg.g_hkl, cfg.n_max, cfg.energy_kev,
                                 cfg.thickness_aa, cfg.kt_over_g_min,
                                 cfg.kt_over_g_max, cfg.kt_steps,
                                 cfg.relativistic_ug);
      write_curve_csv(path_of("curve_rocking.csv"), "kt_over_g", table.kt_over_g,
                      table.beams, table.rows);
      outputs.push_back({{"file", "curve_rocking.csv"}, {"kind", "curve"}});
      result.files.push_back("curve_rocking.csv");
      derived["n_active_beams"] = table.beams.size();
      derived["xi"] = xi_report(crystal, cfg);
      timing["curve_ms"] = stage_ms(mark);
      manifest["derived"] = std::move(derived);
    } else {
      ScenarioSetup setup = [&] {
        switch (cfg.kind) {
          case ScenarioKind::zone_axis:
            return zone_axis_setup(crystal, cfg.zone_hkl, cfg.energy_kev, cfg.c_s,
                                   cfg.c_w, cfg.g_max_aa_inv, cfg.relativistic_ug);
          case ScenarioKind::two_beam:
            return two_beam_setup(crystal, cfg.g_hkl, cfg.energy_kev, cfg.at_bragg,
                                  cfg.relativistic_ug);
          case ScenarioKind::two_beam_normal:
            return two_beam_setup(crystal, cfg.g_hkl, cfg.energy_kev, false,
                                  cfg.relativistic_ug);
          default:
            return systematic_row_setup(crystal, cfg.g_hkl, cfg.n_max,
                                        cfg.energy_kev, cfg.kt_per_aa,
                                        cfg.relativistic_ug);
        }
      }();
      std::size_t n_elim = 0;
      for (const auto& b : setup.set.beams)
        if (b.tag == BeamTag::eliminated) ++n_elim;
      derived["n_strong"] = setup.set.n_strong();
      derived["n_weak"] = setup.set.n_weak();
      derived["n_eliminated"] = n_elim;
      if (cfg.kind != ScenarioKind::zone_axis)
        derived["xi"] = xi_report(crystal, cfg);
      manifest["derived"] = std::move(derived);
      timing["setup_ms"] = stage_ms(mark);

      if (!fields_only) {
        stage = "trajectories";
        RecordFlags record;
        record.psi2 = true;
        record.speed = true;
        for (const auto& q : cfg.quantities) record.q = record.q || q == "q";
        auto seeds = cfg.seed_mode == SeedMode::line
                         ? seed_line(crystal.cell, cfg.seed_n, cfg.seed_y_frac)
                         : seed_grid(crystal.cell, cfg.seed_n);
        std::vector<Trajectory> trajectories;
        for (const auto& s : seeds)
          trajectories.push_back(propagate_trajectory(setup.sol, s,
                                                      cfg.thickness_aa, cfg.dz_aa,
                                                      record, cfg.rk2_variant));
        write_trajectories_csv(path_of("trajectories.csv"), run_id, trajectories,
                               record);
        outputs.push_back({{"file", "trajectories.csv"}, {"kind", "trajectories"}});
        result.files.push_back("trajectories.csv");
        std::size_t completed = 0;
        for (const auto& t : trajectories)
          if (t.status == TrajectoryStatus::completed) ++completed;
        manifest["derived"]["trajectories_completed"] = completed;
        manifest["derived"]["trajectories_total"] = trajectories.size();
        timing["trajectories_ms"] = stage_ms(mark);

        if (cfg.kind != ScenarioKind::zone_axis) {
          stage = "curve";
          std::vector<double> zs;
          std::vector<std::array<int, 3>> beams;
          for (const auto& b : setup.sol.beams) beams.push_back(b.hkl);
          std::vector<std::vector<double>> rows;
          for (int i = 0; i < cfg.curve_n; ++i) {
            double z = cfg.thickness_aa * i / double(cfg.curve_n - 1);
            zs.push_back(z);
            std::vector<double> row;
            for (const auto& [hkl, I] : beam_intensities(setup.sol, z)) {
              (void)hkl;
              row.push_back(I);
            }
            rows.push_back(std::move(row));
          }
          write_curve_csv(path_of("curve_intensity.csv"), "z_angstrom", zs, beams,
                          rows);
          outputs.push_back({{"file", "curve_intensity.csv"}, {"kind", "curve"}});
          result.files.push_back("curve_intensity.csv");
          timing["curve_ms"] = stage_ms(mark);
        }
      }

      stage = "fields";
      double fz = cfg.fields_z.value_or(cfg.thickness_aa);
      for (const auto& q : cfg.quantities) {
        auto grid = field_map(setup.sol, crystal, q, fz, cfg.grid_n);
        std::string base = "field_" + q;
        write_field_text(path_of(base + ".txt"), run_id, grid);
        outputs.push_back({{"file", base + ".txt"}, {"kind", "field_text"}});
        result.files.push_back(base + ".txt");
        if (cfg.raster) {
          write_field_png(path_of(base + ".png"), grid);
          outputs.push_back({{"file", base + ".png"}, {"kind", "field_png"}});
          result.files.push_back(base + ".png");
        }
      }
      timing["fields_ms"] = stage_ms(mark);
    }

    stage = "write";
    manifest["timing_ms"] = std::move(timing);
    manifest["outputs"] = std::move(outputs);
    write_text_file(path_of("manifest.json"), manifest.dump(2) + "\n");
    result.files.push_back("manifest.json");
    return result;
  } catch (const std::exception& e) {
    manifest["error"] = {{"stage", stage}, {"message", e.what()}};
    manifest["timing_ms"] = std::move(timing);
    manifest["outputs"] = std::move(outputs);
    try {
      write_text_file(path_of("manifest.json"), manifest.dump(2) + "\n");
    } catch (...) {
      // the original failure matters more
    }
    throw;
  }
}

}  // namespace blochflow
