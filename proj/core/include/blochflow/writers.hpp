#pragma once

#include <string>
#include <vector>

#include "blochflow/hydro.hpp"
#include "blochflow/scenario.hpp"

namespace blochflow {

// every emitted column or preamble key either carries a unit suffix or is a
// whitelisted unitless name; throws NumericError on a violation
void lint_column_name(const std::string& name);

// run_id,seed_index,z_angstrom,x_angstrom,y_angstrom[,psi2_norm,speed_aainv,q_ev]
void write_trajectories_csv(const std::string& path, const std::string& run_id,
                            const std::vector<Trajectory>& trajectories,
                            const RecordFlags& record);

// '#'-prefixed key = value preamble, then one grid row per line (x fastest,
// first line is the y = 0 edge); NaN marks node holes
void write_field_text(const std::string& path, const std::string& run_id,
                      const FieldGrid& grid);

// column 0 is the abscissa (z_angstrom or kt_over_g), one i_<h>_<k>_<l>_norm
// column per beam with '-' spelled 'm'
void write_curve_csv(const std::string& path, const std::string& x_name,
                     const std::vector<double>& xs,
                     const std::vector<std::array<int, 3>>& beams,
                     const std::vector<std::vector<double>>& rows);

std::string beam_column_name(const std::array<int, 3>& hkl);

// 8-bit grayscale, finite range stretched to 0..255, holes black, +y upward
void write_field_png(const std::string& path, const FieldGrid& grid);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace blochflow
