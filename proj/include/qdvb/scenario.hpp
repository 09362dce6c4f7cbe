#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qdvb/phonon_bath.hpp"
#include "qdvb/propagation.hpp"
#include "qdvb/qd_dynamics.hpp"
#include "qdvb/structured_light.hpp"

namespace qdvb {

// Full description of one run. The text form is INI-style sections with
// unit-suffixed keys; unknown or malformed keys are rejected with
// path-qualified messages, and parse(render(c)) == c.
struct ScenarioConfig {
  PhononBath bath;  // [bath]
  QdParams qd;      // [qd]

  // [fields]  probe Omega_L and the two controls; Omega_R enters the medium
  // as exactly zero and is generated, so it has no input block.
  double omega0L_gn = 0.005;
  double omega01_gn = 0.01;
  double omega02_gn = 0.05;
  int l_L = 0;
  int l_1 = 1;
  int l_2 = 0;
  double theta1_rad = 0.0;
  double theta2_rad = 0.0;
  double wL_w = 1.0;
  double w1_w = 1.7;
  double w2_w = 1.7;

  TransverseGrid grid;  // [grid]

  // [propagation]
  double z_final = 0.04;
  int n_steps = 400;
  std::vector<double> snapshots_z;  // defaults to {z_final} when absent
  int threads = 1;

  // [table]
  double table_delta_max_gn = 20.0;
  int table_n_points = 4001;

  // [toggles]
  bool tcl_bare_hs = false;
  bool medium_off = false;

  // [output]
  std::string output_directory;  // required, no default

  bool operator==(const ScenarioConfig&) const = default;

  void validate() const;
  PropagationConfig propagation() const;

  // Canonical text form; values round-trip exactly.
  std::string render() const;
  // Assigns one "section.key" from its text value (same rules as parse).
  void set(const std::string& path, const std::string& value);

  static ScenarioConfig parse(const std::string& text);
  static ScenarioConfig parse_file(const std::string& path);
  static ScenarioConfig preset(const std::string& name);
};

// (name, one-line description) for every figure preset.
const std::vector<std::pair<std::string, std::string>>& preset_catalog();

struct RunReport {
  std::string output_directory;
  double b_mean = 1.0;
  double eta_mag_gn_per_m = 0.0;
  double input_peak_intensity = 0.0;  // gamma_n^2
  std::vector<double> snapshots_z;
  double final_z = 0.0;

  // Final-frame analysis; intensities are relative to the input peak.
  double peak_intensity_l = 0.0;
  double peak_intensity_r = 0.0;
  std::optional<double> peak_ratio_l_over_r;
  double alpha_rad = 0.0;
  std::optional<int> winding_l;
  std::optional<int> winding_r;
  int winding_r_expected = 0;
  std::string label;
  bool identity_propagation = false;

  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 1.0;
  long long n_solves = 0;

  double time_table_s = 0.0;
  double time_propagate_s = 0.0;
  double time_analysis_s = 0.0;
  double time_total_s = 0.0;

  // Timings are the only nondeterministic entries; comparisons for
  // reproducibility should pass include_timings = false.
  std::string to_json(bool include_timings = true) const;
  std::string summary() const;
};

// Table build -> propagation -> Stokes/ellipse analysis -> emission into
// config.output_directory (config echo, report.json, grids, CSVs, images).
RunReport run_scenario(const ScenarioConfig& config);

// Rebuilds the PNG heatmap and SVG overlay of an existing run directory from
// its emitted Stokes grids.
void render_run_dir(const std::string& dir);

// <B> for one bath setting; the T = 0 row of the CLI table uses enabled=false.
double b_mean_value(const PhononBath& bath);

}  // namespace qdvb
