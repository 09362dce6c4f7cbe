#include "qdvb/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "qdvb/errors.hpp"
#include "qdvb/io.hpp"
#include "qdvb/render.hpp"

namespace qdvb {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// All-dark frames render as an empty overlay instead of failing the run.
EllipseField ellipse_or_empty(const StokesField& s) {
  double smax = *std::max_element(s.s0.v.begin(), s.s0.v.end());
  if (smax > 0.0) return ellipse_field(s);
  return EllipseField{RealGrid(s.s0.grid), RealGrid(s.s0.grid),
                      std::vector<std::uint8_t>(s.s0.v.size(), 0)};
}

// Rethrows with the pipeline stage prefixed, preserving the error class.
template <class F>
decltype(auto) stage(const char* name, F&& f) {
  try {
    return std::forward<F>(f)();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(name) + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(name) + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(std::string(name) + ": " + e.what());
  }
}

// ---- value <-> text ----

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, p};
}

double parse_double(const std::string& path, const std::string& text) {
  const char* b = text.data();
  const char* e = b + text.size();
  if (b != e && *b == '+') ++b;
  double v{};
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e)
    throw ValidationError(path + ": not a number: '" + text + "'");
  return v;
}

int parse_int(const std::string& path, const std::string& text) {
  const char* b = text.data();
  const char* e = b + text.size();
  if (b != e && *b == '+') ++b;
  int v{};
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e)
    throw ValidationError(path + ": not an integer: '" + text + "'");
  return v;
}

bool parse_bool(const std::string& path, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ValidationError(path + ": expected true or false, got '" + text + "'");
}

std::vector<double> parse_double_list(const std::string& path, const std::string& text) {
  std::vector<double> out;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t comma = text.find(',', pos);
    std::string item = trim(text.substr(pos, comma == std::string::npos
                                                 ? std::string::npos
                                                 : comma - pos));
    if (item.empty()) throw ValidationError(path + ": empty list element");
    out.push_back(parse_double(path, item));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw ValidationError(path + ": empty list");
  return out;
}

std::string fmt_double_list(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt_double(v[i]);
  }
  return out;
}

// ---- key registry ----

struct Entry {
  std::function<void(ScenarioConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

using Registry = std::vector<std::pair<std::string, Entry>>;

const Registry& registry() {
  static const Registry reg = [] {
    Registry r;
    auto d = [&r](const char* path, auto ref) {
      r.emplace_back(path, Entry{[ref](ScenarioConfig& c, const std::string& p,
                                       const std::string& v) { ref(c) = parse_double(p, v); },
                                 [ref](const ScenarioConfig& c) {
                                   return fmt_double(ref(const_cast<ScenarioConfig&>(c)));
                                 }});
    };
    auto i = [&r](const char* path, auto ref) {
      r.emplace_back(path, Entry{[ref](ScenarioConfig& c, const std::string& p,
                                       const std::string& v) { ref(c) = parse_int(p, v); },
                                 [ref](const ScenarioConfig& c) {
                                   return std::to_string(ref(const_cast<ScenarioConfig&>(c)));
                                 }});
    };
    auto b = [&r](const char* path, auto ref) {
      r.emplace_back(path, Entry{[ref](ScenarioConfig& c, const std::string& p,
                                       const std::string& v) { ref(c) = parse_bool(p, v); },
                                 [ref](const ScenarioConfig& c) {
                                   return std::string(
                                       ref(const_cast<ScenarioConfig&>(c)) ? "true" : "false");
                                 }});
    };

    d("bath.alpha_p_invgn2", [](ScenarioConfig& c) -> double& { return c.bath.alpha_p; });
    d("bath.omega_b_gn", [](ScenarioConfig& c) -> double& { return c.bath.omega_b; });
    d("bath.temperature_K", [](ScenarioConfig& c) -> double& { return c.bath.temperature_K; });
    b("bath.enabled", [](ScenarioConfig& c) -> bool& { return c.bath.enabled; });

    d("qd.gamma1_gn", [](ScenarioConfig& c) -> double& { return c.qd.gamma1; });
    d("qd.gamma2_gn", [](ScenarioConfig& c) -> double& { return c.qd.gamma2; });
    d("qd.gamma_d_gn", [](ScenarioConfig& c) -> double& { return c.qd.gamma_d; });
    d("qd.delta_p_gn", [](ScenarioConfig& c) -> double& { return c.qd.delta_p; });
    d("qd.delta_c_gn", [](ScenarioConfig& c) -> double& { return c.qd.delta_c; });
    d("qd.n_density_per_m3", [](ScenarioConfig& c) -> double& { return c.qd.n_density_per_m3; });
    d("qd.lambda_m", [](ScenarioConfig& c) -> double& { return c.qd.lambda_m; });

    d("fields.omega0L_gn", [](ScenarioConfig& c) -> double& { return c.omega0L_gn; });
    d("fields.omega01_gn", [](ScenarioConfig& c) -> double& { return c.omega01_gn; });
    d("fields.omega02_gn", [](ScenarioConfig& c) -> double& { return c.omega02_gn; });
    i("fields.l_L", [](ScenarioConfig& c) -> int& { return c.l_L; });
    i("fields.l_1", [](ScenarioConfig& c) -> int& { return c.l_1; });
    i("fields.l_2", [](ScenarioConfig& c) -> int& { return c.l_2; });
    d("fields.theta1_rad", [](ScenarioConfig& c) -> double& { return c.theta1_rad; });
    d("fields.theta2_rad", [](ScenarioConfig& c) -> double& { return c.theta2_rad; });
    d("fields.wL_w", [](ScenarioConfig& c) -> double& { return c.wL_w; });
    d("fields.w1_w", [](ScenarioConfig& c) -> double& { return c.w1_w; });
    d("fields.w2_w", [](ScenarioConfig& c) -> double& { return c.w2_w; });

    i("grid.nx", [](ScenarioConfig& c) -> int& { return c.grid.nx; });
    i("grid.ny", [](ScenarioConfig& c) -> int& { return c.grid.ny; });
    d("grid.extent_w", [](ScenarioConfig& c) -> double& { return c.grid.extent; });

    d("propagation.z_final", [](ScenarioConfig& c) -> double& { return c.z_final; });
    i("propagation.n_steps", [](ScenarioConfig& c) -> int& { return c.n_steps; });
    r.emplace_back("propagation.snapshots_z",
                   Entry{[](ScenarioConfig& c, const std::string& p, const std::string& v) {
                           c.snapshots_z = parse_double_list(p, v);
                         },
                         [](const ScenarioConfig& c) { return fmt_double_list(c.snapshots_z); }});
    i("propagation.threads", [](ScenarioConfig& c) -> int& { return c.threads; });

    d("table.delta_max_gn", [](ScenarioConfig& c) -> double& { return c.table_delta_max_gn; });
    i("table.n_points", [](ScenarioConfig& c) -> int& { return c.table_n_points; });

    b("toggles.tcl_bare_hs", [](ScenarioConfig& c) -> bool& { return c.tcl_bare_hs; });
    b("toggles.medium_off", [](ScenarioConfig& c) -> bool& { return c.medium_off; });

    r.emplace_back("output.directory",
                   Entry{[](ScenarioConfig& c, const std::string&, const std::string& v) {
                           c.output_directory = v;
                         },
                         [](const ScenarioConfig& c) { return c.output_directory; }});
    return r;
  }();
  return reg;
}

const Entry* find_entry(const std::string& path) {
  for (const auto& [p, e] : registry())
    if (p == path) return &e;
  return nullptr;
}

// ---- analysis helpers ----

std::optional<int> measured_winding(const ComplexGrid& e) {
  const auto& g = e.grid;
  double best = 0.0;
  int bix = 0, biy = 0;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      double a = std::norm(e.at(iy, ix));
      if (a > best) {
        best = a;
        bix = ix;
        biy = iy;
      }
    }
  if (best <= 0.0) return std::nullopt;
  // Ring through the brightest pixel, nudged off the axis and into the frame.
  double radius =
      std::clamp(std::hypot(g.x(bix), g.y(biy)), 0.3, 0.9 * g.extent);
  try {
    return phase_winding(e, radius);
  } catch (const NumericalError&) {
    return std::nullopt;
  }
}

std::string z_tag(double z) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", z);
  return buf;
}

nlohmann::ordered_json artifact_map(const std::vector<double>& snapshots_z) {
  nlohmann::ordered_json snaps = nlohmann::ordered_json::array();
  for (double z : snapshots_z) {
    std::string t = z_tag(z);
    snaps.push_back({{"z_tilde", z},
                     {"omega_L", "fields_z" + t + "_omega_L"},
                     {"omega_R", "fields_z" + t + "_omega_R"},
                     {"line_cut_x", "linecut_x_z" + t + ".csv"}});
  }
  nlohmann::ordered_json j{
      {"config", "config.ini"},
      {"half_fourier", "half_fourier"},
      {"input_omega_L", "input_omega_L"},
      {"control_omega_1", "control_omega_1"},
      {"control_omega_2", "control_omega_2"},
      {"snapshots", snaps},
      {"stokes", {{"s0", "stokes_S0"}, {"s1", "stokes_S1"}, {"s2", "stokes_S2"}, {"s3", "stokes_S3"}}},
      {"ellipse", {{"chi", "ellipse_chi"}, {"psi", "ellipse_psi"}}},
      {"images", {{"s0_png", "s0.png"}, {"ellipses_svg", "ellipses.svg"}}},
  };
  return j;
}

}  // namespace

// ---- ScenarioConfig ----

void ScenarioConfig::validate() const {
  bath.validate();
  qd.validate();
  if (output_directory.empty())
    throw ValidationError("output.directory: missing required key");
  if (table_n_points < 4)
    throw ValidationError("table.n_points: need at least 4 points");
  if (!(table_delta_max_gn > 0.0))
    throw ValidationError("table.delta_max_gn: must be positive");
  propagation().validate();
}

PropagationConfig ScenarioConfig::propagation() const {
  PropagationConfig p;
  p.grid = grid;
  p.probe = {omega0L_gn, l_L, wL_w, 0.0};
  p.control1 = {omega01_gn, l_1, w1_w, theta1_rad};
  p.control2 = {omega02_gn, l_2, w2_w, theta2_rad};
  p.z_final = z_final;
  p.n_steps = n_steps;
  p.snapshots = snapshots_z.empty() ? std::vector<double>{z_final} : snapshots_z;
  p.params = qd;
  p.bath = bath;
  p.tcl_bare_hs = tcl_bare_hs;
  p.medium_off = medium_off;
  p.threads = threads;
  return p;
}

std::string ScenarioConfig::render() const {
  std::string out;
  std::string section;
  for (const auto& [path, entry] : registry()) {
    std::string sec = path.substr(0, path.find('.'));
    std::string key = path.substr(path.find('.') + 1);
    if (sec != section) {
      if (!out.empty()) out += "\n";
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += key + " = " + entry.get(*this) + "\n";
  }
  return out;
}

void ScenarioConfig::set(const std::string& path, const std::string& value) {
  const Entry* e = find_entry(path);
  if (!e) throw ValidationError(path + ": unknown key");
  e->set(*this, path, trim(value));
}

ScenarioConfig ScenarioConfig::parse(const std::string& text) {
  ScenarioConfig c;
  c.snapshots_z.clear();
  std::vector<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ValidationError("line " + std::to_string(lineno) +
                              ": malformed section header: " + line);
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ValidationError("line " + std::to_string(lineno) + ": empty section name");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("line " + std::to_string(lineno) +
                            ": expected key = value, got: " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ValidationError("line " + std::to_string(lineno) + ": key '" + key +
                            "' outside any section");
    std::string path = section + "." + key;
    const Entry* e = find_entry(path);
    if (!e) throw ValidationError(path + ": unknown key");
    if (std::find(seen.begin(), seen.end(), path) != seen.end())
      throw ValidationError(path + ": duplicate key");
    seen.push_back(path);
    e->set(c, path, value);
  }
  if (std::find(seen.begin(), seen.end(), "output.directory") == seen.end())
    throw ValidationError("output.directory: missing required key");
  if (c.snapshots_z.empty()) c.snapshots_z = {c.z_final};
  c.validate();
  return c;
}

ScenarioConfig ScenarioConfig::parse_file(const std::string& path) {
  return parse(io::read_text_file(path));
}

namespace {

ScenarioConfig fig2_base() {
  ScenarioConfig c;  // struct defaults carry the common parameter block
  c.snapshots_z = {0.030, 0.034, 0.040};
  return c;
}

ScenarioConfig lemon_base() {
  ScenarioConfig c = fig2_base();
  c.z_final = 0.034;
  c.n_steps = 340;
  c.snapshots_z = {0.034};
  return c;
}

ScenarioConfig cvb_base(double theta1) {
  ScenarioConfig c = fig2_base();
  c.l_L = -1;
  c.l_1 = 2;
  c.theta1_rad = theta1;
  c.wL_w = 0.8;
  c.w1_w = 1.0;
  c.w2_w = 1.0;
  c.snapshots_z = {0.040};
  return c;
}

struct Preset {
  std::string name;
  std::string description;
  std::function<ScenarioConfig()> make;
};

const std::vector<Preset>& presets() {
  constexpr double pi = std::numbers::pi;
  static const std::vector<Preset> list = {
      {"fig2", "generated-field buildup, line cuts at z~ = 0.030/0.034/0.040, T = 5 K",
       fig2_base},
      {"fig3a", "lemon vector beam, l = (0, 1, 0), z~ = 0.034", lemon_base},
      {"fig3b", "star vector beam, l = (0, -1, 0), z~ = 0.034",
       [] {
         ScenarioConfig c = lemon_base();
         c.l_1 = -1;
         return c;
       }},
      {"fig3c", "web vector beam, l = (0, -3, 0), z~ = 0.040",
       [] {
         ScenarioConfig c = fig2_base();
         c.l_1 = -3;
         c.snapshots_z = {0.040};
         return c;
       }},
      {"fig3d", "radial cylindrical vector beam, l = (-1, 2, 0), theta1 = 0",
       [] { return cvb_base(0.0); }},
      {"fig3e", "azimuthal cylindrical vector beam, l = (-1, 2, 0), theta1 = pi",
       [] { return cvb_base(pi); }},
      {"fig3f", "spiral cylindrical vector beam, l = (-1, 2, 0), theta1 = pi/2",
       [] { return cvb_base(pi / 2); }},
      {"fig4_0", "lemon pattern, theta1 = 0", [] { return lemon_base(); }},
      {"fig4_90", "lemon pattern rotated, theta1 = pi/2",
       [] {
         ScenarioConfig c = lemon_base();
         c.theta1_rad = pi / 2;
         return c;
       }},
      {"fig4_180", "lemon pattern rotated, theta1 = pi",
       [] {
         ScenarioConfig c = lemon_base();
         c.theta1_rad = pi;
         return c;
       }},
      {"fig4_270", "lemon pattern rotated, theta1 = 3 pi/2",
       [] {
         ScenarioConfig c = lemon_base();
         c.theta1_rad = 3 * pi / 2;
         return c;
       }},
      {"fig5_0", "fig2 parameters with the phonon bath off",
       [] {
         ScenarioConfig c = fig2_base();
         c.bath.enabled = false;
         c.bath.temperature_K = 0.0;
         return c;
       }},
      {"fig5_5", "fig2 parameters at T = 5 K", fig2_base},
      {"fig5_10", "fig2 parameters at T = 10 K",
       [] {
         ScenarioConfig c = fig2_base();
         c.bath.temperature_K = 10.0;
         return c;
       }},
      {"fig5_20", "fig2 parameters at T = 20 K",
       [] {
         ScenarioConfig c = fig2_base();
         c.bath.temperature_K = 20.0;
         return c;
       }},
  };
  return list;
}

}  // namespace

ScenarioConfig ScenarioConfig::preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) {
      ScenarioConfig c = p.make();
      c.output_directory = "runs/" + name;
      return c;
    }
  throw ValidationError("unknown preset: " + name);
}

const std::vector<std::pair<std::string, std::string>>& preset_catalog() {
  static const std::vector<std::pair<std::string, std::string>> cat = [] {
    std::vector<std::pair<std::string, std::string>> v;
    for (const auto& p : presets()) v.emplace_back(p.name, p.description);
    return v;
  }();
  return cat;
}

// ---- RunReport ----

std::string RunReport::to_json(bool include_timings) const {
  auto opt_d = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  auto opt_i = [](const std::optional<int>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json j{
      {"format", "qdvb-report-v1"},
      {"output_directory", output_directory},
      {"b_mean", b_mean},
      {"eta_mag_gn_per_m", eta_mag_gn_per_m},
      {"input_peak_intensity_gn2", input_peak_intensity},
      {"snapshots_z", snapshots_z},
      {"results",
       {{"final_z", final_z},
        {"peak_intensity_L_over_I0", peak_intensity_l},
        {"peak_intensity_R_over_I0", peak_intensity_r},
        {"peak_ratio_L_over_R", opt_d(peak_ratio_l_over_r)},
        {"alpha_rad", alpha_rad},
        {"winding_omega_L", opt_i(winding_l)},
        {"winding_omega_R", opt_i(winding_r)},
        {"winding_omega_R_expected", winding_r_expected},
        {"label", label},
        {"identity_propagation", identity_propagation}}},
      {"invariants",
       {{"max_trace_error", max_trace_error},
        {"max_hermiticity_error", max_hermiticity_error},
        {"min_eigenvalue", min_eigenvalue},
        {"n_steady_state_solves", n_solves}}},
      // Informational mirror of the pinned implementation constants.
      {"tolerances",
       {{"quadrature_rel_tol", 1e-9},
        {"lu_conditioning_floor", 1e-14},
        {"null_space_singular_value_floor", 1e-10},
        {"density_matrix_psd_floor", -1e-6},
        {"snapshot_alignment_steps", 1e-9},
        {"dark_floor_rel", 1e-12},
        {"winding_ring_samples", 720}}},
      {"artifacts", artifact_map(snapshots_z)},
  };
  if (include_timings)
    j["timings_s"] = {{"table", time_table_s},
                      {"propagate", time_propagate_s},
                      {"analysis", time_analysis_s},
                      {"total", time_total_s}};
  return j.dump(2) + "\n";
}

std::string RunReport::summary() const {
  std::ostringstream out;
  out.precision(6);
  out << "output: " << output_directory << "\n";
  out << "<B> = " << b_mean << ", |eta| = " << eta_mag_gn_per_m << " gamma_n/m\n";
  out << "snapshots z~ =";
  for (double z : snapshots_z) out << " " << z;
  out << "\n";
  out << "final z~ = " << final_z << ": peak |Omega_L|^2/I0 = " << peak_intensity_l
      << ", peak |Omega_R|^2/I0 = " << peak_intensity_r;
  if (peak_ratio_l_over_r)
    out << ", ratio L/R = " << *peak_ratio_l_over_r;
  out << "\n";
  out << "alpha = " << alpha_rad << " rad, winding(Omega_R) = ";
  if (winding_r)
    out << *winding_r;
  else
    out << "undefined";
  out << " (expected " << winding_r_expected << "), label = " << label << "\n";
  if (identity_propagation) out << "identity propagation (medium off)\n";
  out.precision(3);
  out << "invariants: trace " << max_trace_error << ", herm " << max_hermiticity_error
      << ", min eig " << min_eigenvalue << ", solves " << n_solves << "\n";
  out << "total " << time_total_s << " s\n";
  return out.str();
}

// ---- run / render ----

RunReport run_scenario(const ScenarioConfig& config) {
  auto t0 = Clock::now();
  stage("config", [&] { config.validate(); });

  const std::string dir = config.output_directory;
  stage("output directory", [&] {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(dir + ": " + ec.message());
  });
  stage("config echo",
        [&] { io::write_text_file(dir + "/config.ini", config.render()); });

  RunReport rep;
  rep.output_directory = dir;
  rep.eta_mag_gn_per_m = config.qd.eta_mag_gn_per_m();
  rep.winding_r_expected = config.l_L + config.l_1 - config.l_2;
  rep.identity_propagation = config.medium_off;

  auto t_table = Clock::now();
  HalfFourierTable table;
  stage("phonon table", [&] {
    rep.b_mean = franck_condon(config.bath);
    table = HalfFourierTable::build(config.bath, config.table_delta_max_gn,
                                    config.table_n_points);
    table.dump(dir + "/half_fourier");
  });
  rep.time_table_s = seconds_since(t_table);

  auto t_prop = Clock::now();
  PropagationConfig pcfg = config.propagation();
  PropagationResult prop =
      stage("propagation", [&] { return propagate(pcfg, table, rep.b_mean); });
  rep.time_propagate_s = seconds_since(t_prop);

  rep.input_peak_intensity = prop.input_peak_intensity;
  rep.max_trace_error = prop.max_trace_error;
  rep.max_hermiticity_error = prop.max_hermiticity_error;
  rep.min_eigenvalue = prop.min_eigenvalue;
  rep.n_solves = prop.n_solves;
  for (const auto& s : prop.snapshots) rep.snapshots_z.push_back(s.z);

  auto t_analysis = Clock::now();
  stage("analysis", [&] {
    const FieldGrid& fin = prop.snapshots.back();
    rep.final_z = fin.z;
    double i0 = prop.input_peak_intensity;
    rep.peak_intensity_l = max_abs2(fin.omega_L) / i0;
    rep.peak_intensity_r = max_abs2(fin.omega_R) / i0;
    if (rep.peak_intensity_r > 0.0)
      rep.peak_ratio_l_over_r = rep.peak_intensity_l / rep.peak_intensity_r;
    rep.alpha_rad = std::atan2(std::sqrt(rep.peak_intensity_r),
                               std::sqrt(rep.peak_intensity_l));
    rep.winding_l = measured_winding(fin.omega_L);
    rep.winding_r = measured_winding(fin.omega_R);
    rep.label = to_string(vb_classify(fin.omega_L, fin.omega_R, config.l_L,
                                      rep.winding_r_expected,
                                      config.theta1_rad - config.theta2_rad));
  });

  stage("emission", [&] {
    ComplexGrid input = lg_input_profile(pcfg.probe, config.grid);
    io::write_complex_grid(dir + "/input_omega_L", input,
                           {{"field", "omega_L"}, {"z_tilde", 0.0}, {"unit", "gamma_n"}});
    const FieldGrid& fin = prop.snapshots.back();
    io::write_complex_grid(dir + "/control_omega_1", fin.omega_1,
                           {{"field", "omega_1"}, {"unit", "gamma_n"}});
    io::write_complex_grid(dir + "/control_omega_2", fin.omega_2,
                           {{"field", "omega_2"}, {"unit", "gamma_n"}});

    for (const auto& snap : prop.snapshots) {
      std::string t = z_tag(snap.z);
      io::write_complex_grid(dir + "/fields_z" + t + "_omega_L", snap.omega_L,
                             {{"field", "omega_L"}, {"z_tilde", snap.z}, {"unit", "gamma_n"}});
      io::write_complex_grid(dir + "/fields_z" + t + "_omega_R", snap.omega_R,
                             {{"field", "omega_R"}, {"z_tilde", snap.z}, {"unit", "gamma_n"}});
      io::write_line_cut_csv(dir + "/linecut_x_z" + t + ".csv",
                             line_cut(snap, CutAxis::x, prop.input_peak_intensity),
                             'x');
    }

    const FieldGrid& fin2 = prop.snapshots.back();
    StokesField st = stokes(fin2.omega_L, fin2.omega_R);
    const char* names[4] = {"stokes_S0", "stokes_S1", "stokes_S2", "stokes_S3"};
    const RealGrid* comps[4] = {&st.s0, &st.s1, &st.s2, &st.s3};
    for (int k = 0; k < 4; ++k)
      io::write_real_grid(std::string(dir) + "/" + names[k], *comps[k],
                          {{"stokes_component", k},
                           {"z_tilde", fin2.z},
                           {"unit", "gamma_n^2"},
                           {"basis", "circular (E_L, E_R)"}});

    EllipseField ef = ellipse_or_empty(st);
    io::write_real_grid(dir + "/ellipse_chi", ef.chi,
                        {{"quantity", "ellipticity angle chi"},
                         {"unit", "rad"},
                         {"dark_floor_rel", 1e-12},
                         {"z_tilde", fin2.z}});
    io::write_real_grid(dir + "/ellipse_psi", ef.psi,
                        {{"quantity", "orientation angle psi"},
                         {"unit", "rad"},
                         {"dark_floor_rel", 1e-12},
                         {"z_tilde", fin2.z}});

    render::write_png_heatmap(dir + "/s0.png", st.s0);
    render::write_svg_ellipses(dir + "/ellipses.svg", ef);
  });
  rep.time_analysis_s = seconds_since(t_analysis);

  rep.time_total_s = seconds_since(t0);
  stage("report", [&] { io::write_text_file(dir + "/report.json", rep.to_json()); });
  return rep;
}

void render_run_dir(const std::string& dir) {
  StokesField st;
  stage("load stokes grids", [&] {
    st.s0 = io::read_real_grid(dir + "/stokes_S0");
    st.s1 = io::read_real_grid(dir + "/stokes_S1");
    st.s2 = io::read_real_grid(dir + "/stokes_S2");
    st.s3 = io::read_real_grid(dir + "/stokes_S3");
  });
  if (!(st.s1.grid == st.s0.grid) || !(st.s2.grid == st.s0.grid) ||
      !(st.s3.grid == st.s0.grid))
    throw ValidationError(dir + ": stokes grids disagree in geometry");
  stage("render", [&] {
    EllipseField ef = ellipse_or_empty(st);
    render::write_png_heatmap(dir + "/s0.png", st.s0);
    render::write_svg_ellipses(dir + "/ellipses.svg", ef);
  });
}

double b_mean_value(const PhononBath& bath) {
  bath.validate();
  return franck_condon(bath);
}

}  // namespace qdvb
