#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qdvb/errors.hpp"
#include "qdvb/io.hpp"
#include "qdvb/scenario.hpp"
#include "qdvb/structured_light.hpp"

using namespace qdvb;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool same_bytes(const fs::path& a, const fs::path& b) { return slurp(a) == slurp(b); }

fs::path scratch_root() {
  static fs::path root = [] {
    fs::path p = fs::temp_directory_path() / "qdvb_scenario_tests";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

// Cheap end-to-end configuration: identity medium, no bath, tiny grid.
ScenarioConfig tiny_off_config(const std::string& out_dir) {
  ScenarioConfig c;
  c.bath.enabled = false;
  c.medium_off = true;
  c.grid.nx = c.grid.ny = 11;
  c.grid.extent = 2.0;
  c.z_final = 0.01;
  c.n_steps = 10;
  c.snapshots_z = {0.0, 0.01};
  c.table_n_points = 101;
  c.output_directory = out_dir;
  return c;
}

}  // namespace

TEST_CASE("preset catalog covers every figure") {
  const auto& cat = preset_catalog();
  std::vector<std::string> names;
  for (const auto& [name, desc] : cat) {
    names.push_back(name);
    CHECK(!desc.empty());
  }
  std::vector<std::string> expected = {
      "fig2",    "fig3a",  "fig3b",   "fig3c",   "fig3d",
      "fig3e",   "fig3f",  "fig4_0",  "fig4_90", "fig4_180",
      "fig4_270", "fig5_0", "fig5_5",  "fig5_10", "fig5_20"};
  CHECK(names == expected);
  CHECK_THROWS_AS(ScenarioConfig::preset("fig9"), ValidationError);
}

TEST_CASE("fig2 preset carries the common parameter block") {
  ScenarioConfig c = ScenarioConfig::preset("fig2");
  CHECK(c.omega0L_gn == 0.005);
  CHECK(c.omega01_gn == 0.01);
  CHECK(c.omega02_gn == 0.05);
  CHECK(c.l_L == 0);
  CHECK(c.l_1 == 1);
  CHECK(c.l_2 == 0);
  CHECK(c.wL_w == 1.0);
  CHECK(c.w1_w == 1.7);
  CHECK(c.w2_w == 1.7);
  CHECK(c.bath.temperature_K == 5.0);
  CHECK(c.bath.enabled);
  CHECK(c.qd.delta_p == 0.0);
  CHECK(c.qd.delta_c == 0.0);
  CHECK(c.z_final == 0.04);
  CHECK(c.snapshots_z == std::vector<double>{0.030, 0.034, 0.040});
  CHECK(c.grid.nx == 201);
  CHECK(c.grid.ny == 201);
  CHECK(c.grid.extent == 3.0);
  CHECK(c.output_directory == "runs/fig2");
}

TEST_CASE("fig3a preset pins the lemon scenario") {
  ScenarioConfig c = ScenarioConfig::preset("fig3a");
  CHECK(c.l_L == 0);
  CHECK(c.l_1 == 1);
  CHECK(c.l_2 == 0);
  CHECK(c.theta1_rad == 0.0);
  CHECK(c.theta2_rad == 0.0);
  CHECK(c.z_final == 0.034);
  CHECK(c.bath.temperature_K == 5.0);
  CHECK(c.wL_w == 1.0);
  CHECK(c.w1_w == 1.7);
  CHECK(c.w2_w == 1.7);
  CHECK(c.snapshots_z == std::vector<double>{0.034});
}

TEST_CASE("fig3e preset selects the azimuthal beam") {
  ScenarioConfig c = ScenarioConfig::preset("fig3e");
  CHECK(c.l_L == -1);
  CHECK(c.l_1 == 2);
  CHECK(c.l_2 == 0);
  CHECK(c.theta1_rad == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(c.z_final == 0.040);
  CHECK(c.wL_w == 0.8);
  CHECK(c.w1_w == 1.0);
  CHECK(c.w2_w == 1.0);
  // The synthesis rules map these inputs to the azimuthal label.
  int l_r = c.l_L + c.l_1 - c.l_2;
  CHECK(l_r == 1);
  ComplexGrid dummy{TransverseGrid{5, 5, 1.0}};
  CHECK(vb_classify(dummy, dummy, c.l_L, l_r, c.theta1_rad - c.theta2_rad) ==
        VbLabel::azimuthal);
}

TEST_CASE("fig4 presets rotate theta1 through quarter turns") {
  CHECK(ScenarioConfig::preset("fig4_0").theta1_rad == 0.0);
  CHECK(ScenarioConfig::preset("fig4_90").theta1_rad ==
        doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK(ScenarioConfig::preset("fig4_180").theta1_rad ==
        doctest::Approx(kPi).epsilon(1e-15));
  CHECK(ScenarioConfig::preset("fig4_270").theta1_rad ==
        doctest::Approx(3 * kPi / 2).epsilon(1e-15));
  CHECK(ScenarioConfig::preset("fig4_90").z_final == 0.034);
}

TEST_CASE("fig5 presets change only the bath row") {
  ScenarioConfig base = ScenarioConfig::preset("fig2");

  ScenarioConfig t20 = ScenarioConfig::preset("fig5_20");
  ScenarioConfig want = base;
  want.bath.temperature_K = 20.0;
  want.output_directory = t20.output_directory;
  CHECK(t20 == want);

  ScenarioConfig t0 = ScenarioConfig::preset("fig5_0");
  CHECK(!t0.bath.enabled);
  want = base;
  want.bath.enabled = false;
  want.bath.temperature_K = 0.0;
  want.output_directory = t0.output_directory;
  CHECK(t0 == want);

  ScenarioConfig t5 = ScenarioConfig::preset("fig5_5");
  want = base;
  want.output_directory = t5.output_directory;
  CHECK(t5 == want);
}

TEST_CASE("every preset round-trips through its text form") {
  for (const auto& [name, desc] : preset_catalog()) {
    CAPTURE(name);
    ScenarioConfig c = ScenarioConfig::preset(name);
    std::string text = c.render();
    ScenarioConfig back = ScenarioConfig::parse(text);
    CHECK(back == c);
    CHECK(back.render() == text);
  }
}

TEST_CASE("minimal config text picks up the documented defaults") {
  ScenarioConfig c = ScenarioConfig::parse("[output]\ndirectory = runs/min\n");
  CHECK(c.omega0L_gn == 0.005);
  CHECK(c.snapshots_z == std::vector<double>{0.04});
  CHECK(c.grid.nx == 201);
  CHECK(c.threads == 1);
  CHECK(!c.medium_off);
  CHECK(c.output_directory == "runs/min");
}

TEST_CASE("parse rejects malformed input with path-qualified messages") {
  auto message_of = [](const std::string& text) {
    try {
      ScenarioConfig::parse(text);
      return std::string("(no error)");
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
  };

  CHECK(message_of("[fields]\nbogus = 1\n[output]\ndirectory = x\n") ==
        "fields.bogus: unknown key");
  CHECK(message_of("[output]\ndirectory = x\ndirectory = y\n") ==
        "output.directory: duplicate key");
  CHECK(message_of("") == "output.directory: missing required key");
  CHECK(message_of("key = 1\n").find("outside any section") != std::string::npos);
  CHECK(message_of("[grid\nnx = 5\n").find("malformed section header") !=
        std::string::npos);
  CHECK(message_of("[grid]\nnx\n[output]\ndirectory = x\n")
            .find("expected key = value") != std::string::npos);
  CHECK(message_of("[bath]\ntemperature_K = -1\n[output]\ndirectory = x\n")
            .find("bath.temperature_K") != std::string::npos);
  CHECK(message_of("[qd]\ngamma1_gn = fast\n[output]\ndirectory = x\n")
            .find("not a number") != std::string::npos);
  CHECK(message_of("[grid]\nnx = 100\n[output]\ndirectory = x\n")
            .find("grid.nx") != std::string::npos);
  CHECK(message_of("[toggles]\nmedium_off = yes\n[output]\ndirectory = x\n")
            .find("expected true or false") != std::string::npos);
  CHECK(message_of("[propagation]\nsnapshots_z = 0.01,,0.02\n[output]\ndirectory"
                   " = x\n")
            .find("empty list element") != std::string::npos);
  CHECK(message_of("[propagation]\nsnapshots_z = 0.01234567\n[output]\ndirectory"
                   " = x\n")
            .find("step boundary") != std::string::npos);
}

TEST_CASE("comments and spacing are tolerated") {
  ScenarioConfig c = ScenarioConfig::parse(
      "# header comment\n"
      "; alt comment\n"
      "  [grid]  \n"
      "  nx   =  31\n"
      "ny=31\n"
      "\n"
      "[output]\n"
      "directory = runs/spaced\n");
  CHECK(c.grid.nx == 31);
  CHECK(c.grid.ny == 31);
}

TEST_CASE("set assigns one key with parse semantics") {
  ScenarioConfig c = ScenarioConfig::preset("fig2");
  c.set("grid.nx", "31");
  CHECK(c.grid.nx == 31);
  c.set("bath.enabled", "false");
  CHECK(!c.bath.enabled);
  c.set("propagation.snapshots_z", "0.01, 0.02");
  CHECK(c.snapshots_z == std::vector<double>{0.01, 0.02});
  CHECK_THROWS_AS(c.set("grid.nz", "3"), ValidationError);
  CHECK_THROWS_AS(c.set("grid.nx", "many"), ValidationError);
}

TEST_CASE("parse_file reads what render wrote") {
  fs::path dir = scratch_root() / "parse_file";
  fs::create_directories(dir);
  ScenarioConfig c = ScenarioConfig::preset("fig3b");
  io::write_text_file((dir / "c.ini").string(), c.render());
  CHECK(ScenarioConfig::parse_file((dir / "c.ini").string()) == c);
  CHECK_THROWS_AS(ScenarioConfig::parse_file((dir / "absent.ini").string()), IoError);
}

TEST_CASE("b_mean_value covers the bath table rows") {
  PhononBath b;
  b.enabled = false;
  CHECK(b_mean_value(b) == 1.0);
  b = PhononBath{};
  b.temperature_K = 5.0;
  CHECK(b_mean_value(b) == doctest::Approx(0.900243).epsilon(2e-4));
  b.temperature_K = -2.0;
  CHECK_THROWS_AS(b_mean_value(b), ValidationError);
}

TEST_CASE("identity run emits the full artifact set") {
  fs::path dir = scratch_root() / "tiny_off";
  ScenarioConfig c = tiny_off_config(dir.string());
  RunReport rep = run_scenario(c);

  CHECK(rep.identity_propagation);
  CHECK(rep.b_mean == 1.0);
  CHECK(rep.n_solves == 0);
  CHECK(rep.label == "lemon");  // synthesis inputs (0, 1, 0)
  CHECK(rep.winding_r_expected == 1);
  CHECK(!rep.winding_r.has_value());
  CHECK(!rep.peak_ratio_l_over_r.has_value());
  CHECK(rep.peak_intensity_l == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.peak_intensity_r == 0.0);
  CHECK(rep.alpha_rad == 0.0);
  CHECK(rep.final_z == 0.01);
  CHECK(rep.snapshots_z == std::vector<double>{0.0, 0.01});

  for (const char* name :
       {"config.ini", "report.json", "half_fourier.bin", "half_fourier.json",
        "input_omega_L.bin", "input_omega_L.json", "control_omega_1.bin",
        "control_omega_2.bin", "fields_z0.000000_omega_L.bin",
        "fields_z0.000000_omega_R.bin", "fields_z0.010000_omega_L.bin",
        "fields_z0.010000_omega_R.bin", "linecut_x_z0.000000.csv",
        "linecut_x_z0.010000.csv", "stokes_S0.bin", "stokes_S1.bin",
        "stokes_S2.bin", "stokes_S3.bin", "ellipse_chi.bin", "ellipse_psi.bin",
        "s0.png", "s0.png.json", "ellipses.svg"}) {
    CAPTURE(name);
    CHECK(fs::exists(dir / name));
  }

  SUBCASE("config echo round-trips") {
    CHECK(ScenarioConfig::parse_file((dir / "config.ini").string()) == c);
  }

  SUBCASE("report file carries results and invariants") {
    auto j = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(j["format"] == "qdvb-report-v1");
    CHECK(j["results"]["identity_propagation"] == true);
    CHECK(j["results"]["label"] == "lemon");
    CHECK(j["results"]["winding_omega_R"].is_null());
    CHECK(j["results"]["peak_ratio_L_over_R"].is_null());
    CHECK(j["invariants"]["n_steady_state_solves"] == 0);
    CHECK(j["tolerances"]["dark_floor_rel"] == 1e-12);
    CHECK(j.contains("timings_s"));
    CHECK(j["artifacts"]["images"]["s0_png"] == "s0.png");
  }

  SUBCASE("identity medium leaves the probe untouched on disk") {
    ComplexGrid input = io::read_complex_grid((dir / "input_omega_L").string());
    ComplexGrid out = io::read_complex_grid(
        (dir / "fields_z0.010000_omega_L").string());
    ComplexGrid gen = io::read_complex_grid(
        (dir / "fields_z0.010000_omega_R").string());
    REQUIRE(input.grid == c.grid);
    for (size_t i = 0; i < input.v.size(); ++i) {
      CHECK(out.v[i] == input.v[i]);
      CHECK(gen.v[i] == std::complex<double>{0.0, 0.0});
    }
  }

  SUBCASE("pure left output is fully left-circular in the ellipse map") {
    RealGrid chi = io::read_real_grid((dir / "ellipse_chi").string());
    RealGrid s0 = io::read_real_grid((dir / "stokes_S0").string());
    RealGrid s3 = io::read_real_grid((dir / "stokes_S3").string());
    int cy = (chi.grid.ny - 1) / 2, cx = (chi.grid.nx - 1) / 2;
    CHECK(chi.at(cy, cx) == doctest::Approx(kPi / 4).epsilon(1e-12));
    for (size_t i = 0; i < s0.v.size(); ++i)
      CHECK(s3.v[i] == doctest::Approx(s0.v[i]).epsilon(1e-15));
  }
}

TEST_CASE("identical configs produce byte-identical artifacts") {
  fs::path da = scratch_root() / "det_a";
  fs::path db = scratch_root() / "det_b";
  ScenarioConfig ca = tiny_off_config(da.string());
  ScenarioConfig cb = tiny_off_config(db.string());
  RunReport ra = run_scenario(ca);
  RunReport rb = run_scenario(cb);

  // Reports agree up to the run directory they point at.
  auto cleaned = [](const RunReport& r) {
    auto j = nlohmann::json::parse(r.to_json(false));
    j.erase("output_directory");
    return j;
  };
  CHECK(cleaned(ra) == cleaned(rb));

  int compared = 0;
  for (const auto& entry : fs::directory_iterator(da)) {
    fs::path name = entry.path().filename();
    CAPTURE(name.string());
    REQUIRE(fs::exists(db / name));
    if (name == "config.ini") {
      // Differs only in the output directory line.
      continue;
    }
    if (name == "report.json") {
      auto ja = nlohmann::json::parse(slurp(da / name));
      auto jb = nlohmann::json::parse(slurp(db / name));
      ja.erase("timings_s");
      jb.erase("timings_s");
      ja.erase("output_directory");
      jb.erase("output_directory");
      CHECK(ja == jb);
    } else {
      CHECK(same_bytes(da / name, db / name));
    }
    ++compared;
  }
  CHECK(compared > 20);
}

TEST_CASE("render_run_dir rebuilds the images in place") {
  fs::path dir = scratch_root() / "rerender";
  run_scenario(tiny_off_config(dir.string()));
  std::string png = slurp(dir / "s0.png");
  std::string svg = slurp(dir / "ellipses.svg");
  fs::remove(dir / "s0.png");
  fs::remove(dir / "ellipses.svg");

  render_run_dir(dir.string());
  CHECK(slurp(dir / "s0.png") == png);
  CHECK(slurp(dir / "ellipses.svg") == svg);

  CHECK_THROWS_AS(render_run_dir((scratch_root() / "no_such_run").string()), IoError);
}

TEST_CASE("short active run transfers the expected vortex charge") {
  fs::path dir = scratch_root() / "tiny_active";
  ScenarioConfig c;
  c.bath.enabled = false;
  c.grid.nx = c.grid.ny = 31;
  c.grid.extent = 2.0;
  c.z_final = 0.002;
  c.n_steps = 10;
  c.snapshots_z = {0.002};
  c.table_n_points = 101;
  c.output_directory = dir.string();

  RunReport rep = run_scenario(c);
  CHECK(!rep.identity_propagation);
  CHECK(rep.b_mean == 1.0);
  CHECK(rep.n_solves == 31LL * 31 * 10 * 4);
  CHECK(rep.label == "lemon");
  CHECK(rep.winding_r_expected == 1);
  REQUIRE(rep.winding_r.has_value());
  CHECK(*rep.winding_r == 1);
  REQUIRE(rep.winding_l.has_value());
  CHECK(*rep.winding_l == 0);
  REQUIRE(rep.peak_ratio_l_over_r.has_value());
  CHECK(*rep.peak_ratio_l_over_r > 1.0);
  CHECK(rep.alpha_rad > 0.0);
  CHECK(rep.max_trace_error < 1e-10);
  CHECK(rep.max_hermiticity_error < 1e-10);
  CHECK(rep.min_eigenvalue > -1e-8);

  ComplexGrid gen =
      io::read_complex_grid((dir / "fields_z0.002000_omega_R").string());
  CHECK(phase_winding(gen, 0.55) == 1);

  std::string summary = rep.summary();
  CHECK(summary.find("label = lemon") != std::string::npos);
  CHECK(summary.find("winding(Omega_R) = 1") != std::string::npos);
}
