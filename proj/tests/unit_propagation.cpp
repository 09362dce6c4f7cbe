#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "qdvb/errors.hpp"
#include "qdvb/phonon_bath.hpp"
#include "qdvb/propagation.hpp"
#include "qdvb/qd_dynamics.hpp"
#include "qdvb/structured_light.hpp"

using namespace qdvb;
using cd = std::complex<double>;

namespace {

const HalfFourierTable& table_t5() {
  static HalfFourierTable t = [] {
    PhononBath b;
    b.temperature_K = 5.0;
    return HalfFourierTable::build(b);
  }();
  return t;
}

const HalfFourierTable& table_off() {
  static HalfFourierTable t = [] {
    PhononBath b;
    b.enabled = false;
    return HalfFourierTable::build(b);
  }();
  return t;
}

PhononBath bath_t5() {
  PhononBath b;
  b.temperature_K = 5.0;
  return b;
}

PhononBath bath_off() {
  PhononBath b;
  b.enabled = false;
  return b;
}

// Fig. 2 drive set on a small grid; waists in units of the common w.
PropagationConfig fig2_small(int n, double extent) {
  PropagationConfig c;
  c.grid.nx = c.grid.ny = n;
  c.grid.extent = extent;
  c.probe = {0.005, 0, 1.0, 0.0};
  c.control1 = {0.01, 1, 1.7, 0.0};
  c.control2 = {0.05, 0, 1.7, 0.0};
  c.bath = bath_t5();
  return c;
}

double rel_diff(cd a, cd b) {
  double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

}  // namespace

TEST_CASE("configuration and snapshot alignment checks") {
  PropagationConfig c = fig2_small(5, 1.0);
  CHECK_NOTHROW(c.validate());

  CHECK(c.snapshot_step(0.034) == 340);
  CHECK(c.snapshot_step(0.03) == 300);
  CHECK(c.snapshot_step(0.0) == 0);
  CHECK(c.snapshot_step(0.04) == 400);
  CHECK_THROWS_AS(c.snapshot_step(0.01234567), ValidationError);
  CHECK_THROWS_AS(c.snapshot_step(0.05), ValidationError);
  CHECK_THROWS_AS(c.snapshot_step(-1e-4), ValidationError);

  PropagationConfig bad = c;
  bad.z_final = -0.1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.n_steps = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.threads = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.snapshots = {0.0123456};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("rhs vanishes with no fields and with the medium off") {
  PointSolver solver(QdParams{}, 1.0, table_off(), false);

  PointRhs zero = propagation_rhs(solver, FieldPoint{}, 1.0, false);
  CHECK(zero.d_omega_L == cd{0.0, 0.0});
  CHECK(zero.d_omega_R == cd{0.0, 0.0});

  FieldPoint lit{0.004, 0.0, 0.009, 0.045};
  PointRhs off = propagation_rhs(solver, lit, 1.0, true);
  CHECK(off.d_omega_L == cd{0.0, 0.0});
  CHECK(off.d_omega_R == cd{0.0, 0.0});
}

TEST_CASE("rhs equals -i <B> times the steady coherences") {
  double b_mean = franck_condon(bath_t5());
  PointSolver solver(QdParams{}, b_mean, table_t5(), false);
  FieldPoint f{0.004, 0.0, 0.009, 0.045};
  PointRhs r = propagation_rhs(solver, f, b_mean, false);

  PointSolver fresh(QdParams{}, b_mean, table_t5(), false);
  Matrix4cd rho = fresh.solve(f);
  cd minus_i{0.0, -1.0};
  CHECK(rel_diff(r.d_omega_L, minus_i * b_mean * rho(kX, kG)) < 1e-14);
  CHECK(rel_diff(r.d_omega_R, minus_i * b_mean * rho(kY, kG)) < 1e-14);
  CHECK(std::abs(r.d_omega_R) > 0.0);
}

TEST_CASE("four-wave phase rule: source phase follows the drives") {
  double b_mean = franck_condon(bath_t5());
  PointSolver solver(QdParams{}, b_mean, table_t5(), false);
  FieldPoint base{0.004, 0.0, 0.009, 0.045};
  PointRhs r0 = propagation_rhs(solver, base, b_mean, false);
  REQUIRE(std::abs(r0.d_omega_R) > 1e-12);

  double a = 0.7, b = -1.3, cph = 0.4;
  FieldPoint rotated{base.omega_L * std::polar(1.0, a), 0.0,
                     base.omega_1 * std::polar(1.0, b),
                     base.omega_2 * std::polar(1.0, cph)};
  PointRhs r1 = propagation_rhs(solver, rotated, b_mean, false);

  cd expected_r = r0.d_omega_R * std::polar(1.0, a + b - cph);
  cd expected_l = r0.d_omega_L * std::polar(1.0, a);
  CHECK(rel_diff(r1.d_omega_R, expected_r) < 1e-10);
  CHECK(rel_diff(r1.d_omega_L, expected_l) < 1e-10);
}

TEST_CASE("medium off is an identity map and skips every solve") {
  PropagationConfig c = fig2_small(7, 1.0);
  c.bath = bath_off();
  c.medium_off = true;
  c.n_steps = 40;
  c.snapshots = {0.0, 0.02, 0.04};

  PropagationResult res = propagate(c, table_off(), 1.0);
  REQUIRE(res.snapshots.size() == 3);
  CHECK(res.n_solves == 0);
  CHECK(res.max_trace_error == 0.0);
  CHECK(res.min_eigenvalue == 1.0);

  ComplexGrid probe0 = lg_input_profile(c.probe, c.grid);
  ComplexGrid c1 = lg_input_profile(c.control1, c.grid);
  ComplexGrid c2 = lg_input_profile(c.control2, c.grid);
  CHECK(res.input_peak_intensity == max_abs2(probe0));
  for (const FieldGrid& snap : res.snapshots) {
    for (size_t i = 0; i < probe0.v.size(); ++i) {
      CHECK(snap.omega_L.v[i] == probe0.v[i]);
      CHECK(snap.omega_R.v[i] == cd{0.0, 0.0});
      CHECK(snap.omega_1.v[i] == c1.v[i]);
      CHECK(snap.omega_2.v[i] == c2.v[i]);
    }
  }
}

TEST_CASE("zero medium length returns the inputs") {
  PropagationConfig c = fig2_small(5, 1.0);
  c.bath = bath_off();
  c.z_final = 0.0;
  c.snapshots = {0.0};
  PropagationResult res = propagate(c, table_off(), 1.0);
  ComplexGrid probe0 = lg_input_profile(c.probe, c.grid);
  REQUIRE(res.snapshots.size() == 1);
  CHECK(res.n_solves == 0);
  for (size_t i = 0; i < probe0.v.size(); ++i) {
    CHECK(res.snapshots[0].omega_L.v[i] == probe0.v[i]);
    CHECK(res.snapshots[0].omega_R.v[i] == cd{0.0, 0.0});
  }
}

TEST_CASE("controls off: probe obeys the two-level decay law") {
  PropagationConfig c = fig2_small(3, 0.5);
  c.bath = bath_off();
  c.probe.amplitude = 1e-4;
  c.control1.amplitude = 0.0;
  c.control2.amplitude = 0.0;
  c.z_final = 0.03;
  c.n_steps = 300;
  c.snapshots = {0.015, 0.03};

  PropagationResult res = propagate(c, table_off(), 1.0);
  ComplexGrid probe0 = lg_input_profile(c.probe, c.grid);
  double gamma2_bar = (c.params.gamma1 + c.params.gamma_d) / 2.0;
  for (const FieldGrid& snap : res.snapshots) {
    double decay = std::exp(-snap.z / gamma2_bar);
    for (size_t i = 0; i < probe0.v.size(); ++i) {
      double want = std::abs(probe0.v[i]) * decay;
      CHECK(std::abs(std::abs(snap.omega_L.v[i]) - want) < 0.01 * want);
      CHECK(std::abs(snap.omega_R.v[i]) < 1e-18);
    }
  }
}

TEST_CASE("sub-grid propagation equals the restriction of the full grid") {
  PropagationConfig full = fig2_small(5, 1.0);
  full.n_steps = 20;
  full.snapshots = {0.04};
  PropagationConfig sub = full;
  sub.grid.nx = sub.grid.ny = 3;
  sub.grid.extent = 0.5;

  double b_mean = franck_condon(full.bath);
  PropagationResult rf = propagate(full, table_t5(), b_mean);
  PropagationResult rs = propagate(sub, table_t5(), b_mean);

  for (int iy = 0; iy < 3; ++iy) {
    for (int ix = 0; ix < 3; ++ix) {
      REQUIRE(sub.grid.x(ix) == full.grid.x(ix + 1));
      REQUIRE(sub.grid.y(iy) == full.grid.y(iy + 1));
      CHECK(rs.snapshots[0].omega_L.at(iy, ix) ==
            rf.snapshots[0].omega_L.at(iy + 1, ix + 1));
      CHECK(rs.snapshots[0].omega_R.at(iy, ix) ==
            rf.snapshots[0].omega_R.at(iy + 1, ix + 1));
    }
  }
}

TEST_CASE("worker count does not change the data") {
  PropagationConfig c = fig2_small(5, 1.0);
  c.n_steps = 10;
  c.snapshots = {0.04};
  double b_mean = franck_condon(c.bath);
  PropagationResult one = propagate(c, table_t5(), b_mean);
  c.threads = 3;
  PropagationResult three = propagate(c, table_t5(), b_mean);
  CHECK(one.n_solves == three.n_solves);
  for (size_t i = 0; i < one.snapshots[0].omega_L.v.size(); ++i) {
    CHECK(one.snapshots[0].omega_L.v[i] == three.snapshots[0].omega_L.v[i]);
    CHECK(one.snapshots[0].omega_R.v[i] == three.snapshots[0].omega_R.v[i]);
  }
}

TEST_CASE("generated field turns on linearly and peaks inside the medium") {
  // One shared propagation; subcases below only read the snapshots.
  static const PropagationConfig c = [] {
    PropagationConfig cfg = fig2_small(21, 3.0);
    cfg.z_final = 0.08;
    cfg.n_steps = 400;
    // Early-onset probes plus a sweep to beyond the interior maximum.
    cfg.snapshots = {0.0, 0.0004, 0.0008, 0.0016, 0.002};
    for (int k = 1; k <= 25; ++k) cfg.snapshots.push_back(0.0032 * k);
    cfg.snapshots.push_back(0.034);
    return cfg;
  }();
  static const PropagationResult res =
      propagate(c, table_t5(), franck_condon(c.bath));
  REQUIRE(res.snapshots.size() == c.snapshots.size());

  CHECK(res.n_solves ==
        static_cast<long long>(c.grid.nx) * c.grid.ny * c.n_steps * 4);
  CHECK(res.max_trace_error < 1e-10);
  CHECK(res.max_hermiticity_error < 1e-10);
  CHECK(res.min_eigenvalue > -1e-8);

  auto peak_r = [&](const FieldGrid& s) { return max_abs2(s.omega_R); };

  SUBCASE("linear onset over the first few percent") {
    // Snapshots 1..4 sit in the onset window; slopes of log|peak R| vs log z.
    for (int i = 1; i + 1 <= 4; ++i) {
      double p1 = std::sqrt(peak_r(res.snapshots[i]));
      double p2 = std::sqrt(peak_r(res.snapshots[i + 1]));
      REQUIRE(p1 > 0.0);
      double slope = std::log(p2 / p1) /
                     std::log(res.snapshots[i + 1].z / res.snapshots[i].z);
      CHECK(slope == doctest::Approx(1.0).epsilon(0.05));
    }
  }

  SUBCASE("single interior maximum along z") {
    std::vector<double> peaks;
    for (const FieldGrid& s : res.snapshots)
      if (s.z == 0.0 || std::abs(s.z / 0.0032 - std::lround(s.z / 0.0032)) < 1e-9)
        peaks.push_back(peak_r(s));
    REQUIRE(peaks.size() >= 10);
    CHECK(peaks.front() == 0.0);
    size_t kmax = std::max_element(peaks.begin(), peaks.end()) - peaks.begin();
    CHECK(kmax > 0);
    CHECK(kmax + 1 < peaks.size());
    for (size_t i = 0; i < kmax; ++i) CHECK(peaks[i] < peaks[i + 1]);
    for (size_t i = kmax; i + 1 < peaks.size(); ++i) CHECK(peaks[i] > peaks[i + 1]);
  }

  SUBCASE("doughnut profile against the centered probe") {
    const FieldGrid* snap = nullptr;
    for (const FieldGrid& s : res.snapshots)
      if (s.z == 0.034) snap = &s;
    REQUIRE(snap != nullptr);
    LineCut cut = line_cut(*snap, CutAxis::x, res.input_peak_intensity);
    int mid = c.grid.nx / 2;
    double rmax = *std::max_element(cut.intensity_r.begin(), cut.intensity_r.end());
    int rarg = std::max_element(cut.intensity_r.begin(), cut.intensity_r.end()) -
               cut.intensity_r.begin();
    CHECK(cut.intensity_r[mid] < 1e-3 * rmax);       // vortex null on axis
    CHECK(rarg != 0);
    CHECK(rarg != c.grid.nx - 1);
    CHECK(rarg != mid);
    int larg = std::max_element(cut.intensity_l.begin(), cut.intensity_l.end()) -
               cut.intensity_l.begin();
    CHECK(larg == mid);
  }

  SUBCASE("line cuts at z = 0 and normalization") {
    const FieldGrid& s0 = res.snapshots[0];
    REQUIRE(s0.z == 0.0);
    LineCut cut = line_cut(s0, CutAxis::x, res.input_peak_intensity);
    int mid = c.grid.nx / 2;
    CHECK(cut.intensity_l[mid] == doctest::Approx(1.0).epsilon(1e-12));
    for (int k = 0; k < c.grid.nx; ++k) {
      CHECK(cut.intensity_r[k] == 0.0);
      CHECK(cut.intensity_l[k] ==
            doctest::Approx(cut.intensity_l[c.grid.nx - 1 - k]).epsilon(1e-12));
      CHECK(cut.coord[k] == doctest::Approx(c.grid.x(k)).epsilon(1e-15));
    }
    LineCut ycut = line_cut(s0, CutAxis::y, res.input_peak_intensity);
    CHECK(ycut.coord.size() == static_cast<size_t>(c.grid.ny));
    CHECK(ycut.intensity_l[mid] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(line_cut(s0, CutAxis::x, 0.0), ValidationError);
  }
}

TEST_CASE("halving the step count moves the answer by less than 1e-6") {
  PropagationConfig coarse = fig2_small(3, 0.8);
  coarse.n_steps = 200;
  coarse.snapshots = {0.04};
  PropagationConfig fine = coarse;
  fine.n_steps = 400;

  double b_mean = franck_condon(coarse.bath);
  PropagationResult rc = propagate(coarse, table_t5(), b_mean);
  PropagationResult rf = propagate(fine, table_t5(), b_mean);
  double scale = std::sqrt(
      std::max(max_abs2(rf.snapshots[0].omega_L), max_abs2(rf.snapshots[0].omega_R)));
  for (size_t i = 0; i < rc.snapshots[0].omega_L.v.size(); ++i) {
    CHECK(std::abs(rc.snapshots[0].omega_L.v[i] - rf.snapshots[0].omega_L.v[i]) <
          1e-6 * scale);
    CHECK(std::abs(rc.snapshots[0].omega_R.v[i] - rf.snapshots[0].omega_R.v[i]) <
          1e-6 * scale);
  }
}

TEST_CASE("solver failures carry the pixel location") {
  PropagationConfig c = fig2_small(3, 0.5);
  c.bath = bath_off();
  c.params.gamma1 = c.params.gamma2 = c.params.gamma_d = 0.0;
  c.n_steps = 2;
  c.snapshots = {};
  try {
    propagate(c, table_off(), 1.0);
    FAIL("expected a NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("pixel (") != std::string::npos);
  }
}
