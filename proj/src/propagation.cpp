#include "qdvb/propagation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "qdvb/errors.hpp"

namespace qdvb {
namespace {

using cd = std::complex<double>;

struct WorkerStats {
  double max_trace = 0.0;
  double max_herm = 0.0;
  double min_eig = 1.0;
  long long solves = 0;
};

}  // namespace

void PropagationConfig::validate() const {
  grid.validate();
  probe.validate("fields.probe");
  control1.validate("fields.control1");
  control2.validate("fields.control2");
  params.validate();
  bath.validate();
  if (!(z_final >= 0.0)) throw ValidationError("propagation.z_final: must be >= 0");
  if (n_steps < 1) throw ValidationError("propagation.n_steps: must be >= 1");
  if (threads < 1) throw ValidationError("propagation.threads: must be >= 1");
  for (double s : snapshots) snapshot_step(s);
}

int PropagationConfig::snapshot_step(double z) const {
  if (z < 0.0 || z > z_final + 1e-12)
    throw ValidationError("propagation.snapshots_z: " + std::to_string(z) +
                          " outside [0, z_final]");
  double dz = z_final > 0.0 ? z_final / n_steps : 0.0;
  if (dz == 0.0) return 0;
  int k = static_cast<int>(std::lround(z / dz));
  if (std::abs(k * dz - z) > 1e-9 * std::max(1.0, std::abs(z)))
    throw ValidationError("propagation.snapshots_z: " + std::to_string(z) +
                          " does not land on a step boundary (dz = " +
                          std::to_string(dz) + ")");
  return k;
}

PointRhs propagation_rhs(PointSolver& solver, const FieldPoint& fields, double b_mean,
                         bool medium_off) {
  if (medium_off) return {cd{0.0, 0.0}, cd{0.0, 0.0}};
  if (fields.omega_L == cd{0.0, 0.0} && fields.omega_R == cd{0.0, 0.0} &&
      fields.omega_1 == cd{0.0, 0.0} && fields.omega_2 == cd{0.0, 0.0})
    return {cd{0.0, 0.0}, cd{0.0, 0.0}};
  const Matrix4cd& rho = solver.solve(fields);
  cd minus_i{0.0, -1.0};
  return {minus_i * b_mean * rho(kX, kG), minus_i * b_mean * rho(kY, kG)};
}

PropagationResult propagate(const PropagationConfig& config,
                            const HalfFourierTable& table, double b_mean) {
  config.validate();
  const TransverseGrid& g = config.grid;

  ComplexGrid probe0 = lg_input_profile(config.probe, g);
  ComplexGrid c1 = lg_input_profile(config.control1, g);
  ComplexGrid c2 = lg_input_profile(config.control2, g);

  PropagationResult result;
  result.b_mean = b_mean;
  result.input_peak_intensity = max_abs2(probe0);

  std::vector<double> snaps = config.snapshots;
  std::sort(snaps.begin(), snaps.end());
  std::vector<int> snap_steps;
  for (double s : snaps) snap_steps.push_back(config.snapshot_step(s));
  result.snapshots.reserve(snaps.size());
  for (double s : snaps) {
    FieldGrid f{s, ComplexGrid(g), ComplexGrid(g), c1, c2};
    result.snapshots.push_back(std::move(f));
  }

  double dz = config.z_final > 0.0 ? config.z_final / config.n_steps : 0.0;
  int n_workers = std::max(1, config.threads);
  std::vector<WorkerStats> stats(n_workers);
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto pixel_block = [&](int worker, int row_begin, int row_end) {
    try {
      PointSolver solver(config.params, b_mean, table, config.tcl_bare_hs);
      WorkerStats& st = stats[worker];
      for (int iy = row_begin; iy < row_end; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
          FieldPoint f;
          f.omega_1 = c1.at(iy, ix);
          f.omega_2 = c2.at(iy, ix);
          f.omega_L = probe0.at(iy, ix);
          f.omega_R = cd{0.0, 0.0};
          int snap_idx = 0;
          auto record = [&](int step) {
            while (snap_idx < static_cast<int>(snap_steps.size()) &&
                   snap_steps[snap_idx] == step) {
              result.snapshots[snap_idx].omega_L.at(iy, ix) = f.omega_L;
              result.snapshots[snap_idx].omega_R.at(iy, ix) = f.omega_R;
              ++snap_idx;
            }
          };
          auto eval = [&](cd ol, cd orr) {
            FieldPoint p = f;
            p.omega_L = ol;
            p.omega_R = orr;
            PointRhs r = propagation_rhs(solver, p, b_mean, config.medium_off);
            if (!config.medium_off) {
              ++st.solves;
              st.max_trace = std::max(st.max_trace, solver.last_trace_error());
              st.max_herm = std::max(st.max_herm, solver.last_hermiticity_error());
              st.min_eig = std::min(st.min_eig, solver.last_min_eigenvalue());
            }
            return r;
          };
          try {
            record(0);
            for (int step = 0; step < config.n_steps && dz > 0.0; ++step) {
              PointRhs k1 = eval(f.omega_L, f.omega_R);
              PointRhs k2 = eval(f.omega_L + 0.5 * dz * k1.d_omega_L,
                                 f.omega_R + 0.5 * dz * k1.d_omega_R);
              PointRhs k3 = eval(f.omega_L + 0.5 * dz * k2.d_omega_L,
                                 f.omega_R + 0.5 * dz * k2.d_omega_R);
              PointRhs k4 = eval(f.omega_L + dz * k3.d_omega_L,
                                 f.omega_R + dz * k3.d_omega_R);
              f.omega_L += (dz / 6.0) * (k1.d_omega_L + 2.0 * k2.d_omega_L +
                                         2.0 * k3.d_omega_L + k4.d_omega_L);
              f.omega_R += (dz / 6.0) * (k1.d_omega_R + 2.0 * k2.d_omega_R +
                                         2.0 * k3.d_omega_R + k4.d_omega_R);
              record(step + 1);
            }
          } catch (const std::exception& e) {
            throw NumericalError("pixel (" + std::to_string(ix) + ", " +
                                 std::to_string(iy) + "): " + e.what());
          }
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  if (n_workers == 1) {
    pixel_block(0, 0, g.ny);
  } else {
    std::vector<std::thread> pool;
    int rows_per = (g.ny + n_workers - 1) / n_workers;
    for (int wkr = 0; wkr < n_workers; ++wkr) {
      int begin = wkr * rows_per;
      int end = std::min(g.ny, begin + rows_per);
      if (begin >= end) break;
      pool.emplace_back(pixel_block, wkr, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  for (const WorkerStats& st : stats) {
    result.max_trace_error = std::max(result.max_trace_error, st.max_trace);
    result.max_hermiticity_error = std::max(result.max_hermiticity_error, st.max_herm);
    result.min_eigenvalue = std::min(result.min_eigenvalue, st.min_eig);
    result.n_solves += st.solves;
  }
  return result;
}

LineCut line_cut(const FieldGrid& snapshot, CutAxis axis, double input_peak_intensity) {
  if (!(input_peak_intensity > 0.0))
    throw ValidationError("line_cut: input peak intensity must be > 0");
  const TransverseGrid& g = snapshot.omega_L.grid;
  LineCut cut;
  int n = axis == CutAxis::x ? g.nx : g.ny;
  cut.coord.reserve(n);
  cut.intensity_l.reserve(n);
  cut.intensity_r.reserve(n);
  int mid_y = g.ny / 2, mid_x = g.nx / 2;
  for (int k = 0; k < n; ++k) {
    int ix = axis == CutAxis::x ? k : mid_x;
    int iy = axis == CutAxis::x ? mid_y : k;
    cut.coord.push_back(axis == CutAxis::x ? g.x(ix) : g.y(iy));
    cut.intensity_l.push_back(std::norm(snapshot.omega_L.at(iy, ix)) /
                              input_peak_intensity);
    cut.intensity_r.push_back(std::norm(snapshot.omega_R.at(iy, ix)) /
                              input_peak_intensity);
  }
  return cut;
}

}  // namespace qdvb
