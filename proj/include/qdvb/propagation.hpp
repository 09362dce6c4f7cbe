#pragma once

#include <vector>

#include "qdvb/phonon_bath.hpp"
#include "qdvb/qd_dynamics.hpp"
#include "qdvb/structured_light.hpp"

namespace qdvb {

// All distances along the medium are the dimensionless z~ = z |eta| / gamma_n.
struct PropagationConfig {
  TransverseGrid grid;
  LgInputSpec probe;     // Omega_L at z = 0; Omega_R starts at exactly 0
  LgInputSpec control1;  // Omega_1, undepleted
  LgInputSpec control2;  // Omega_2, undepleted
  double z_final = 0.04;
  int n_steps = 400;
  std::vector<double> snapshots;  // must land on step boundaries
  QdParams params;
  PhononBath bath;
  bool tcl_bare_hs = false;
  bool medium_off = false;
  int threads = 1;

  void validate() const;
  // Step index for a snapshot position (throws if misaligned).
  int snapshot_step(double z) const;
};

struct FieldGrid {
  double z = 0.0;
  ComplexGrid omega_L, omega_R, omega_1, omega_2;
};

struct PropagationResult {
  std::vector<FieldGrid> snapshots;  // one per requested z, ascending
  double input_peak_intensity = 0.0;  // max |Omega_L(z=0)|^2, the I0 normalizer
  double b_mean = 1.0;
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 1.0;
  long long n_solves = 0;
};

struct PointRhs {
  std::complex<double> d_omega_L;
  std::complex<double> d_omega_R;
};

// d Omega_L / dz~ = -i <B> rho_xg, d Omega_R / dz~ = -i <B> rho_yg, with the
// steady-state coherences at the local field amplitudes. The <B> factor is the
// lab-frame dipole renormalization of the polaron-frame coherence; it is 1
// with the bath off.
PointRhs propagation_rhs(PointSolver& solver, const FieldPoint& fields, double b_mean,
                         bool medium_off);

PropagationResult propagate(const PropagationConfig& config,
                            const HalfFourierTable& table, double b_mean);

struct LineCut {
  std::vector<double> coord;        // x/w or y/w
  std::vector<double> intensity_l;  // |Omega_L|^2 / I0
  std::vector<double> intensity_r;  // |Omega_R|^2 / I0
};

enum class CutAxis { x, y };

LineCut line_cut(const FieldGrid& snapshot, CutAxis axis, double input_peak_intensity);

}  // namespace qdvb
