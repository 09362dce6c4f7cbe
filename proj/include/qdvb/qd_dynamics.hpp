#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>

#include "qdvb/phonon_bath.hpp"

namespace qdvb {

using Matrix4cd = Eigen::Matrix4cd;
using Vector16cd = Eigen::Matrix<std::complex<double>, 16, 1>;
using Liouvillian = Eigen::Matrix<std::complex<double>, 16, 16>;

// Basis order (g, x, y, u); density matrices are vectorized column-major,
// vec(rho)[i + 4 j] = rho(i, j).
inline constexpr int kG = 0, kX = 1, kY = 2, kU = 3;

struct QdParams {
  double gamma1 = 0.01;   // exciton decay x,y -> g, gamma_n
  double gamma2 = 0.01;   // biexciton decay u -> x,y, gamma_n
  double gamma_d = 0.01;  // pure dephasing on x, y, u, gamma_n
  double delta_p = 0.0;   // effective probe detuning, gamma_n
  double delta_c = 0.0;   // effective control detuning, gamma_n
  // Bookkeeping only: the dimensionless scheme never touches these, they fix
  // the meter scale of z via |eta| = 3 N lambda^2 gamma1 / 4 pi.
  double n_density_per_m3 = 1.5e19;
  double lambda_m = 9.5e-7;

  double eta_mag_gn_per_m() const;
  bool operator==(const QdParams&) const = default;
  void validate() const;
};

struct FieldPoint {
  std::complex<double> omega_L{0.0, 0.0};
  std::complex<double> omega_R{0.0, 0.0};
  std::complex<double> omega_1{0.0, 0.0};
  std::complex<double> omega_2{0.0, 0.0};
};

struct DriveOperators {
  Matrix4cd x_g;  // Omega_L sig_xg + Omega_1 sig_ux + Omega_2 sig_uy + Omega_R sig_yg + h.c.
  Matrix4cd x_u;  // i times the same drive sum, plus h.c.
};

DriveOperators build_drive_operators(const FieldPoint& fields);

// H_S = -Delta_p (sig_xx + sig_yy) - (Delta_p + Delta_c) sig_uu + <B> X_g.
Matrix4cd build_hamiltonian(const QdParams& params, const FieldPoint& fields,
                            double b_mean);

Liouvillian build_lindblad(const QdParams& params);

// Phonon dissipator of the time-convolutionless generator, assembled through
// the eigendecomposition H_S = V D V^dag and half-Fourier lookups
// K_j(d_b - d_a) so no tau integral remains at solve time.
Liouvillian build_phonon_tcl(const Matrix4cd& h_s, const Matrix4cd& x_g,
                             const Matrix4cd& x_u, const HalfFourierTable& table);

Liouvillian assemble_liouvillian(const QdParams& params, const FieldPoint& fields,
                                 double b_mean, const HalfFourierTable& table,
                                 bool tcl_bare_hs = false);

struct SteadyStateOptions {
  // Full null-space audit (SVD) plus the physicality checks. The propagation
  // hot path skips the SVD and relies on the LU conditioning monitor.
  bool check_null_space = true;
};

Matrix4cd steady_state(const Liouvillian& l, const SteadyStateOptions& opts = {});

Matrix4cd time_evolve(const Liouvillian& l, const Matrix4cd& rho0, double t_final,
                      double dt);

double trace_error(const Matrix4cd& rho);
double hermiticity_error(const Matrix4cd& rho);
double min_eigenvalue(const Matrix4cd& rho);

Vector16cd vec(const Matrix4cd& rho);
Matrix4cd unvec(const Vector16cd& v);

std::string liouvillian_to_json(const Liouvillian& l);

// Reusable per-worker solver: precomputes the field-independent Lindblad
// block and keeps decomposition scratch across pixels.
class PointSolver {
 public:
  PointSolver(const QdParams& params, double b_mean, const HalfFourierTable& table,
              bool tcl_bare_hs);

  // Assembles the generator at the given fields and returns its steady state.
  // Cheap LU conditioning check only; invariants of the result are recorded.
  const Matrix4cd& solve(const FieldPoint& fields);

  double last_trace_error() const { return trace_err_; }
  double last_hermiticity_error() const { return herm_err_; }
  double last_min_eigenvalue() const { return min_eig_; }

 private:
  QdParams params_;
  double b_mean_;
  const HalfFourierTable* table_;
  bool tcl_bare_hs_;
  Liouvillian lindblad_;
  Liouvillian scratch_;
  Matrix4cd rho_;
  Eigen::SelfAdjointEigenSolver<Matrix4cd> es_;
  Eigen::SelfAdjointEigenSolver<Matrix4cd> rho_es_;
  double trace_err_ = 0.0, herm_err_ = 0.0, min_eig_ = 1.0;
};

}  // namespace qdvb
