#include "qdvb/qd_dynamics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qdvb/errors.hpp"

namespace qdvb {
namespace {

using cd = std::complex<double>;

// rho -> c A rho, vectorized column-major.
void add_left(Liouvillian& l, cd c, const Matrix4cd& a) {
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 4; ++k) l(i + 4 * j, k + 4 * j) += c * a(i, k);
}

// rho -> c rho B.
void add_right(Liouvillian& l, cd c, const Matrix4cd& b) {
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i)
      for (int m = 0; m < 4; ++m) l(i + 4 * j, i + 4 * m) += c * b(m, j);
}

// rho -> c A rho B.
void add_both(Liouvillian& l, cd c, const Matrix4cd& a, const Matrix4cd& b) {
  for (int j = 0; j < 4; ++j)
    for (int m = 0; m < 4; ++m) {
      cd cb = c * b(m, j);
      for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) l(i + 4 * j, k + 4 * m) += cb * a(i, k);
    }
}

void add_coherent(Liouvillian& l, const Matrix4cd& h) {
  add_left(l, cd(0.0, -1.0), h);
  add_right(l, cd(0.0, 1.0), h);
}

// -(gamma/2) (O^dag O rho - 2 O rho O^dag + rho O^dag O).
void add_lindblad_channel(Liouvillian& l, double gamma, const Matrix4cd& o) {
  Matrix4cd oo = o.adjoint() * o;
  add_left(l, -0.5 * gamma, oo);
  add_both(l, gamma, o, o.adjoint());
  add_right(l, -0.5 * gamma, oo);
}

Matrix4cd sigma(int a, int b) {
  Matrix4cd m = Matrix4cd::Zero();
  m(a, b) = 1.0;
  return m;
}

void add_tcl_term(Liouvillian& l, const Matrix4cd& x, const Matrix4cd& xt) {
  // -([X, Xt rho] + h.c.) expanded into the four sandwich products.
  add_left(l, -1.0, x * xt);
  add_both(l, 1.0, xt, x);
  add_right(l, -1.0, xt.adjoint() * x);
  add_both(l, 1.0, x, xt.adjoint());
}

void build_tcl_into(Liouvillian& l, const Matrix4cd& h_s, const Matrix4cd& x_g,
                    const Matrix4cd& x_u, const HalfFourierTable& table,
                    Eigen::SelfAdjointEigenSolver<Matrix4cd>& es) {
  es.compute(h_s);
  const Matrix4cd& v = es.eigenvectors();
  const Eigen::Vector4d& d = es.eigenvalues();

  auto filtered = [&](const Matrix4cd& x, bool is_g) {
    Matrix4cd xe = v.adjoint() * x * v;
    Matrix4cd m;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double delta = d(b) - d(a);
        m(a, b) = xe(a, b) * (is_g ? table.k_g(delta) : table.k_u(delta));
      }
    return Matrix4cd(v * m * v.adjoint());
  };

  add_tcl_term(l, x_g, filtered(x_g, true));
  add_tcl_term(l, x_u, filtered(x_u, false));
}

void solve_trace_constrained(const Liouvillian& l, Matrix4cd& rho) {
  Liouvillian a = l;
  a.row(0).setZero();
  for (int i = 0; i < 4; ++i) a(0, i + 4 * i) = 1.0;
  Vector16cd b = Vector16cd::Zero();
  b(0) = 1.0;
  Eigen::PartialPivLU<Liouvillian> lu(a);
  auto diag = lu.matrixLU().diagonal();
  double dmin = 1e300, dmax = 0.0;
  for (int i = 0; i < 16; ++i) {
    double m = std::abs(diag(i));
    dmin = std::min(dmin, m);
    dmax = std::max(dmax, m);
  }
  if (!(dmax > 0.0) || dmin < 1e-14 * dmax)
    throw NumericalError("steady_state: trace-constrained system is singular");
  Vector16cd x = lu.solve(b);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) rho(i, j) = x(i + 4 * j);
}

}  // namespace

double QdParams::eta_mag_gn_per_m() const {
  return 3.0 * n_density_per_m3 * lambda_m * lambda_m * gamma1 /
         (4.0 * std::numbers::pi);
}

void QdParams::validate() const {
  if (!(gamma1 >= 0.0)) throw ValidationError("qd.gamma1_gn: must be >= 0");
  if (!(gamma2 >= 0.0)) throw ValidationError("qd.gamma2_gn: must be >= 0");
  if (!(gamma_d >= 0.0)) throw ValidationError("qd.gamma_d_gn: must be >= 0");
  if (!std::isfinite(delta_p)) throw ValidationError("qd.delta_p_gn: must be finite");
  if (!std::isfinite(delta_c)) throw ValidationError("qd.delta_c_gn: must be finite");
  if (!(n_density_per_m3 > 0.0))
    throw ValidationError("qd.n_density_per_m3: must be > 0");
  if (!(lambda_m > 0.0)) throw ValidationError("qd.lambda_m: must be > 0");
}

DriveOperators build_drive_operators(const FieldPoint& f) {
  Matrix4cd drive = Matrix4cd::Zero();
  drive(kX, kG) = f.omega_L;
  drive(kU, kX) = f.omega_1;
  drive(kU, kY) = f.omega_2;
  drive(kY, kG) = f.omega_R;
  DriveOperators ops;
  ops.x_g = drive + drive.adjoint();
  Matrix4cd idrive = cd(0.0, 1.0) * drive;
  ops.x_u = idrive + idrive.adjoint();
  return ops;
}

Matrix4cd build_hamiltonian(const QdParams& params, const FieldPoint& fields,
                            double b_mean) {
  Matrix4cd h = Matrix4cd::Zero();
  h(kX, kX) = -params.delta_p;
  h(kY, kY) = -params.delta_p;
  h(kU, kU) = -(params.delta_p + params.delta_c);
  h += b_mean * build_drive_operators(fields).x_g;
  return h;
}

Liouvillian build_lindblad(const QdParams& params) {
  Liouvillian l = Liouvillian::Zero();
  add_lindblad_channel(l, params.gamma1, sigma(kG, kX));
  add_lindblad_channel(l, params.gamma1, sigma(kG, kY));
  add_lindblad_channel(l, params.gamma2, sigma(kX, kU));
  add_lindblad_channel(l, params.gamma2, sigma(kY, kU));
  add_lindblad_channel(l, params.gamma_d, sigma(kX, kX));
  add_lindblad_channel(l, params.gamma_d, sigma(kY, kY));
  add_lindblad_channel(l, params.gamma_d, sigma(kU, kU));
  return l;
}

Liouvillian build_phonon_tcl(const Matrix4cd& h_s, const Matrix4cd& x_g,
                             const Matrix4cd& x_u, const HalfFourierTable& table) {
  Liouvillian l = Liouvillian::Zero();
  if (table.zero()) return l;
  Eigen::SelfAdjointEigenSolver<Matrix4cd> es;
  build_tcl_into(l, h_s, x_g, x_u, table, es);
  return l;
}

Liouvillian assemble_liouvillian(const QdParams& params, const FieldPoint& fields,
                                 double b_mean, const HalfFourierTable& table,
                                 bool tcl_bare_hs) {
  params.validate();
  Liouvillian l = build_lindblad(params);
  DriveOperators ops = build_drive_operators(fields);
  Matrix4cd h = build_hamiltonian(params, fields, b_mean);
  add_coherent(l, h);
  if (!table.zero()) {
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es;
    Matrix4cd h_tcl = tcl_bare_hs ? build_hamiltonian(params, FieldPoint{}, b_mean) : h;
    build_tcl_into(l, h_tcl, ops.x_g, ops.x_u, table, es);
  }
  return l;
}

Matrix4cd steady_state(const Liouvillian& l, const SteadyStateOptions& opts) {
  if (opts.check_null_space) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(l);
    const auto& s = svd.singularValues();
    if (s(14) <= 1e-10)
      throw NumericalError(
          "steady_state: degenerate null space, steady state is not unique");
  }
  Matrix4cd rho;
  solve_trace_constrained(l, rho);
  double me = min_eigenvalue(rho);
  if (me < -1e-6)
    throw NumericalError("steady_state: non-physical result, eigenvalue " +
                         std::to_string(me));
  return rho;
}

Matrix4cd time_evolve(const Liouvillian& l, const Matrix4cd& rho0, double t_final,
                      double dt) {
  if (!(t_final >= 0.0) || !(dt > 0.0))
    throw ValidationError("time_evolve: need t_final >= 0 and dt > 0");
  Vector16cd v = vec(rho0);
  double t = 0.0;
  Vector16cd k1, k2, k3, k4;
  while (t < t_final - 1e-15 * t_final) {
    double h = std::min(dt, t_final - t);
    k1 = l * v;
    k2 = l * (v + 0.5 * h * k1).eval();
    k3 = l * (v + 0.5 * h * k2).eval();
    k4 = l * (v + h * k3).eval();
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
  }
  Matrix4cd rho = unvec(v);
  if (trace_error(rho) > 1e-8 || hermiticity_error(rho) > 1e-8 ||
      min_eigenvalue(rho) < -1e-8)
    throw NumericalError("time_evolve: density-matrix invariants violated");
  return rho;
}

double trace_error(const Matrix4cd& rho) { return std::abs(rho.trace() - 1.0); }

double hermiticity_error(const Matrix4cd& rho) {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Matrix4cd& rho) {
  Matrix4cd h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix4cd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Vector16cd vec(const Matrix4cd& rho) {
  Vector16cd v;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) v(i + 4 * j) = rho(i, j);
  return v;
}

Matrix4cd unvec(const Vector16cd& v) {
  Matrix4cd m;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) m(i, j) = v(i + 4 * j);
  return m;
}

std::string liouvillian_to_json(const Liouvillian& l) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < 16; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < 16; ++j)
      row.push_back({{"re", l(i, j).real()}, {"im", l(i, j).imag()}});
    rows.push_back(row);
  }
  nlohmann::json j;
  j["shape"] = {16, 16};
  j["order"] = "row-major";
  j["vectorization"] = "column-major, v[i + 4 j] = rho(i, j), basis (g, x, y, u)";
  j["matrix"] = rows;
  return j.dump(2);
}

PointSolver::PointSolver(const QdParams& params, double b_mean,
                         const HalfFourierTable& table, bool tcl_bare_hs)
    : params_(params), b_mean_(b_mean), table_(&table), tcl_bare_hs_(tcl_bare_hs) {
  params.validate();
  lindblad_ = build_lindblad(params);
}

const Matrix4cd& PointSolver::solve(const FieldPoint& fields) {
  scratch_ = lindblad_;
  DriveOperators ops = build_drive_operators(fields);
  Matrix4cd h = Matrix4cd::Zero();
  h(kX, kX) = -params_.delta_p;
  h(kY, kY) = -params_.delta_p;
  h(kU, kU) = -(params_.delta_p + params_.delta_c);
  Matrix4cd h_bare = h;
  h += b_mean_ * ops.x_g;
  add_coherent(scratch_, h);
  if (!table_->zero())
    build_tcl_into(scratch_, tcl_bare_hs_ ? h_bare : h, ops.x_g, ops.x_u, *table_, es_);
  solve_trace_constrained(scratch_, rho_);
  trace_err_ = trace_error(rho_);
  herm_err_ = hermiticity_error(rho_);
  rho_es_.compute(0.5 * (rho_ + rho_.adjoint()), Eigen::EigenvaluesOnly);
  min_eig_ = rho_es_.eigenvalues().minCoeff();
  if (min_eig_ < -1e-6)
    throw NumericalError("steady_state: non-physical result, eigenvalue " +
                         std::to_string(min_eig_));
  return rho_;
}

}  // namespace qdvb
