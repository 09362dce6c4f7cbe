#include "qdvb/phonon_bath.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <nlohmann/json.hpp>

#include "qdvb/errors.hpp"
#include "qdvb/units.hpp"

namespace qdvb {
namespace {

using boost::math::quadrature::gauss_kronrod;
using cd = std::complex<double>;

constexpr double kQuadRelTol = 1e-9;
constexpr double kQuadRefineTol = 1e-11;  // refinement target handed to the quadrature
constexpr unsigned kQuadDepth = 12;

double coth_or_one(double x, bool zero_temperature) {
  if (zero_temperature) return 1.0;
  if (x < 1e-6) return 1.0 / x + x / 3.0;  // series; avoids 0/0 at w -> 0
  return 1.0 / std::tanh(x);
}

// J(w)/w^2 coth(w/2kT), finite at w = 0 for T > 0 and vanishing at T = 0.
double thermal_kernel(const PhononBath& bath, double omega) {
  double kt = thermal_energy_gn(bath.temperature_K);
  bool zero_t = kt <= 0.0;
  double g = bath.alpha_p * omega * std::exp(-omega * omega / (2.0 * bath.omega_b * bath.omega_b));
  return g * coth_or_one(zero_t ? 1.0 : omega / (2.0 * kt), zero_t);
}

// `scale` is an a-priori magnitude of the integrand mass; oscillatory
// integrals cancel to values far below it, so convergence is judged against
// max(|v|, scale) rather than the (possibly vanishing) value itself.
template <typename F>
double integrate_checked(F f, double a, double b, double scale, const char* what) {
  double err = 0.0;
  double v =
      gauss_kronrod<double, 31>::integrate(f, a, b, kQuadDepth, kQuadRefineTol, &err);
  if (!(std::isfinite(v)) || err > kQuadRelTol * std::max(std::abs(v), scale) + 1e-14)
    throw NumericalError(std::string(what) + ": quadrature did not converge");
  return v;
}

// Upper bound on |int J/w^2 [coth or 1] e^{+-iwt} dw|: the T = 0 part
// integrates to alpha_p w_b^2 exactly and the thermal excess is bounded by
// 2 kT alpha_p w_b sqrt(pi/2).
double kernel_mass(const PhononBath& bath) {
  double kt = thermal_energy_gn(bath.temperature_K);
  return bath.alpha_p * bath.omega_b *
         (bath.omega_b + 2.0 * kt * std::sqrt(std::numbers::pi / 2.0));
}

void write_f64(std::ofstream& f, double v) {
  static_assert(std::endian::native == std::endian::little,
                "table format is little-endian");
  f.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

double read_f64(std::ifstream& f) {
  double v = 0.0;
  f.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

void PhononBath::validate() const {
  if (!(alpha_p >= 0.0)) throw ValidationError("bath.alpha_p_invgn2: must be >= 0");
  if (!(omega_b > 0.0)) throw ValidationError("bath.omega_b_gn: must be > 0");
  if (!(temperature_K >= 0.0)) throw ValidationError("bath.temperature_K: must be >= 0");
}

double spectral_density(const PhononBath& bath, double omega) {
  bath.validate();
  if (omega < 0.0) throw ValidationError("spectral_density: omega must be >= 0");
  if (!bath.enabled) return 0.0;
  return bath.alpha_p * omega * omega * omega *
         std::exp(-omega * omega / (2.0 * bath.omega_b * bath.omega_b));
}

double franck_condon(const PhononBath& bath) {
  bath.validate();
  if (!bath.enabled || bath.alpha_p == 0.0) return 1.0;
  double wmax = 8.0 * bath.omega_b;
  auto f = [&](double w) { return thermal_kernel(bath, w); };
  double integral = integrate_checked(f, 0.0, wmax, 0.0, "franck_condon");
  // Gaussian cutoff: anything past 8 w_b is far below the tolerance, but the
  // convergence contract is on refinement, so compare against a wider window.
  double wide = integrate_checked(f, 0.0, 12.0 * bath.omega_b, 0.0, "franck_condon");
  if (std::abs(wide - integral) > kQuadRelTol * std::abs(wide) + 1e-14)
    throw NumericalError("franck_condon: tail not converged");
  return std::exp(-0.5 * wide);
}

std::complex<double> correlation_phi(const PhononBath& bath, double tau) {
  bath.validate();
  if (tau < 0.0) throw ValidationError("correlation_phi: tau must be >= 0");
  if (!bath.enabled || bath.alpha_p == 0.0) return {0.0, 0.0};
  double wmax = 12.0 * bath.omega_b;
  double scale = kernel_mass(bath);
  double re = integrate_checked(
      [&](double w) { return thermal_kernel(bath, w) * std::cos(w * tau); }, 0.0, wmax,
      scale, "correlation_phi");
  double im = -integrate_checked(
      [&](double w) {
        double g = bath.alpha_p * w *
                   std::exp(-w * w / (2.0 * bath.omega_b * bath.omega_b));
        return g * std::sin(w * tau);
      },
      0.0, wmax, scale, "correlation_phi");
  return {re, im};
}

GreenPair green_functions(const PhononBath& bath, double tau) {
  if (!bath.enabled || bath.alpha_p == 0.0) return {{0.0, 0.0}, {0.0, 0.0}};
  double b = franck_condon(bath);
  cd phi = correlation_phi(bath, tau);
  double b2 = b * b;
  return {b2 * (std::cosh(phi) - 1.0), b2 * std::sinh(phi)};
}

HalfFourierTable HalfFourierTable::build(const PhononBath& bath, double delta_max,
                                         int n_points) {
  bath.validate();
  if (!(delta_max > 0.0)) throw ValidationError("table.delta_max_gn: must be > 0");
  if (n_points < 4) throw ValidationError("table.n_points: must be >= 4");

  HalfFourierTable t;
  t.bath_ = bath;
  t.dmin_ = -delta_max;
  t.dmax_ = delta_max;
  t.step_ = 2.0 * delta_max / (n_points - 1);
  t.kg_.assign(n_points, {0.0, 0.0});
  t.ku_.assign(n_points, {0.0, 0.0});
  t.zero_ = !bath.enabled || bath.alpha_p == 0.0;
  if (t.zero_) return t;

  // Green functions live on the phonon correlation time ~ 1/omega_b; walk out
  // until |phi| stays below 1e-10, then integrate on a uniform Simpson grid.
  double probe = 0.5 / bath.omega_b;
  double tau_max = 0.0;
  int quiet = 0;
  for (int k = 1; k <= 400; ++k) {
    if (std::abs(correlation_phi(bath, k * probe)) < 1e-10) {
      if (++quiet == 3) {
        tau_max = (k + 1) * probe;
        break;
      }
    } else {
      quiet = 0;
    }
  }
  if (tau_max == 0.0)
    throw NumericalError("half_fourier_table: correlation function did not decay");
  t.tau_max_ = tau_max;

  int n_tau = 4801;  // odd, for Simpson
  t.n_tau_ = n_tau;
  double dtau = tau_max / (n_tau - 1);
  double b = franck_condon(bath);
  double b2 = b * b;
  std::vector<cd> gg(n_tau), gu(n_tau);
  for (int k = 0; k < n_tau; ++k) {
    cd phi = correlation_phi(bath, k * dtau);
    gg[k] = b2 * (std::cosh(phi) - 1.0);
    gu[k] = b2 * std::sinh(phi);
  }

  auto half_fourier = [&](const std::vector<cd>& g, double delta) {
    cd acc{0.0, 0.0};
    for (int k = 0; k < n_tau; ++k) {
      double w = (k == 0 || k == n_tau - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      acc += w * g[k] * std::polar(1.0, delta * k * dtau);
    }
    return acc * (dtau / 3.0);
  };

  for (int i = 0; i < n_points; ++i) {
    double delta = t.dmin_ + i * t.step_;
    t.kg_[i] = half_fourier(gg, delta);
    t.ku_[i] = half_fourier(gu, delta);
  }
  return t;
}

std::complex<double> HalfFourierTable::interp(const std::vector<cd>& a,
                                              double delta) const {
  if (a.empty()) throw NumericalError("half_fourier_table: empty table");
  if (delta < dmin_ || delta > dmax_)
    throw NumericalError("half_fourier_table: delta " + std::to_string(delta) +
                         " outside tabulated range [" + std::to_string(dmin_) + ", " +
                         std::to_string(dmax_) + "]");
  int n = static_cast<int>(a.size());
  double s = (delta - dmin_) / step_;
  int i = static_cast<int>(s);
  if (i > n - 2) i = n - 2;
  int i0 = i - 1;
  if (i0 < 0) i0 = 0;
  if (i0 > n - 4) i0 = n - 4;
  // Lagrange cubic on the four nearest grid points.
  double x = s - i0;
  double c0 = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
  double c1 = x * (x - 2.0) * (x - 3.0) / 2.0;
  double c2 = -x * (x - 1.0) * (x - 3.0) / 2.0;
  double c3 = x * (x - 1.0) * (x - 2.0) / 6.0;
  return c0 * a[i0] + c1 * a[i0 + 1] + c2 * a[i0 + 2] + c3 * a[i0 + 3];
}

void HalfFourierTable::dump(const std::string& prefix) const {
  if (kg_.empty()) throw IoError("half_fourier_table: nothing to dump");
  std::ofstream bin(prefix + ".bin", std::ios::binary);
  if (!bin) throw IoError("cannot write " + prefix + ".bin");
  auto block = [&](const std::vector<cd>& a) {
    for (int i = 0; i < static_cast<int>(a.size()); ++i) {
      write_f64(bin, dmin_ + i * step_);
      write_f64(bin, a[i].real());
      write_f64(bin, a[i].imag());
    }
  };
  block(kg_);
  block(ku_);
  bin.close();
  if (!bin) throw IoError("write failed: " + prefix + ".bin");

  nlohmann::json j;
  j["format"] = "qdvb-halffourier-v1";
  j["layout"] = "float64le triplets (delta_gn, re, im); K_g block then K_u block";
  j["n_points"] = n_points();
  j["delta_min_gn"] = dmin_;
  j["delta_max_gn"] = dmax_;
  j["tau_max_invgn"] = tau_max_;
  j["n_tau"] = n_tau_;
  j["interpolation"] = "cubic";
  j["bath"] = {{"alpha_p_invgn2", bath_.alpha_p},
               {"omega_b_gn", bath_.omega_b},
               {"temperature_K", bath_.temperature_K},
               {"enabled", bath_.enabled}};
  j["tolerances"] = {{"quadrature_rel", kQuadRelTol}, {"interp_rel", 1e-6}};
  std::ofstream side(prefix + ".json");
  if (!side) throw IoError("cannot write " + prefix + ".json");
  side << j.dump(2) << "\n";
}

HalfFourierTable HalfFourierTable::load(const std::string& prefix) {
  std::ifstream side(prefix + ".json");
  if (!side) throw IoError("cannot read " + prefix + ".json");
  nlohmann::json j;
  try {
    side >> j;
  } catch (const std::exception& e) {
    throw IoError("bad sidecar " + prefix + ".json: " + e.what());
  }
  if (j.value("format", "") != "qdvb-halffourier-v1")
    throw IoError(prefix + ".json: unknown format");

  HalfFourierTable t;
  int n = j.at("n_points").get<int>();
  t.dmin_ = j.at("delta_min_gn").get<double>();
  t.dmax_ = j.at("delta_max_gn").get<double>();
  t.tau_max_ = j.at("tau_max_invgn").get<double>();
  t.n_tau_ = j.at("n_tau").get<int>();
  t.bath_.alpha_p = j.at("bath").at("alpha_p_invgn2").get<double>();
  t.bath_.omega_b = j.at("bath").at("omega_b_gn").get<double>();
  t.bath_.temperature_K = j.at("bath").at("temperature_K").get<double>();
  t.bath_.enabled = j.at("bath").at("enabled").get<bool>();
  if (n < 4) throw IoError(prefix + ".json: bad n_points");
  t.step_ = (t.dmax_ - t.dmin_) / (n - 1);

  std::ifstream bin(prefix + ".bin", std::ios::binary);
  if (!bin) throw IoError("cannot read " + prefix + ".bin");
  auto block = [&](std::vector<cd>& a) {
    a.resize(n);
    for (int i = 0; i < n; ++i) {
      double d = read_f64(bin);
      double re = read_f64(bin);
      double im = read_f64(bin);
      if (!bin) throw IoError(prefix + ".bin: truncated");
      if (std::abs(d - (t.dmin_ + i * t.step_)) > 1e-12 * (1.0 + std::abs(d)))
        throw IoError(prefix + ".bin: delta grid mismatch at row " + std::to_string(i));
      a[i] = {re, im};
    }
  };
  block(t.kg_);
  block(t.ku_);
  t.zero_ = true;
  for (const auto& v : t.kg_)
    if (v != cd{0.0, 0.0}) t.zero_ = false;
  for (const auto& v : t.ku_)
    if (v != cd{0.0, 0.0}) t.zero_ = false;
  return t;
}

}  // namespace qdvb
