#pragma once

#include <complex>
#include <string>
#include <vector>

namespace qdvb {

// Super-Ohmic acoustic-phonon bath J(w) = alpha_p w^3 exp(-w^2 / 2 w_b^2),
// frequencies in gamma_n. `enabled = false` switches the bath off entirely:
// <B> = 1, phi = 0, G_g = G_u = 0.
struct PhononBath {
  double alpha_p = 1.42e-3;   // gamma_n^-2
  double omega_b = 10.0;      // gamma_n
  double temperature_K = 5.0;
  bool enabled = true;

  bool operator==(const PhononBath&) const = default;
  void validate() const;  // throws ValidationError
};

double spectral_density(const PhononBath& bath, double omega);

// Franck-Condon factor <B> = exp(-1/2 int J/w^2 coth(w/2kT) dw), in (0, 1].
double franck_condon(const PhononBath& bath);

// phi(tau) = int J/w^2 [coth(w/2kT) cos(w tau) - i sin(w tau)] dw.
std::complex<double> correlation_phi(const PhononBath& bath, double tau);

struct GreenPair {
  std::complex<double> g;  // <B>^2 (cosh phi - 1)
  std::complex<double> u;  // <B>^2 sinh phi
};
GreenPair green_functions(const PhononBath& bath, double tau);

// Precomputed half-Fourier transforms K_j(delta) = int_0^inf G_j(tau)
// e^{i delta tau} dtau on a uniform delta grid, cubic-interpolated at lookup.
// Lookups outside [delta_min, delta_max] throw; there is no extrapolation.
class HalfFourierTable {
 public:
  HalfFourierTable() = default;

  static HalfFourierTable build(const PhononBath& bath, double delta_max = 20.0,
                                int n_points = 4001);

  std::complex<double> k_g(double delta) const { return interp(kg_, delta); }
  std::complex<double> k_u(double delta) const { return interp(ku_, delta); }

  bool zero() const { return zero_; }
  int n_points() const { return static_cast<int>(kg_.size()); }
  double delta_min() const { return dmin_; }
  double delta_max() const { return dmax_; }
  double tau_max() const { return tau_max_; }
  const PhononBath& bath() const { return bath_; }

  // `prefix.bin` holds float64 little-endian (delta, Re K, Im K) triplets,
  // the K_g block followed by the K_u block; `prefix.json` is the sidecar.
  void dump(const std::string& prefix) const;
  static HalfFourierTable load(const std::string& prefix);

 private:
  std::complex<double> interp(const std::vector<std::complex<double>>& a,
                              double delta) const;

  std::vector<std::complex<double>> kg_, ku_;
  double dmin_ = 0.0, dmax_ = 0.0, step_ = 0.0;
  double tau_max_ = 0.0;
  int n_tau_ = 0;
  bool zero_ = true;
  PhononBath bath_{};
};

}  // namespace qdvb
