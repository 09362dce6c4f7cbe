#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace qdvb {

// Square-ish transverse grid, odd point counts so the origin lands on a grid
// point; coordinates in units of the common beam waist w.
struct TransverseGrid {
  int nx = 201;
  int ny = 201;
  double extent = 3.0;  // half-width

  double dx() const { return 2.0 * extent / (nx - 1); }
  double dy() const { return 2.0 * extent / (ny - 1); }
  double x(int ix) const { return -extent + ix * dx(); }
  double y(int iy) const { return -extent + iy * dy(); }
  int size() const { return nx * ny; }
  bool operator==(const TransverseGrid&) const = default;
  void validate() const;  // throws ValidationError
};

// Row-major scalar fields over a TransverseGrid, index = iy * nx + ix.
struct ComplexGrid {
  TransverseGrid grid;
  std::vector<std::complex<double>> v;

  explicit ComplexGrid(const TransverseGrid& g = {})
      : grid(g), v(static_cast<size_t>(g.nx) * g.ny) {}
  std::complex<double>& at(int iy, int ix) { return v[static_cast<size_t>(iy) * grid.nx + ix]; }
  const std::complex<double>& at(int iy, int ix) const {
    return v[static_cast<size_t>(iy) * grid.nx + ix];
  }
};

struct RealGrid {
  TransverseGrid grid;
  std::vector<double> v;

  explicit RealGrid(const TransverseGrid& g = {})
      : grid(g), v(static_cast<size_t>(g.nx) * g.ny, 0.0) {}
  double& at(int iy, int ix) { return v[static_cast<size_t>(iy) * grid.nx + ix]; }
  const double& at(int iy, int ix) const { return v[static_cast<size_t>(iy) * grid.nx + ix]; }
};

struct LgInputSpec {
  double amplitude = 0.0;  // Omega_0, gamma_n
  int oam = 0;             // l
  double waist = 1.0;      // units of the common waist w
  double phase = 0.0;      // theta, radians

  void validate(const std::string& path) const;
};

// Omega_0 (r sqrt2 / w_i)^{|l|} exp(-r^2/w_i^2) exp(i (l phi + theta)).
ComplexGrid lg_input_profile(const LgInputSpec& spec, const TransverseGrid& grid);

// Full free-space LG_0^l mode with curvature, Gouy phase, and the
// sqrt(2 / pi |l|!) normalization; w(z) = w0 sqrt(1 + z^2 / (n z_R)^2),
// z_R = k w0^2 / 2.
std::complex<double> lg_full_mode(double amplitude, int l, double waist,
                                  double wavenumber, double refractive_index,
                                  double r, double phi, double z);

struct StokesField {
  RealGrid s0, s1, s2, s3;
};

// Circular-basis Stokes parameters: S0 = |E_L|^2 + |E_R|^2,
// S1 = 2 Re(E_L* E_R), S2 = 2 Im(E_L* E_R), S3 = |E_L|^2 - |E_R|^2.
StokesField stokes(const ComplexGrid& e_l, const ComplexGrid& e_r);

struct EllipseField {
  RealGrid chi;               // ellipticity, [-pi/4, pi/4]
  RealGrid psi;               // orientation, (-pi/2, pi/2]
  std::vector<std::uint8_t> mask;  // 1 where S0 is above the dark floor
};

EllipseField ellipse_field(const StokesField& s, double floor_rel = 1e-12);

enum class VbLabel { lemon, star, web, radial, azimuthal, spiral, other };
std::string to_string(VbLabel label);

// Rule-based taxonomy on the synthesis inputs; the measured peak ratio is
// reported alongside but does not enter the rules.
VbLabel vb_classify(const ComplexGrid& e_l, const ComplexGrid& e_r, int l_l, int l_r,
                    double theta_rel);

// Total unwrapped phase around a centered ring, divided by 2 pi. Throws when
// more than 5% of the ring samples sit below the intensity floor.
int phase_winding(const ComplexGrid& e, double radius);

double max_abs2(const ComplexGrid& e);

}  // namespace qdvb
