#include "qdvb/structured_light.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qdvb/errors.hpp"

namespace qdvb {
namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Bilinear interpolation in grid coordinates; callers keep (x, y) inside.
cd sample_bilinear(const ComplexGrid& e, double x, double y) {
  const TransverseGrid& g = e.grid;
  double fx = (x + g.extent) / g.dx();
  double fy = (y + g.extent) / g.dy();
  int ix = std::clamp(static_cast<int>(std::floor(fx)), 0, g.nx - 2);
  int iy = std::clamp(static_cast<int>(std::floor(fy)), 0, g.ny - 2);
  double tx = fx - ix, ty = fy - iy;
  return (1 - tx) * (1 - ty) * e.at(iy, ix) + tx * (1 - ty) * e.at(iy, ix + 1) +
         (1 - tx) * ty * e.at(iy + 1, ix) + tx * ty * e.at(iy + 1, ix + 1);
}

}  // namespace

void TransverseGrid::validate() const {
  if (nx < 3 || ny < 3 || nx % 2 == 0 || ny % 2 == 0)
    throw ValidationError("grid.nx/grid.ny: must be odd and >= 3");
  if (!(extent > 0.0)) throw ValidationError("grid.extent_w: must be > 0");
}

void LgInputSpec::validate(const std::string& path) const {
  if (!(waist > 0.0)) throw ValidationError(path + ": waist must be > 0");
  if (!std::isfinite(amplitude) || !std::isfinite(phase))
    throw ValidationError(path + ": amplitude/phase must be finite");
}

ComplexGrid lg_input_profile(const LgInputSpec& spec, const TransverseGrid& grid) {
  grid.validate();
  spec.validate("lg_input_profile");
  ComplexGrid out(grid);
  int al = std::abs(spec.oam);
  for (int iy = 0; iy < grid.ny; ++iy) {
    double y = grid.y(iy);
    for (int ix = 0; ix < grid.nx; ++ix) {
      double x = grid.x(ix);
      double r = std::hypot(x, y);
      double phi = std::atan2(y, x);
      double amp = spec.amplitude * std::pow(r * std::numbers::sqrt2 / spec.waist, al) *
                   std::exp(-r * r / (spec.waist * spec.waist));
      out.at(iy, ix) = std::polar(amp, spec.oam * phi + spec.phase);
    }
  }
  return out;
}

std::complex<double> lg_full_mode(double amplitude, int l, double waist,
                                  double wavenumber, double refractive_index,
                                  double r, double phi, double z) {
  if (!(waist > 0.0) || !(wavenumber > 0.0) || !(refractive_index > 0.0))
    throw ValidationError("lg_full_mode: waist, wavenumber, index must be > 0");
  int al = std::abs(l);
  double zr = wavenumber * waist * waist / 2.0;
  double nzr = refractive_index * zr;
  double wz = waist * std::sqrt(1.0 + (z * z) / (nzr * nzr));
  double norm = std::sqrt(2.0 / (kPi * factorial(al)));
  double amp = amplitude * norm * std::pow(r * std::numbers::sqrt2 / wz, al) *
               std::exp(-r * r / (wz * wz));
  double curvature =
      z == 0.0 ? 0.0
               : wavenumber * refractive_index * r * r * z / (2.0 * (z * z + nzr * nzr));
  double gouy = (al + 1) * std::atan(z / nzr);
  double phase = curvature + l * phi - gouy + wavenumber * refractive_index * z;
  return std::polar(amp, phase);
}

StokesField stokes(const ComplexGrid& e_l, const ComplexGrid& e_r) {
  if (!(e_l.grid == e_r.grid)) throw ValidationError("stokes: grid shape mismatch");
  StokesField s{RealGrid(e_l.grid), RealGrid(e_l.grid), RealGrid(e_l.grid),
                RealGrid(e_l.grid)};
  for (size_t i = 0; i < e_l.v.size(); ++i) {
    double il = std::norm(e_l.v[i]);
    double ir = std::norm(e_r.v[i]);
    cd cross = std::conj(e_l.v[i]) * e_r.v[i];
    s.s0.v[i] = il + ir;
    s.s1.v[i] = 2.0 * cross.real();
    s.s2.v[i] = 2.0 * cross.imag();
    s.s3.v[i] = il - ir;
  }
  return s;
}

EllipseField ellipse_field(const StokesField& s, double floor_rel) {
  double smax = *std::max_element(s.s0.v.begin(), s.s0.v.end());
  if (!(smax > 0.0)) throw NumericalError("ellipse_field: all-dark frame, empty mask");
  double floor = floor_rel * smax;
  EllipseField e{RealGrid(s.s0.grid), RealGrid(s.s0.grid),
                 std::vector<std::uint8_t>(s.s0.v.size(), 0)};
  for (size_t i = 0; i < s.s0.v.size(); ++i) {
    double s0 = s.s0.v[i];
    if (!(s0 > floor)) continue;
    e.mask[i] = 1;
    double ratio = std::clamp(s.s3.v[i] / s0, -1.0, 1.0);
    e.chi.v[i] = 0.5 * std::asin(ratio);
    double psi = 0.5 * std::atan2(s.s2.v[i], s.s1.v[i]);
    if (psi <= -kPi / 2.0) psi += kPi;  // reduce to (-pi/2, pi/2]
    e.psi.v[i] = psi;
  }
  return e;
}

std::string to_string(VbLabel label) {
  switch (label) {
    case VbLabel::lemon: return "lemon";
    case VbLabel::star: return "star";
    case VbLabel::web: return "web";
    case VbLabel::radial: return "radial";
    case VbLabel::azimuthal: return "azimuthal";
    case VbLabel::spiral: return "spiral";
    case VbLabel::other: return "other";
  }
  return "other";
}

VbLabel vb_classify(const ComplexGrid& e_l, const ComplexGrid& e_r, int l_l, int l_r,
                    double theta_rel) {
  if (!(e_l.grid == e_r.grid)) throw ValidationError("vb_classify: grid mismatch");
  if (l_l == 0) {
    if (l_r == 1) return VbLabel::lemon;
    if (l_r == -1) return VbLabel::star;
    if (l_r == -3) return VbLabel::web;
  }
  if (l_l != 0 && l_r == -l_l) {
    double t = std::fmod(theta_rel, 2.0 * kPi);
    if (t < 0.0) t += 2.0 * kPi;
    auto near = [&](double target) {
      return std::abs(t - target) < 1e-6 ||
             std::abs(t - target - 2.0 * kPi) < 1e-6;
    };
    if (near(0.0)) return VbLabel::radial;
    if (near(kPi)) return VbLabel::azimuthal;
    if (near(kPi / 2.0)) return VbLabel::spiral;
  }
  return VbLabel::other;
}

int phase_winding(const ComplexGrid& e, double radius) {
  e.grid.validate();
  if (!(radius > 0.0) || radius > e.grid.extent)
    throw ValidationError("phase_winding: radius must lie inside the grid");
  double frame_max = std::sqrt(max_abs2(e));
  double floor = 1e-12 * frame_max;

  constexpr int kSamples = 720;
  std::vector<cd> ring;
  ring.reserve(kSamples);
  int bright = 0;
  for (int k = 0; k < kSamples; ++k) {
    double a = 2.0 * kPi * k / kSamples;
    cd z = sample_bilinear(e, radius * std::cos(a), radius * std::sin(a));
    ring.push_back(z);
    if (std::abs(z) > floor) ++bright;
  }
  if (bright < static_cast<int>(0.95 * kSamples))
    throw NumericalError("phase_winding: ring too dark, winding undefined");

  double total = 0.0;
  cd prev = ring[0];
  for (int k = 1; k <= kSamples; ++k) {
    cd cur = ring[k % kSamples];
    if (std::abs(cur) <= floor) continue;  // rare dark sample, bridge over it
    if (std::abs(prev) > floor) total += std::arg(cur / prev);
    prev = cur;
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

double max_abs2(const ComplexGrid& e) {
  double m = 0.0;
  for (const auto& z : e.v) m = std::max(m, std::norm(z));
  return m;
}

}  // namespace qdvb
