#include "qdvb/render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "qdvb/errors.hpp"
#include "qdvb/io.hpp"

namespace qdvb::render {
namespace {

constexpr double kPi = 3.14159265358979323846;

// viridis sampled at 16 evenly spaced stops.
constexpr unsigned char kViridis16[16][3] = {
    {0x44, 0x01, 0x54}, {0x48, 0x18, 0x6a}, {0x47, 0x2d, 0x7b},
    {0x42, 0x40, 0x86}, {0x3b, 0x52, 0x8b}, {0x33, 0x63, 0x8d},
    {0x2c, 0x72, 0x8e}, {0x26, 0x82, 0x8e}, {0x21, 0x91, 0x8c},
    {0x1f, 0xa0, 0x88}, {0x28, 0xae, 0x80}, {0x3f, 0xbc, 0x73},
    {0x5e, 0xc9, 0x62}, {0x84, 0xd4, 0x4b}, {0xad, 0xdc, 0x30},
    {0xfd, 0xe7, 0x25}};

void viridis(double t, unsigned char* rgb) {
  t = std::clamp(t, 0.0, 1.0) * 15.0;
  int i = std::min(static_cast<int>(t), 14);
  double f = t - i;
  for (int c = 0; c < 3; ++c) {
    double v = kViridis16[i][c] + f * (kViridis16[i + 1][c] - kViridis16[i][c]);
    rgb[c] = static_cast<unsigned char>(std::lround(v));
  }
}

void write_png_rgb(const std::string& path, int nx, int ny,
                   const std::vector<unsigned char>& pixels) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw IoError("cannot open for writing: " + path);

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  std::vector<png_bytep> rows(ny);
  for (int iy = 0; iy < ny; ++iy)
    rows[iy] = const_cast<png_bytep>(&pixels[static_cast<size_t>(iy) * nx * 3]);

  bool failed = !info;
  if (!failed && setjmp(png_jmpbuf(png))) failed = true;
  if (!failed) {
    png_init_io(png, fp);
    png_set_IHDR(png, info, nx, ny, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, info);
  }
  png_destroy_write_struct(&png, info ? &info : nullptr);
  bool closed = std::fclose(fp) == 0;
  if (failed || !closed) throw IoError("png write failed: " + path);
}

}  // namespace

void write_png_heatmap(const std::string& path, const RealGrid& field) {
  const auto& g = field.grid;
  double vmax = 0.0;
  for (double v : field.v) vmax = std::max(vmax, v);
  double scale = vmax > 0.0 ? 1.0 / vmax : 0.0;

  std::vector<unsigned char> pixels(static_cast<size_t>(g.nx) * g.ny * 3);
  for (int iy = 0; iy < g.ny; ++iy) {
    int row = g.ny - 1 - iy;  // row 0 of the image is y = +extent
    for (int ix = 0; ix < g.nx; ++ix)
      viridis(field.at(iy, ix) * scale,
              &pixels[(static_cast<size_t>(row) * g.nx + ix) * 3]);
  }
  write_png_rgb(path, g.nx, g.ny, pixels);

  io::write_text_file(path + ".json",
                      nlohmann::json{{"format", "qdvb-render-v1"},
                                     {"kind", "png_heatmap"},
                                     {"colormap", "viridis16"},
                                     {"value_min", 0.0},
                                     {"value_max", vmax},
                                     {"nx", g.nx},
                                     {"ny", g.ny},
                                     {"extent_w", g.extent},
                                     {"x_right", true},
                                     {"y_up", true}}
                              .dump(2) +
                          "\n");
}

void write_svg_ellipses(const std::string& path, const EllipseField& field,
                        int stride) {
  if (stride < 1) throw ValidationError("svg stride must be positive");
  const auto& g = field.chi.grid;
  // Offset so the lattice is symmetric and hits the center pixel when it can.
  int ox = ((g.nx - 1) % stride) / 2;
  int oy = ((g.ny - 1) % stride) / 2;
  double size = 0.42 * stride;

  char buf[256];
  std::ostringstream svg;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 %d %d\" "
                "width=\"%d\" height=\"%d\">\n",
                g.nx, g.ny, 4 * g.nx, 4 * g.ny);
  svg << buf;
  std::snprintf(buf, sizeof buf,
                "<rect width=\"%d\" height=\"%d\" fill=\"#101014\"/>\n", g.nx,
                g.ny);
  svg << buf;
  svg << "<g fill=\"none\" stroke-width=\"1.1\" opacity=\"0.9\">\n";

  for (int iy = oy; iy < g.ny; iy += stride)
    for (int ix = ox; ix < g.nx; ix += stride) {
      if (!field.mask[static_cast<size_t>(iy) * g.nx + ix]) continue;
      double chi = field.chi.at(iy, ix);
      double psi = field.psi.at(iy, ix);
      double rx = size;
      double ry = std::max(size * std::abs(std::tan(chi)), 0.06 * size);
      const char* color = chi > kPi / 8 ? "#3b6ff0"
                          : chi < -kPi / 8 ? "#e03a3a"
                                           : "#ffffff";
      double cx = ix;
      double cy = g.ny - 1 - iy;  // image y runs downward
      std::snprintf(buf, sizeof buf,
                    "<ellipse cx=\"%.2f\" cy=\"%.2f\" rx=\"%.2f\" ry=\"%.2f\" "
                    "stroke=\"%s\" transform=\"rotate(%.2f %.2f %.2f)\"/>\n",
                    cx, cy, rx, ry, color, -psi * 180.0 / kPi, cx, cy);
      svg << buf;
    }
  svg << "</g>\n</svg>\n";
  io::write_text_file(path, svg.str());
}

}  // namespace qdvb::render
