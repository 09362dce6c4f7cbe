#include "qdvb/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "qdvb/errors.hpp"

namespace qdvb::io {
namespace {

static_assert(std::endian::native == std::endian::little,
              "grid binaries are defined little-endian");
static_assert(sizeof(double) == 8);

void write_bytes(const std::string& path, const void* data, size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw IoError("short write: " + path);
}

std::vector<double> read_doubles(const std::string& path, size_t expect) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<double> buf(expect);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(expect * sizeof(double)));
  if (static_cast<size_t>(in.gcount()) != expect * sizeof(double))
    throw IoError("short read: " + path);
  char extra;
  if (in.read(&extra, 1)) throw IoError("trailing bytes: " + path);
  return buf;
}

nlohmann::json grid_sidecar(const TransverseGrid& g, const std::string& kind,
                            const nlohmann::json& meta) {
  nlohmann::json j{
      {"format", "qdvb-grid-v1"},
      {"kind", kind},
      {"nx", g.nx},
      {"ny", g.ny},
      {"extent_w", g.extent},
      {"dx_w", g.dx()},
      {"dy_w", g.dy()},
      {"layout", "row-major, index = iy*nx + ix; x right, y up"},
      {"length_unit", "probe waist w"},
  };
  j.update(meta);
  return j;
}

void write_sidecar(const std::string& prefix, const nlohmann::json& j) {
  write_text_file(prefix + ".json", j.dump(2) + "\n");
}

nlohmann::json read_sidecar(const std::string& prefix, const std::string& kind) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(prefix + ".json"));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(prefix + ".json: " + e.what());
  }
  if (j.value("format", "") != "qdvb-grid-v1")
    throw IoError(prefix + ".json: not a qdvb-grid-v1 sidecar");
  if (j.value("kind", "") != kind)
    throw IoError(prefix + ".json: expected kind " + kind);
  return j;
}

TransverseGrid sidecar_grid(const nlohmann::json& j) {
  TransverseGrid g;
  g.nx = j.at("nx").get<int>();
  g.ny = j.at("ny").get<int>();
  g.extent = j.at("extent_w").get<double>();
  g.validate();
  return g;
}

}  // namespace

void write_real_grid(const std::string& prefix, const RealGrid& grid,
                     const nlohmann::json& meta) {
  write_bytes(prefix + ".bin", grid.v.data(), grid.v.size() * sizeof(double));
  write_sidecar(prefix, grid_sidecar(grid.grid, "float64", meta));
}

RealGrid read_real_grid(const std::string& prefix) {
  auto j = read_sidecar(prefix, "float64");
  RealGrid g(sidecar_grid(j));
  g.v = read_doubles(prefix + ".bin", g.v.size());
  return g;
}

void write_complex_grid(const std::string& prefix, const ComplexGrid& grid,
                        const nlohmann::json& meta) {
  static_assert(sizeof(std::complex<double>) == 16);
  write_bytes(prefix + ".bin", grid.v.data(),
              grid.v.size() * sizeof(std::complex<double>));
  write_sidecar(prefix, grid_sidecar(grid.grid, "complex128_interleaved", meta));
}

ComplexGrid read_complex_grid(const std::string& prefix) {
  auto j = read_sidecar(prefix, "complex128_interleaved");
  ComplexGrid g(sidecar_grid(j));
  auto flat = read_doubles(prefix + ".bin", 2 * g.v.size());
  std::memcpy(g.v.data(), flat.data(), flat.size() * sizeof(double));
  return g;
}

void write_line_cut_csv(const std::string& path, const LineCut& cut, char axis) {
  if (cut.coord.size() != cut.intensity_l.size() ||
      cut.coord.size() != cut.intensity_r.size())
    throw ValidationError("line cut arrays disagree in length");
  std::ostringstream out;
  out.precision(17);
  out << (axis == 'y' ? "y_over_w" : "x_over_w")
      << ",intensity_L_over_I0,intensity_R_over_I0\n";
  for (size_t i = 0; i < cut.coord.size(); ++i)
    out << cut.coord[i] << ',' << cut.intensity_l[i] << ','
        << cut.intensity_r[i] << '\n';
  write_text_file(path, out.str());
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("short write: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace qdvb::io
