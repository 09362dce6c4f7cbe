#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "qdvb/propagation.hpp"
#include "qdvb/structured_light.hpp"

namespace qdvb::io {

// Grid binaries are little-endian float64 row-major (index = iy * nx + ix,
// x to the right, y up); complex grids interleave (re, im). Each `prefix.bin`
// ships with a `prefix.json` sidecar carrying geometry, units, and any
// caller-supplied metadata.
void write_real_grid(const std::string& prefix, const RealGrid& grid,
                     const nlohmann::json& meta);
RealGrid read_real_grid(const std::string& prefix);

void write_complex_grid(const std::string& prefix, const ComplexGrid& grid,
                        const nlohmann::json& meta);
ComplexGrid read_complex_grid(const std::string& prefix);

void write_line_cut_csv(const std::string& path, const LineCut& cut, char axis);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace qdvb::io
