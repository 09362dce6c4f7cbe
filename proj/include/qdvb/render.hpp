#pragma once

#include <string>

#include "qdvb/structured_light.hpp"

namespace qdvb::render {

// 8-bit RGB PNG of a scalar field, viridis16 ramp over [0, max(field)]
// (all-zero frames map to the ramp bottom). Row 0 of the image is y = +extent,
// so the picture is the beam seen along +z with x to the right and y up.
// A `path + ".json"` sidecar records the colormap, range, and orientation.
void write_png_heatmap(const std::string& path, const RealGrid& field);

// Standalone SVG of polarization-ellipse glyphs on a decimated lattice
// (every `stride`-th pixel per axis). Glyph color encodes the ellipticity
// sign: blue chi > +pi/8, red chi < -pi/8, white otherwise; dark pixels are
// skipped via the mask.
void write_svg_ellipses(const std::string& path, const EllipseField& field,
                        int stride = 12);

}  // namespace qdvb::render
