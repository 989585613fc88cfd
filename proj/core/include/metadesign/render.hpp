#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "metadesign/microstructure.hpp"

namespace metadesign {

/// Plain (P1) portable bitmap, solid = 1 (black).
void write_pbm(const Microstructure& m, const std::filesystem::path& path);
/// Plain (P2) greymap of a density field, 0..255 with solid dark.
void write_pgm(const DensityField& f, const std::filesystem::path& path);

/// RGB hex colour for t in [0, 1] on a blue-to-yellow ramp.
std::string colormap(double t);

/// Pixel image of a cell, `scale` px per pixel.
std::string svg_bitmap(const Microstructure& m, int scale = 4);

/// Row of cells with an optional caption under each.
std::string svg_filmstrip(const std::vector<Microstructure>& cells, const std::vector<std::string>& captions,
                          int scale = 2);

/// nx x ny grid of element values, element (ix, iy) at column ix, with
/// iy = 0 drawn at the bottom.
std::string svg_heatmap(int nx, int ny, const std::vector<double>& values, const std::string& title);

/// Scatter plot with points coloured by `colour_values` (may be empty).
std::string svg_scatter(const std::vector<double>& x, const std::vector<double>& y,
                        const std::vector<double>& colour_values, const std::string& title,
                        const std::string& x_label, const std::string& y_label);

void write_text(const std::string& text, const std::filesystem::path& path);

}  // namespace metadesign
