#pragma once

#include <string>
#include <vector>

#include "metadesign/microstructure.hpp"

namespace metadesign {

/// Parametric seed families used to start database growth.
enum class SeedFamily { grid_lattice, x_brace, ring_plate, frame };

/// Central cross: horizontal bar half-thickness `a`, vertical bar half-thickness `b`.
Microstructure grid_lattice(int height, int width, int a, int b);
/// Both diagonals with half-thickness `t`, plus an optional border of `border` pixels.
Microstructure x_brace(int height, int width, double t, int border);
/// Solid plate with a central elliptical hole of semi-axes (rx, ry).
Microstructure ring_plate(int height, int width, double rx, double ry);
/// Border bars of thickness `tx` (left/right) and `ty` (top/bottom) with an
/// optional central cross of half-thickness `cross`.
Microstructure frame(int height, int width, int tx, int ty, int cross);

/// Parameter sweep across all four families. Every returned cell is
/// admissible (symmetric, defect free, boundary connected); duplicates removed.
std::vector<Microstructure> seed_set(int height, int width);

std::string to_string(SeedFamily f);

}  // namespace metadesign
