#include "metadesign/seeds.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "metadesign/bitmap_codec.hpp"

namespace metadesign {

namespace {

// Pixel centre coordinates relative to the cell centre.
double cx(int c, int w) { return c + 0.5 - 0.5 * w; }
double cy(int r, int h) { return r + 0.5 - 0.5 * h; }

}  // namespace

Microstructure grid_lattice(int height, int width, int a, int b) {
    Microstructure m(height, width);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c)
            if (std::abs(cy(r, height)) < a || std::abs(cx(c, width)) < b) m(r, c) = 1;
    return m;
}

Microstructure x_brace(int height, int width, double t, int border) {
    Microstructure m(height, width);
    const double hw = 0.5 * width, hh = 0.5 * height;
    const double norm = std::hypot(hw, hh);
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            const double x = cx(c, width), y = cy(r, height);
            // Distance to the two diagonals through the centre.
            const double d1 = std::abs(hh * x - hw * y) / norm;
            const double d2 = std::abs(hh * x + hw * y) / norm;
            const bool edge = r < border || c < border || r >= height - border || c >= width - border;
            if (d1 < t || d2 < t || edge) m(r, c) = 1;
        }
    }
    return m;
}

Microstructure ring_plate(int height, int width, double rx, double ry) {
    Microstructure m(height, width, 1);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) {
            const double x = cx(c, width) / rx, y = cy(r, height) / ry;
            if (x * x + y * y < 1.0) m(r, c) = 0;
        }
    return m;
}

Microstructure frame(int height, int width, int tx, int ty, int cross) {
    Microstructure m(height, width);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) {
            const bool bar = c < tx || c >= width - tx || r < ty || r >= height - ty;
            const bool x = cross > 0 && (std::abs(cy(r, height)) < cross || std::abs(cx(c, width)) < cross);
            if (bar || x) m(r, c) = 1;
        }
    return m;
}

std::vector<Microstructure> seed_set(int height, int width) {
    std::vector<Microstructure> raw;
    const int s = std::min(height, width);
    const auto frac = [s](double f) { return std::max(1, static_cast<int>(std::lround(f * s))); };

    for (double fa : {0.04, 0.08, 0.14, 0.22, 0.32})
        for (double fb : {0.04, 0.08, 0.14, 0.22, 0.32}) raw.push_back(grid_lattice(height, width, frac(fa), frac(fb)));

    for (double ft : {0.03, 0.05, 0.08, 0.12, 0.17})
        for (int border : {0, 1, 2, 4}) {
            if (border > 0) raw.push_back(x_brace(height, width, ft * s, frac(border * 0.02)));
            else raw.push_back(x_brace(height, width, ft * s, 0));
        }

    for (double fx : {0.15, 0.22, 0.3, 0.36, 0.42, 0.46})
        for (double fy : {0.15, 0.22, 0.3, 0.36, 0.42, 0.46}) raw.push_back(ring_plate(height, width, fx * s, fy * s));

    for (double ftx : {0.04, 0.08, 0.14})
        for (double fty : {0.04, 0.08, 0.14})
            for (double fc : {0.0, 0.04, 0.1}) raw.push_back(frame(height, width, frac(ftx), frac(fty), fc > 0 ? frac(fc) : 0));

    std::vector<Microstructure> out;
    std::unordered_set<std::uint64_t> seen;
    for (auto& m : raw) {
        Microstructure cell = repair_defects(enforce_orthotropic_symmetry(m));
        if (!is_admissible(cell)) continue;
        if (!seen.insert(bitmap_hash(cell)).second) continue;
        out.push_back(std::move(cell));
    }
    return out;
}

std::string to_string(SeedFamily f) {
    switch (f) {
        case SeedFamily::grid_lattice: return "grid_lattice";
        case SeedFamily::x_brace: return "x_brace";
        case SeedFamily::ring_plate: return "ring_plate";
        case SeedFamily::frame: return "frame";
    }
    return "unknown";
}

}  // namespace metadesign
