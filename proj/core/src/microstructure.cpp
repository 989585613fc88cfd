#include "metadesign/microstructure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "metadesign/error.hpp"

namespace metadesign {

Microstructure::Microstructure(int height, int width, std::uint8_t fill)
    : height_(height), width_(width),
      cells_(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill ? 1 : 0) {
    if (height < 0 || width < 0) throw DimensionError("negative microstructure dimensions");
}

Microstructure::Microstructure(int height, int width, std::vector<std::uint8_t> cells)
    : height_(height), width_(width), cells_(std::move(cells)) {
    if (height < 0 || width < 0 ||
        cells_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width))
        throw DimensionError("cell count does not match microstructure dimensions");
    for (auto& c : cells_) {
        if (c > 1) throw DomainError("microstructure cells must be 0 or 1");
    }
}

std::size_t Microstructure::solid_count() const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

double Microstructure::volume_fraction() const {
    if (cells_.empty()) return 0.0;
    return static_cast<double>(solid_count()) / static_cast<double>(cells_.size());
}

Microstructure Microstructure::transposed() const {
    Microstructure t(width_, height_);
    for (int r = 0; r < height_; ++r)
        for (int c = 0; c < width_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

Microstructure Microstructure::mirrored_horizontal() const {
    Microstructure t(height_, width_);
    for (int r = 0; r < height_; ++r)
        for (int c = 0; c < width_; ++c) t(r, width_ - 1 - c) = (*this)(r, c);
    return t;
}

Microstructure Microstructure::mirrored_vertical() const {
    Microstructure t(height_, width_);
    for (int r = 0; r < height_; ++r)
        for (int c = 0; c < width_; ++c) t(height_ - 1 - r, c) = (*this)(r, c);
    return t;
}

Microstructure threshold(const DensityField& field, double t) {
    if (!(t > 0.0 && t < 1.0)) throw DomainError("threshold must lie in (0,1)");
    if (field.values.size() !=
        static_cast<std::size_t>(field.height) * static_cast<std::size_t>(field.width))
        throw DimensionError("density field size mismatch");
    std::vector<std::uint8_t> cells(field.values.size());
    std::transform(field.values.begin(), field.values.end(), cells.begin(),
                   [t](double v) -> std::uint8_t { return v > t ? 1 : 0; });
    return Microstructure(field.height, field.width, std::move(cells));
}

Microstructure enforce_orthotropic_symmetry(const Microstructure& m) {
    const int h = m.height(), w = m.width();
    if (h % 2 != 0 || w % 2 != 0)
        throw DimensionError("orthotropic symmetry requires even dimensions");
    Microstructure out(h, w);
    for (int r = 0; r < h / 2; ++r) {
        for (int c = 0; c < w / 2; ++c) {
            const auto v = m(r, c);
            out(r, c) = v;
            out(r, w - 1 - c) = v;
            out(h - 1 - r, c) = v;
            out(h - 1 - r, w - 1 - c) = v;
        }
    }
    out.id = m.id;
    return out;
}

namespace {

bool solid_at(const Microstructure& m, int r, int c) {
    return r >= 0 && c >= 0 && r < m.height() && c < m.width() && m(r, c) == 1;
}

bool isolated(const Microstructure& m, int r, int c) {
    return m(r, c) == 1 && !solid_at(m, r - 1, c) && !solid_at(m, r + 1, c) &&
           !solid_at(m, r, c - 1) && !solid_at(m, r, c + 1);
}

// 2x2 block with top-left corner (r, c) is {1,0;0,1} or {0,1;1,0}.
bool checkerboard(const Microstructure& m, int r, int c) {
    const auto a = m(r, c), b = m(r, c + 1), d = m(r + 1, c), e = m(r + 1, c + 1);
    return a == e && b == d && a != b;
}

}  // namespace

std::size_t count_isolated_pixels(const Microstructure& m) {
    std::size_t n = 0;
    for (int r = 0; r < m.height(); ++r)
        for (int c = 0; c < m.width(); ++c) n += isolated(m, r, c) ? 1 : 0;
    return n;
}

std::size_t count_checkerboards(const Microstructure& m) {
    std::size_t n = 0;
    for (int r = 0; r + 1 < m.height(); ++r)
        for (int c = 0; c + 1 < m.width(); ++c) n += checkerboard(m, r, c) ? 1 : 0;
    return n;
}

Microstructure repair_defects(const Microstructure& m) {
    Microstructure cur = m;
    // Each pass applies all edits found on a snapshot, which keeps the
    // operation equivariant under reflections.
    for (;;) {
        bool changed = false;
        std::vector<std::pair<int, int>> edits;
        for (int r = 0; r < cur.height(); ++r)
            for (int c = 0; c < cur.width(); ++c)
                if (isolated(cur, r, c)) edits.emplace_back(r, c);
        for (auto [r, c] : edits) cur(r, c) = 0;
        changed |= !edits.empty();

        edits.clear();
        for (int r = 0; r + 1 < cur.height(); ++r)
            for (int c = 0; c + 1 < cur.width(); ++c)
                if (checkerboard(cur, r, c)) edits.emplace_back(r, c);
        for (auto [r, c] : edits) {
            cur(r, c) = 1;
            cur(r, c + 1) = 1;
            cur(r + 1, c) = 1;
            cur(r + 1, c + 1) = 1;
        }
        changed |= !edits.empty();
        if (!changed) break;
    }
    return cur;
}

bool is_orthotropic_symmetric(const Microstructure& m) {
    return m == m.mirrored_horizontal() && m == m.mirrored_vertical();
}

bool is_boundary_connected(const Microstructure& m) {
    const int h = m.height(), w = m.width();
    if (h == 0 || w == 0) return false;
    int start = -1;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m.cells()[i]) {
            start = static_cast<int>(i);
            break;
        }
    }
    if (start < 0) return false;

    std::vector<std::uint8_t> seen(m.size(), 0);
    std::vector<int> stack{start};
    seen[static_cast<std::size_t>(start)] = 1;
    std::size_t visited = 0;
    bool top = false, bottom = false, left = false, right = false;
    while (!stack.empty()) {
        const int idx = stack.back();
        stack.pop_back();
        ++visited;
        const int r = idx / w, c = idx % w;
        top |= r == 0;
        bottom |= r == h - 1;
        left |= c == 0;
        right |= c == w - 1;
        const int nbr[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
        for (auto& n : nbr) {
            if (!solid_at(m, n[0], n[1])) continue;
            const auto j = static_cast<std::size_t>(n[0] * w + n[1]);
            if (seen[j]) continue;
            seen[j] = 1;
            stack.push_back(static_cast<int>(j));
        }
    }
    return visited == m.solid_count() && top && bottom && left && right;
}

bool is_admissible(const Microstructure& m) {
    return m.solid_count() > 0 && is_orthotropic_symmetric(m) && count_isolated_pixels(m) == 0 &&
           count_checkerboards(m) == 0 && is_boundary_connected(m);
}

std::vector<std::uint8_t> boundary_strip(const Microstructure& m, Side side) {
    std::vector<std::uint8_t> s;
    switch (side) {
        case Side::left:
        case Side::right: {
            const int c = side == Side::left ? 0 : m.width() - 1;
            s.reserve(static_cast<std::size_t>(m.height()));
            for (int r = 0; r < m.height(); ++r) s.push_back(m(r, c));
            break;
        }
        case Side::top:
        case Side::bottom: {
            const int r = side == Side::top ? 0 : m.height() - 1;
            s.reserve(static_cast<std::size_t>(m.width()));
            for (int c = 0; c < m.width(); ++c) s.push_back(m(r, c));
            break;
        }
    }
    return s;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    if (n <= 1) return 0;
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

PerturbResult perturb(const Microstructure& m, std::uint64_t rng_seed, const PerturbParams& params) {
    if (m.height() % 2 != 0 || m.width() % 2 != 0)
        throw DimensionError("perturb requires even dimensions");
    if (params.min_blob < 1 || params.max_blob < params.min_blob || params.max_blobs_per_step < 1)
        throw DomainError("invalid perturbation parameters");

    const int qh = m.height() / 2, qw = m.width() / 2;
    const double vf0 = m.volume_fraction();
    std::mt19937_64 rng(rng_seed);

    for (int attempt = 1; attempt <= params.max_attempts; ++attempt) {
        Microstructure cand = m;
        const int blobs = 1 + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(params.max_blobs_per_step)));
        for (int b = 0; b < blobs; ++b) {
            // Interface cells of the generator quadrant.
            std::vector<std::pair<int, int>> iface;
            for (int r = 0; r < qh; ++r) {
                for (int c = 0; c < qw; ++c) {
                    const auto v = cand(r, c);
                    const int nbr[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
                    for (auto& n : nbr) {
                        if (n[0] < 0 || n[1] < 0 || n[0] >= cand.height() || n[1] >= cand.width()) continue;
                        if (cand(n[0], n[1]) != v) {
                            iface.emplace_back(r, c);
                            break;
                        }
                    }
                }
            }
            if (iface.empty()) break;
            const auto [cr, cc] = iface[uniform_index(rng, iface.size())];
            const int size = params.min_blob +
                             static_cast<int>(uniform_index(rng, static_cast<std::size_t>(params.max_blob - params.min_blob + 1)));
            const std::uint8_t value = static_cast<std::uint8_t>(uniform_index(rng, 2));
            const int r0 = cr - (size - 1) / 2, c0 = cc - (size - 1) / 2;
            for (int r = r0; r < r0 + size; ++r)
                for (int c = c0; c < c0 + size; ++c)
                    if (r >= 0 && c >= 0 && r < qh && c < qw) cand(r, c) = value;
        }
        cand = repair_defects(enforce_orthotropic_symmetry(cand));
        if (cand == m) continue;
        if (std::abs(cand.volume_fraction() - vf0) > params.max_vf_change) continue;
        if (!is_boundary_connected(cand)) continue;
        cand.id.reset();
        return {std::move(cand), true, attempt};
    }
    return {m, false, params.max_attempts};
}

}  // namespace metadesign
