#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace metadesign {

/// Binary unit-cell occupancy grid, row-major. 1 = solid, 0 = void.
class Microstructure {
public:
    Microstructure() = default;
    Microstructure(int height, int width, std::uint8_t fill = 0);
    Microstructure(int height, int width, std::vector<std::uint8_t> cells);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return cells_.size(); }

    std::uint8_t operator()(int row, int col) const { return cells_[index(row, col)]; }
    std::uint8_t& operator()(int row, int col) { return cells_[index(row, col)]; }

    const std::vector<std::uint8_t>& cells() const noexcept { return cells_; }

    std::size_t solid_count() const;
    double volume_fraction() const;

    /// Rows and columns exchanged.
    Microstructure transposed() const;
    /// Left-right reflection (columns reversed).
    Microstructure mirrored_horizontal() const;
    /// Top-bottom reflection (rows reversed).
    Microstructure mirrored_vertical() const;

    std::optional<std::int64_t> id;

    /// Compares geometry only; ids are ignored.
    bool operator==(const Microstructure& other) const {
        return height_ == other.height_ && width_ == other.width_ && cells_ == other.cells_;
    }

private:
    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<std::uint8_t> cells_;
};

/// Real-valued field in [0,1] with the shape of a microstructure (decoder output).
struct DensityField {
    int height = 0;
    int width = 0;
    std::vector<double> values;

    double operator()(int row, int col) const {
        return values[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(col)];
    }
};

enum class Side { left, right, top, bottom };

/// cell = 1 iff value > t (strict).
Microstructure threshold(const DensityField& field, double t = 0.9);

/// Mirrors the top-left quadrant across both mid-axes. Throws DimensionError
/// for odd dimensions.
Microstructure enforce_orthotropic_symmetry(const Microstructure& m);

/// Removes solid pixels with no solid 4-neighbour and fills the two void
/// cells of every 2x2 checkerboard, until neither defect remains.
Microstructure repair_defects(const Microstructure& m);

std::size_t count_isolated_pixels(const Microstructure& m);
std::size_t count_checkerboards(const Microstructure& m);

bool is_orthotropic_symmetric(const Microstructure& m);

/// True iff the solid phase is a single 4-connected component that touches
/// all four outer edges of the cell.
bool is_boundary_connected(const Microstructure& m);

/// Symmetric, defect-free, boundary-connected, and non-empty.
bool is_admissible(const Microstructure& m);

/// Outermost row/column on the requested side (length W for top/bottom,
/// H for left/right). Ordered top-to-bottom or left-to-right.
std::vector<std::uint8_t> boundary_strip(const Microstructure& m, Side side);

struct PerturbParams {
    int min_blob = 1;             // blob edge length range, inclusive
    int max_blob = 3;
    int max_blobs_per_step = 2;   // blobs applied per attempt, 1..max
    double max_vf_change = 0.05;
    int max_attempts = 50;
};

struct PerturbResult {
    Microstructure cell;
    bool perturbed = false;  // false: no valid perturbation found, cell == input
    int attempts = 0;
};

/// Adds or removes square blobs centred on solid/void interface cells of the
/// generator quadrant, then re-symmetrizes and repairs. The result keeps the
/// boundary-connectivity invariant and the volume-fraction change bound.
PerturbResult perturb(const Microstructure& m, std::uint64_t rng_seed, const PerturbParams& params = {});

/// Unbiased index in [0, n) from a 64-bit engine; independent of the
/// standard library's distribution implementations.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);
/// Uniform double in [0, 1).
double uniform_unit(std::mt19937_64& rng);

}  // namespace metadesign
