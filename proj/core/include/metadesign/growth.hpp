#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "metadesign/database.hpp"
#include "metadesign/microstructure.hpp"

namespace metadesign {

struct GrowthOptions {
    int iterations = 200;
    int batch = 10;                 // parents perturbed per iteration
    int retries = 3;                // extra attempts when a child fails or duplicates
    double sparsity_radius = 0.1;   // standardized property units
    int hull_directions = 64;
    bool transpose_closure = false;  // also insert the transposed twin of every new cell
    PerturbParams perturb;
    MaterialSpec material;
    std::function<void(int iteration, std::size_t records)> progress;
};

struct RankedRecord {
    std::size_t index = 0;
    double extremeness = 0.0;  // [0,1], 1 on the hull approximation
    double sparsity = 0.0;     // [0,1], 1 for the fewest neighbours
    double score = 0.0;
};

/// Scores every record; sorted by descending score, ties by ascending id.
std::vector<RankedRecord> rank_for_growth(const Database& db, const std::vector<std::array<double, 4>>& directions,
                                          double radius);

/// Neighbour counts within `radius` (excluding self) via a uniform bucket grid.
std::vector<std::size_t> neighbour_counts(const std::vector<std::array<double, 4>>& pts, double radius);

/// Seeds are homogenized and inserted first (duplicates dropped).
Database grow_database(const std::vector<Microstructure>& seeds, std::uint64_t rng_seed, const GrowthOptions& opts = {},
                       DatabaseHeader header = {});

}  // namespace metadesign
