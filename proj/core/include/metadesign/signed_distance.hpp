#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "metadesign/stiffness.hpp"

namespace metadesign {

/// Signed distance to the boundary of the database's property region, sampled
/// on a 4D Cartesian grid over standardized (C11, C12, C22, C33). Positive
/// inside (feasible), negative outside.
struct SignedDistanceField {
    PropertyScaler scaler;
    int resolution = 12;
    std::array<double, 4> lower{};    // standardized box corner
    std::array<double, 4> spacing{};  // standardized node spacing per axis
    std::vector<double> values;
    std::vector<std::array<double, 4>> gradients;  // central differences, standardized units
    std::vector<std::uint8_t> occupied;

    std::size_t node_count() const { return values.size(); }
    std::size_t node_index(const std::array<int, 4>& idx) const;
    std::array<int, 4> node_coords(std::size_t index) const;
    /// Standardized coordinates of a node.
    std::array<double, 4> node_position(const std::array<int, 4>& idx) const;
    /// Raw stiffness components at a node.
    StiffnessComponents node_properties(const std::array<int, 4>& idx) const;
};

struct SdfOptions {
    int resolution = 12;
    double margin = 0.1;            // box margin as a fraction of the data extent
    double occupancy_radius = 1.5;  // in grid spacings
};

/// Throws DomainError for fewer than 100 tuples, degenerate (identical)
/// properties, or a grid with no exterior node.
SignedDistanceField build_sdf(std::span<const StiffnessComponents> properties, const SdfOptions& opts = {});

struct Feasibility {
    double phi = 0.0;
    /// d phi / d C_ij in raw stiffness units, order (C11, C12, C22, C33).
    std::array<double, 4> gradient{};
    bool clamped = false;  // query was outside the grid box
};

/// Multilinear interpolation of the nodal values; the gradient is the exact
/// derivative of that interpolant. Outside the box the value at the nearest
/// box point minus the standardized distance to it.
Feasibility feasibility_phi(const StiffnessComponents& c, const SignedDistanceField& sdf);

/// Multilinear interpolation of the stored central-difference gradients
/// (standardized units).
std::array<double, 4> interpolated_node_gradient(const StiffnessComponents& c, const SignedDistanceField& sdf);

struct AggregatedConstraint {
    double value = 0.0;             // (1/N) sum S(-phi_e)
    std::vector<double> gradient;   // d value / d phi_e
    double bound = 0.0;             // feasible iff value <= bound = 1/N
};

/// S(x) = 0.5 (tanh(beta x) + 1).
double heaviside_projection(double x, double beta);
AggregatedConstraint aggregate_constraint(std::span<const double> phi, double beta);

}  // namespace metadesign
