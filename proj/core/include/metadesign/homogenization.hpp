#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "metadesign/microstructure.hpp"
#include "metadesign/stiffness.hpp"

namespace metadesign {

struct MaterialSpec {
    double youngs_modulus = 1.0;
    double poisson_ratio = 0.49;
    double void_stiffness_ratio = 1e-6;

    /// Throws DomainError when a field is outside its admissible range.
    void validate() const;

    /// Plane-stress constituent matrix entries.
    double c11() const { return youngs_modulus / (1.0 - poisson_ratio * poisson_ratio); }
    double c12() const { return poisson_ratio * c11(); }
    double c33() const { return youngs_modulus / (2.0 * (1.0 + poisson_ratio)); }
    StiffnessComponents constituent() const { return {c11(), c12(), c11(), c33()}; }
};

/// Plane-stress constitutive matrix (Voigt, engineering shear).
Eigen::Matrix3d plane_stress_matrix(double youngs_modulus, double poisson_ratio);

/// Full 3x3 effective tensor of a periodic unit cell. Each pixel is a unit
/// bilinear quadrilateral with 2x2 Gauss quadrature; void pixels carry
/// E * void_stiffness_ratio. Throws EmptyMicrostructure / SolverFailure.
Eigen::Matrix3d homogenize_tensor(const Microstructure& m, const MaterialSpec& mat = {});

/// Orthotropic components C11, C12, C22, C33 of the effective tensor.
StiffnessComponents homogenize(const Microstructure& m, const MaterialSpec& mat = {});

enum class StrainCase { e11 = 0, e22 = 1, e12 = 2 };

/// Per-boundary-element traction magnitudes of the three unit-strain cell
/// solutions. `trace(side, case)[k]` belongs to the k-th pixel along `side`
/// (top-to-bottom for left/right, left-to-right for top/bottom).
struct BoundaryStressTraces {
    // [side][case] -> per-element magnitudes
    std::array<std::array<std::vector<double>, 3>, 4> values;

    const std::vector<double>& trace(Side side, StrainCase c) const {
        return values[static_cast<std::size_t>(side)][static_cast<std::size_t>(c)];
    }
    std::vector<double>& trace(Side side, StrainCase c) {
        return values[static_cast<std::size_t>(side)][static_cast<std::size_t>(c)];
    }
};

/// Traction |sigma . n| evaluated at the midpoint of each boundary pixel's
/// outer face. Entries are zero where the boundary pixel is void.
BoundaryStressTraces boundary_stress_traces(const Microstructure& m, const MaterialSpec& mat = {});

/// Tensor and traces from one factorization.
struct CellAnalysis {
    Eigen::Matrix3d tensor;
    BoundaryStressTraces traces;
};
CellAnalysis analyze_cell(const Microstructure& m, const MaterialSpec& mat = {});

}  // namespace metadesign
