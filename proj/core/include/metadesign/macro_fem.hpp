#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Sparse>

#include "metadesign/stiffness.hpp"

namespace metadesign {

struct DirichletCondition {
    int node = 0;
    int axis = 0;  // 0 = x, 1 = y
    double value = 0.0;
};

struct NodalLoad {
    int node = 0;
    int axis = 0;
    double value = 0.0;
};

struct InterestTarget {
    int node = 0;
    int axis = 0;
    double target = 0.0;
};

/// Structured macro mesh of nx x ny unit-square four-node elements.
/// Node (ix, iy) has id iy*(nx+1)+ix with y pointing up; element (ix, iy)
/// has id iy*nx+ix.
struct MacroProblem {
    int nx = 1;
    int ny = 1;
    std::vector<DirichletCondition> dirichlet;
    std::vector<NodalLoad> loads;
    std::vector<InterestTarget> interest;

    int node_count() const { return (nx + 1) * (ny + 1); }
    int dof_count() const { return 2 * node_count(); }
    int element_count() const { return nx * ny; }
    int node_id(int ix, int iy) const { return iy * (nx + 1) + ix; }
    int element_id(int ix, int iy) const { return iy * nx + ix; }
    std::array<int, 4> element_nodes(int e) const;

    Eigen::VectorXd load_vector() const;
    /// u_t: targets at the DOFs of interest, zero elsewhere.
    Eigen::VectorXd target_vector() const;
    /// gamma: 1 at the DOFs of interest, zero elsewhere.
    Eigen::VectorXd selector() const;

    /// Throws DomainError on out-of-range nodes, duplicate or conflicting
    /// prescriptions, or targets on prescribed DOFs that disagree with them.
    void validate() const;
};

/// Orthotropic constitutive matrix [C11 C12 0; C12 C22 0; 0 0 C33].
Eigen::Matrix3d constitutive_matrix(const StiffnessComponents& c);

struct PropertyField {
    std::vector<StiffnessComponents> values;  // one per element
    StiffnessComponents lower;
    StiffnessComponents upper;

    bool within_bounds(double tol = 1e-12) const;
};

/// Global stiffness before any constraint is applied.
Eigen::SparseMatrix<double> assemble_stiffness(const MacroProblem& problem, std::span<const StiffnessComponents> field);

/// Per-element, per-component objective sensitivities dF/dC_e,ij in the
/// order (C11, C12, C22, C33).
using Sensitivities = std::vector<std::array<double, 4>>;

/// Factorized macro system with nonzero Dirichlet handled by partitioning
/// into free and prescribed DOFs.
class MacroSolver {
public:
    MacroSolver(const MacroProblem& problem, std::span<const StiffnessComponents> field);
    ~MacroSolver();
    MacroSolver(MacroSolver&&) noexcept;
    MacroSolver& operator=(MacroSolver&&) noexcept;

    /// Full displacement vector (free and prescribed DOFs).
    const Eigen::VectorXd& displacement() const { return u_; }

    /// Adjoint sensitivities of F = ||gamma.u - u_t||^2 using one extra
    /// solve on the free block.
    Sensitivities sensitivities() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    Eigen::VectorXd u_;
};

/// Throws SolverFailure when the reduced system is singular.
Eigen::VectorXd assemble_and_solve(const MacroProblem& problem, std::span<const StiffnessComponents> field);

struct ObjectiveValue {
    double objective = 0.0;  // ||gamma.u - u_t||^2
    double rrmse = 0.0;      // ||gamma.u - u_t|| / ||u_t||
};

/// Throws DomainError when ||u_t|| = 0 (RRMSE undefined).
ObjectiveValue objective_and_rrmse(const Eigen::VectorXd& u, const MacroProblem& problem);
double objective_value(const Eigen::VectorXd& u, const MacroProblem& problem);

Sensitivities adjoint_sensitivities(const MacroProblem& problem, std::span<const StiffnessComponents> field);

}  // namespace metadesign
