#include "metadesign/homogenization.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "metadesign/error.hpp"
#include "metadesign/quad_element.hpp"

namespace metadesign {

void MaterialSpec::validate() const {
    if (!(youngs_modulus > 0.0)) throw DomainError("Young's modulus must be positive");
    if (!(poisson_ratio > -1.0 && poisson_ratio < 0.5)) throw DomainError("Poisson ratio must lie in (-1, 0.5)");
    if (!(void_stiffness_ratio > 0.0 && void_stiffness_ratio < 1e-3))
        throw DomainError("void stiffness ratio must lie in (0, 1e-3)");
}

Eigen::Matrix3d plane_stress_matrix(double e, double nu) {
    const double f = e / (1.0 - nu * nu);
    Eigen::Matrix3d d;
    d << f, f * nu, 0.0, f * nu, f, 0.0, 0.0, 0.0, f * (1.0 - nu) / 2.0;
    return d;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec8 = Eigen::Matrix<double, 8, 1>;

struct CellSolution {
    Eigen::Matrix3d tensor;
    // Per-case total element displacement (chi0 - chi_e), indexed [case][element].
    std::array<std::vector<Vec8>, 3> element_disp;
    Eigen::Matrix3d d0;
    std::vector<double> modulus;  // per element
};

// Element-local nodal displacements of the three unit macroscopic strains.
std::array<Vec8, 3> unit_strain_displacements() {
    const double xs[4] = {0, 1, 1, 0}, ys[4] = {0, 0, 1, 1};
    std::array<Vec8, 3> u;
    for (auto& v : u) v.setZero();
    for (int a = 0; a < 4; ++a) {
        u[0](2 * a) = xs[a];
        u[1](2 * a + 1) = ys[a];
        u[2](2 * a) = 0.5 * ys[a];
        u[2](2 * a + 1) = 0.5 * xs[a];
    }
    return u;
}

CellSolution solve_cell(const Microstructure& m, const MaterialSpec& mat) {
    mat.validate();
    if (m.height() == 0 || m.width() == 0) throw DimensionError("empty grid");
    if (m.solid_count() == 0) throw EmptyMicrostructure();

    const int h = m.height(), w = m.width();
    const std::size_t ne = m.size();
    const int nnodes = h * w;
    const int ndof = 2 * nnodes - 2;  // node 0 pinned

    CellSolution sol;
    sol.d0 = plane_stress_matrix(1.0, mat.poisson_ratio);
    const Mat8 k0 = quad_stiffness(sol.d0);
    const auto chi0 = unit_strain_displacements();

    sol.modulus.resize(ne);
    for (std::size_t e = 0; e < ne; ++e)
        sol.modulus[e] = m.cells()[e] ? mat.youngs_modulus : mat.youngs_modulus * mat.void_stiffness_ratio;

    auto element_dofs = [&](int r, int c) {
        const int nodes[4] = {(r % h) * w + (c % w), (r % h) * w + ((c + 1) % w),
                              ((r + 1) % h) * w + ((c + 1) % w), ((r + 1) % h) * w + (c % w)};
        std::array<int, 8> dofs{};
        for (int a = 0; a < 4; ++a) {
            dofs[2 * a] = 2 * nodes[a] - 2;
            dofs[2 * a + 1] = 2 * nodes[a] - 1;
        }
        return dofs;  // negative entries are pinned
    };

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(ne * 64);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(ndof, 3);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const auto e = static_cast<std::size_t>(r * w + c);
            const auto dofs = element_dofs(r, c);
            const double s = sol.modulus[e];
            for (int i = 0; i < 8; ++i) {
                if (dofs[i] < 0) continue;
                for (int j = 0; j < 8; ++j)
                    if (dofs[j] >= 0) trip.emplace_back(dofs[i], dofs[j], s * k0(i, j));
                for (int k = 0; k < 3; ++k) rhs(dofs[i], k) += s * k0.row(i).dot(chi0[k]);
            }
        }
    }
    SpMat k(ndof, ndof);
    k.setFromTriplets(trip.begin(), trip.end());

    Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> solver;
    solver.compute(k);
    if (solver.info() != Eigen::Success) throw SolverFailure("cell stiffness factorization failed");
    const Eigen::MatrixXd chi = solver.solve(rhs);
    if (solver.info() != Eigen::Success || !chi.allFinite()) throw SolverFailure("cell solve failed");

    sol.tensor.setZero();
    for (int k2 = 0; k2 < 3; ++k2) sol.element_disp[k2].resize(ne);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const auto e = static_cast<std::size_t>(r * w + c);
            const auto dofs = element_dofs(r, c);
            std::array<Vec8, 3> d;
            for (int k2 = 0; k2 < 3; ++k2) {
                Vec8 ue;
                for (int i = 0; i < 8; ++i) ue(i) = dofs[i] < 0 ? 0.0 : chi(dofs[i], k2);
                d[k2] = chi0[k2] - ue;
                sol.element_disp[k2][e] = d[k2];
            }
            const double s = sol.modulus[e];
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) sol.tensor(i, j) += s * d[i].dot(k0 * d[j]);
        }
    }
    sol.tensor /= static_cast<double>(ne);
    return sol;
}

BoundaryStressTraces traces_from(const Microstructure& m, const CellSolution& sol) {
    const int h = m.height(), w = m.width();
    BoundaryStressTraces out;
    const Mat38 b_right = quad_b_matrix(1.0, 0.0), b_left = quad_b_matrix(-1.0, 0.0);
    const Mat38 b_top = quad_b_matrix(0.0, -1.0), b_bottom = quad_b_matrix(0.0, 1.0);

    auto traction = [&](std::size_t e, const Mat38& b, int kase, bool vertical_face) {
        if (!m.cells()[e]) return 0.0;
        const Eigen::Vector3d sigma = sol.modulus[e] * sol.d0 * (b * sol.element_disp[kase][e]);
        // Vertical face (normal +-x): (sxx, sxy). Horizontal face: (sxy, syy).
        return vertical_face ? std::hypot(sigma(0), sigma(2)) : std::hypot(sigma(2), sigma(1));
    };

    for (int kase = 0; kase < 3; ++kase) {
        auto& left = out.values[static_cast<std::size_t>(Side::left)][kase];
        auto& right = out.values[static_cast<std::size_t>(Side::right)][kase];
        auto& top = out.values[static_cast<std::size_t>(Side::top)][kase];
        auto& bottom = out.values[static_cast<std::size_t>(Side::bottom)][kase];
        for (int r = 0; r < h; ++r) {
            left.push_back(traction(static_cast<std::size_t>(r * w), b_left, kase, true));
            right.push_back(traction(static_cast<std::size_t>(r * w + w - 1), b_right, kase, true));
        }
        for (int c = 0; c < w; ++c) {
            top.push_back(traction(static_cast<std::size_t>(c), b_top, kase, false));
            bottom.push_back(traction(static_cast<std::size_t>((h - 1) * w + c), b_bottom, kase, false));
        }
    }
    return out;
}

}  // namespace

Eigen::Matrix3d homogenize_tensor(const Microstructure& m, const MaterialSpec& mat) {
    return solve_cell(m, mat).tensor;
}

StiffnessComponents homogenize(const Microstructure& m, const MaterialSpec& mat) {
    const Eigen::Matrix3d t = solve_cell(m, mat).tensor;
    return {t(0, 0), 0.5 * (t(0, 1) + t(1, 0)), t(1, 1), t(2, 2)};
}

BoundaryStressTraces boundary_stress_traces(const Microstructure& m, const MaterialSpec& mat) {
    return traces_from(m, solve_cell(m, mat));
}

CellAnalysis analyze_cell(const Microstructure& m, const MaterialSpec& mat) {
    const CellSolution sol = solve_cell(m, mat);
    return {sol.tensor, traces_from(m, sol)};
}

}  // namespace metadesign
