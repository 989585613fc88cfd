#include "metadesign/macro_fem.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/SparseCholesky>

#include "metadesign/error.hpp"
#include "metadesign/quad_element.hpp"

namespace metadesign {

std::array<int, 4> MacroProblem::element_nodes(int e) const {
    const int ix = e % nx, iy = e / nx;
    return {node_id(ix, iy), node_id(ix + 1, iy), node_id(ix + 1, iy + 1), node_id(ix, iy + 1)};
}

Eigen::VectorXd MacroProblem::load_vector() const {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(dof_count());
    for (const auto& l : loads) f(2 * l.node + l.axis) += l.value;
    return f;
}

Eigen::VectorXd MacroProblem::target_vector() const {
    Eigen::VectorXd t = Eigen::VectorXd::Zero(dof_count());
    for (const auto& i : interest) t(2 * i.node + i.axis) = i.target;
    return t;
}

Eigen::VectorXd MacroProblem::selector() const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dof_count());
    for (const auto& i : interest) g(2 * i.node + i.axis) = 1.0;
    return g;
}

void MacroProblem::validate() const {
    if (nx < 1 || ny < 1) throw DomainError("mesh needs at least one element per axis");
    auto check = [&](int node, int axis, const char* what) {
        if (node < 0 || node >= node_count() || (axis != 0 && axis != 1))
            throw DomainError(std::string(what) + ": node/axis out of range");
    };
    std::map<int, double> prescribed;
    for (const auto& d : dirichlet) {
        check(d.node, d.axis, "dirichlet");
        const int dof = 2 * d.node + d.axis;
        auto [it, inserted] = prescribed.emplace(dof, d.value);
        if (!inserted && it->second != d.value) throw DomainError("conflicting Dirichlet values on one DOF");
    }
    for (const auto& l : loads) check(l.node, l.axis, "load");
    std::map<int, double> targets;
    for (const auto& i : interest) {
        check(i.node, i.axis, "interest");
        const int dof = 2 * i.node + i.axis;
        if (!targets.emplace(dof, i.target).second) throw DomainError("duplicate DOF of interest");
        if (auto it = prescribed.find(dof); it != prescribed.end() && it->second != i.target)
            throw DomainError("target on a prescribed DOF disagrees with its prescribed value");
    }
}

Eigen::Matrix3d constitutive_matrix(const StiffnessComponents& c) {
    Eigen::Matrix3d d;
    d << c.c11, c.c12, 0.0, c.c12, c.c22, 0.0, 0.0, 0.0, c.c33;
    return d;
}

bool PropertyField::within_bounds(double tol) const {
    const auto lo = lower.to_array(), hi = upper.to_array();
    return std::all_of(values.begin(), values.end(), [&](const StiffnessComponents& v) {
        const auto a = v.to_array();
        for (std::size_t i = 0; i < 4; ++i)
            if (a[i] < lo[i] - tol || a[i] > hi[i] + tol) return false;
        return true;
    });
}

Eigen::SparseMatrix<double> assemble_stiffness(const MacroProblem& problem, std::span<const StiffnessComponents> field) {
    if (static_cast<int>(field.size()) != problem.element_count())
        throw DimensionError("property field size does not match the mesh");
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(field.size() * 64);
    for (int e = 0; e < problem.element_count(); ++e) {
        const Mat8 ke = quad_stiffness(constitutive_matrix(field[static_cast<std::size_t>(e)]));
        const auto nodes = problem.element_nodes(e);
        for (int a = 0; a < 8; ++a)
            for (int b = 0; b < 8; ++b)
                trip.emplace_back(2 * nodes[a / 2] + a % 2, 2 * nodes[b / 2] + b % 2, ke(a, b));
    }
    Eigen::SparseMatrix<double> k(problem.dof_count(), problem.dof_count());
    k.setFromTriplets(trip.begin(), trip.end());
    return k;
}

struct MacroSolver::Impl {
    const MacroProblem* problem = nullptr;
    std::vector<StiffnessComponents> field;
    std::vector<int> free_index;  // full dof -> free index, -1 if prescribed
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

MacroSolver::MacroSolver(const MacroProblem& problem, std::span<const StiffnessComponents> field)
    : impl_(std::make_unique<Impl>()) {
    problem.validate();
    impl_->problem = &problem;
    impl_->field.assign(field.begin(), field.end());

    const int ndof = problem.dof_count();
    Eigen::VectorXd prescribed = Eigen::VectorXd::Zero(ndof);
    std::vector<char> is_fixed(static_cast<std::size_t>(ndof), 0);
    for (const auto& d : problem.dirichlet) {
        is_fixed[static_cast<std::size_t>(2 * d.node + d.axis)] = 1;
        prescribed(2 * d.node + d.axis) = d.value;
    }
    impl_->free_index.assign(static_cast<std::size_t>(ndof), -1);
    int nfree = 0;
    for (int i = 0; i < ndof; ++i)
        if (!is_fixed[static_cast<std::size_t>(i)]) impl_->free_index[static_cast<std::size_t>(i)] = nfree++;

    const Eigen::SparseMatrix<double> k = assemble_stiffness(problem, field);
    const Eigen::VectorXd f = problem.load_vector();

    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nfree);
    for (int col = 0; col < k.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(k, col); it; ++it) {
            const int fr = impl_->free_index[static_cast<std::size_t>(it.row())];
            const int fc = impl_->free_index[static_cast<std::size_t>(it.col())];
            if (fr < 0) continue;
            if (fc >= 0) trip.emplace_back(fr, fc, it.value());
            else rhs(fr) -= it.value() * prescribed(it.col());
        }
    }
    for (int i = 0; i < ndof; ++i)
        if (impl_->free_index[static_cast<std::size_t>(i)] >= 0) rhs(impl_->free_index[static_cast<std::size_t>(i)]) += f(i);

    u_ = prescribed;
    if (nfree == 0) return;
    Eigen::SparseMatrix<double> kff(nfree, nfree);
    kff.setFromTriplets(trip.begin(), trip.end());
    impl_->ldlt.compute(kff);
    if (impl_->ldlt.info() != Eigen::Success) throw SolverFailure("macro stiffness factorization failed");
    // LDLT of a singular PSD matrix can succeed with a zero pivot.
    const auto dvec = impl_->ldlt.vectorD();
    const double dmax = dvec.cwiseAbs().maxCoeff();
    if (!(dvec.minCoeff() > 1e-13 * dmax)) throw SolverFailure("reduced macro stiffness is singular");
    const Eigen::VectorXd uf = impl_->ldlt.solve(rhs);
    if (!uf.allFinite()) throw SolverFailure("macro solve produced non-finite displacements");
    for (int i = 0; i < ndof; ++i) {
        const int fi = impl_->free_index[static_cast<std::size_t>(i)];
        if (fi >= 0) u_(i) = uf(fi);
    }
}

MacroSolver::~MacroSolver() = default;
MacroSolver::MacroSolver(MacroSolver&&) noexcept = default;
MacroSolver& MacroSolver::operator=(MacroSolver&&) noexcept = default;

Sensitivities MacroSolver::sensitivities() const {
    const MacroProblem& problem = *impl_->problem;
    const Eigen::VectorXd residual = problem.selector().cwiseProduct(u_) - problem.target_vector();

    // w = K_ff^{-1} r_f, zero on prescribed DOFs; the adjoint multiplier is 2w.
    const int nfree = static_cast<int>(std::count_if(impl_->free_index.begin(), impl_->free_index.end(),
                                                     [](int i) { return i >= 0; }));
    Eigen::VectorXd w = Eigen::VectorXd::Zero(problem.dof_count());
    if (nfree > 0) {
        Eigen::VectorXd rf(nfree);
        for (int i = 0; i < problem.dof_count(); ++i) {
            const int fi = impl_->free_index[static_cast<std::size_t>(i)];
            if (fi >= 0) rf(fi) = residual(i);
        }
        const Eigen::VectorXd wf = impl_->ldlt.solve(rf);
        for (int i = 0; i < problem.dof_count(); ++i) {
            const int fi = impl_->free_index[static_cast<std::size_t>(i)];
            if (fi >= 0) w(i) = wf(fi);
        }
    }

    Sensitivities out(static_cast<std::size_t>(problem.element_count()));
    Eigen::Matrix<double, 8, 1> ue, we;
    for (int e = 0; e < problem.element_count(); ++e) {
        const auto nodes = problem.element_nodes(e);
        for (int a = 0; a < 8; ++a) {
            ue(a) = u_(2 * nodes[a / 2] + a % 2);
            we(a) = w(2 * nodes[a / 2] + a % 2);
        }
        // w^T B^T (dC/dC_ij) B u per Gauss point, |J| w_g = 1/4.
        std::array<double, 4> s{};
        for (const auto& b : quad_gauss_b()) {
            const Eigen::Vector3d eu = b * ue, ew = b * we;
            s[0] += 0.25 * ew(0) * eu(0);
            s[1] += 0.25 * 0.5 * (ew(0) * eu(1) + ew(1) * eu(0));  // symmetric unit derivative
            s[2] += 0.25 * ew(1) * eu(1);
            s[3] += 0.25 * ew(2) * eu(2);
        }
        // -2 for the diagonal entries, -4 for C12 (it occupies both off-diagonal slots).
        out[static_cast<std::size_t>(e)] = {-2.0 * s[0], -4.0 * s[1], -2.0 * s[2], -2.0 * s[3]};
    }
    return out;
}

Eigen::VectorXd assemble_and_solve(const MacroProblem& problem, std::span<const StiffnessComponents> field) {
    return MacroSolver(problem, field).displacement();
}

double objective_value(const Eigen::VectorXd& u, const MacroProblem& problem) {
    return (problem.selector().cwiseProduct(u) - problem.target_vector()).squaredNorm();
}

ObjectiveValue objective_and_rrmse(const Eigen::VectorXd& u, const MacroProblem& problem) {
    const Eigen::VectorXd ut = problem.target_vector();
    const double norm_t = ut.norm();
    if (norm_t == 0.0) throw DomainError("RRMSE undefined for a zero target vector");
    const double f = objective_value(u, problem);
    return {f, std::sqrt(f) / norm_t};
}

Sensitivities adjoint_sensitivities(const MacroProblem& problem, std::span<const StiffnessComponents> field) {
    return MacroSolver(problem, field).sensitivities();
}

}  // namespace metadesign
