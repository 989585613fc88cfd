#include "metadesign/macro_opt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "metadesign/error.hpp"

namespace metadesign {

DesignSpace design_space(std::span<const StiffnessComponents> properties) {
    if (properties.empty()) throw EmptySelection("design space needs at least one property tuple");
    std::array<double, 4> lo, hi, sum{};
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    for (const auto& p : properties) {
        const auto a = p.to_array();
        for (std::size_t k = 0; k < 4; ++k) {
            lo[k] = std::min(lo[k], a[k]);
            hi[k] = std::max(hi[k], a[k]);
            sum[k] += a[k];
        }
    }
    for (auto& s : sum) s /= static_cast<double>(properties.size());
    return {StiffnessComponents::from_array(lo), StiffnessComponents::from_array(hi),
            StiffnessComponents::from_array(sum)};
}

void OptimConfig::validate() const {
    if (!(beta > 0.0)) throw DomainError("beta must be positive");
    if (beta_continuation && !(beta_start > 0.0 && beta_end >= beta_start && beta_interval > 0))
        throw DomainError("invalid beta continuation schedule");
    if (max_iters < 1) throw DomainError("max_iters must be at least 1");
    if (!(move_tolerance > 0.0)) throw DomainError("move tolerance must be positive");
    if (max_consecutive_failures < 1) throw DomainError("max_consecutive_failures must be at least 1");
}

namespace {

double rrmse_or_nan(const Eigen::VectorXd& u, const MacroProblem& problem) {
    if (problem.target_vector().norm() == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return objective_and_rrmse(u, problem).rrmse;
}

double beta_at(const OptimConfig& cfg, int iter) {
    if (!cfg.beta_continuation) return cfg.beta;
    const double b = cfg.beta_start * std::pow(2.0, (iter - 1) / cfg.beta_interval);
    return std::min(b, cfg.beta_end);
}

Eigen::VectorXd guarded_update(Mma& mma, int& failures, const OptimConfig& cfg, const Eigen::VectorXd& x, double f0,
                               const Eigen::VectorXd& df0, const Eigen::VectorXd& fval, const Eigen::MatrixXd& dfdx,
                               const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    for (;;) {
        try {
            Eigen::VectorXd next = mma.update(x, f0, df0, fval, dfdx, lo, hi);
            failures = 0;
            return next;
        } catch (const SolverFailure&) {
            if (++failures >= cfg.max_consecutive_failures)
                throw SolverFailure("MMA subproblem failed " + std::to_string(failures) + " consecutive times");
            mma.reset_asymptotes();
        }
    }
}

// Moves c uphill in phi until phi >= margin; falls back to the nearest grid
// node (within the box) whose value reaches the margin.
StiffnessComponents restore_point(const StiffnessComponents& c, const SignedDistanceField& sdf, const DesignSpace& box,
                                  double margin) {
    auto clamp_box = [&](std::array<double, 4> a) {
        const auto lo = box.lower.to_array(), hi = box.upper.to_array();
        for (std::size_t k = 0; k < 4; ++k) a[k] = std::clamp(a[k], lo[k], hi[k]);
        return StiffnessComponents::from_array(a);
    };
    StiffnessComponents cur = c;
    for (int it = 0; it < 100; ++it) {
        const Feasibility f = feasibility_phi(cur, sdf);
        if (f.phi >= margin) return cur;
        // Step in standardized space along the gradient, sized by the deficit.
        std::array<double, 4> gz{};
        double n2 = 0.0;
        for (std::size_t k = 0; k < 4; ++k) {
            gz[k] = f.gradient[k] * sdf.scaler.scale[k];
            n2 += gz[k] * gz[k];
        }
        if (!(n2 > 1e-20)) break;
        const double step = (margin - f.phi) / n2 + 0.25 * *std::min_element(sdf.spacing.begin(), sdf.spacing.end()) / std::sqrt(n2);
        auto a = cur.to_array();
        for (std::size_t k = 0; k < 4; ++k) a[k] += step * gz[k] * sdf.scaler.scale[k];
        cur = clamp_box(a);
    }
    if (feasibility_phi(cur, sdf).phi >= margin) return cur;

    const auto z = sdf.scaler.standardize(c);
    double best = std::numeric_limits<double>::infinity();
    StiffnessComponents out = c;
    for (std::size_t i = 0; i < sdf.node_count(); ++i) {
        if (sdf.values[i] < margin) continue;
        const auto idx = sdf.node_coords(i);
        const StiffnessComponents p = sdf.node_properties(idx);
        const auto pa = p.to_array(), lo = box.lower.to_array(), hi = box.upper.to_array();
        bool inside = true;
        for (std::size_t k = 0; k < 4; ++k) inside &= pa[k] >= lo[k] && pa[k] <= hi[k];
        if (!inside) continue;
        const double d = squared_distance(sdf.node_position(idx), z);
        if (d < best) {
            best = d;
            out = p;
        }
    }
    if (!std::isfinite(best)) throw SolverFailure("no feasible grid node inside the design box");
    return out;
}

}  // namespace

OptimResult optimize_properties(const MacroProblem& problem, const SignedDistanceField& sdf, const DesignSpace& space,
                                const OptimConfig& cfg) {
    cfg.validate();
    problem.validate();
    const int ne = problem.element_count();
    const int n = 4 * ne;
    const auto lo = space.lower.to_array(), hi = space.upper.to_array();
    std::array<double, 4> range{};
    for (std::size_t k = 0; k < 4; ++k) {
        range[k] = hi[k] - lo[k];
        if (!(range[k] > 0.0)) throw DomainError("design space has zero extent in a component");
    }

    auto to_field = [&](const Eigen::VectorXd& x) {
        std::vector<StiffnessComponents> f(static_cast<std::size_t>(ne));
        for (int e = 0; e < ne; ++e) {
            std::array<double, 4> a{};
            for (std::size_t k = 0; k < 4; ++k) a[k] = lo[k] + x(4 * e + static_cast<int>(k)) * range[k];
            f[static_cast<std::size_t>(e)] = StiffnessComponents::from_array(a);
        }
        return f;
    };

    Eigen::VectorXd x(n);
    const auto c0 = space.centroid.to_array();
    for (int e = 0; e < ne; ++e)
        for (std::size_t k = 0; k < 4; ++k) x(4 * e + static_cast<int>(k)) = (c0[k] - lo[k]) / range[k];
    const Eigen::VectorXd xmin = Eigen::VectorXd::Zero(n), xmax = Eigen::VectorXd::Ones(n);

    Mma mma(n, 1, cfg.mma);
    OptimResult res;
    double scale = 1.0;
    int failures = 0;
    for (int iter = 1;; ++iter) {
        const auto field = to_field(x);
        MacroSolver solver(problem, field);
        const Eigen::VectorXd& u = solver.displacement();
        const double f = objective_value(u, problem);
        if (iter == 1) {
            res.initial_objective = f;
            scale = f > 0.0 ? 1.0 / f : 1.0;
        }
        const Sensitivities sens = solver.sensitivities();

        std::vector<double> phi(static_cast<std::size_t>(ne));
        std::vector<std::array<double, 4>> dphi(static_cast<std::size_t>(ne));
        for (int e = 0; e < ne; ++e) {
            const Feasibility fe = feasibility_phi(field[static_cast<std::size_t>(e)], sdf);
            phi[static_cast<std::size_t>(e)] = fe.phi;
            dphi[static_cast<std::size_t>(e)] = fe.gradient;
        }
        const double beta = beta_at(cfg, iter);
        const AggregatedConstraint g = aggregate_constraint(phi, beta);

        IterationRecord rec{iter, f, rrmse_or_nan(u, problem), g.value, 0.0};
        res.final_phi = phi;
        if (iter > cfg.max_iters) {
            res.history.push_back(rec);
            break;
        }

        Eigen::VectorXd df0(n);
        Eigen::MatrixXd dfdx(1, n);
        for (int e = 0; e < ne; ++e)
            for (std::size_t k = 0; k < 4; ++k) {
                const int i = 4 * e + static_cast<int>(k);
                df0(i) = scale * sens[static_cast<std::size_t>(e)][k] * range[k];
                // Constraint scaled by N_e: sum S(-phi_e) - 1 <= 0.
                dfdx(0, i) = ne * g.gradient[static_cast<std::size_t>(e)] * dphi[static_cast<std::size_t>(e)][k] * range[k];
            }
        Eigen::VectorXd fval(1);
        fval(0) = ne * (g.value - g.bound);

        Eigen::VectorXd xnew = guarded_update(mma, failures, cfg, x, scale * f, df0, fval, dfdx, xmin, xmax);
        // The box admits C12^2 >= C11 C22; clip C12 back inside the
        // positive-definite cone where needed.
        for (int e = 0; e < ne; ++e) {
            const double c11 = lo[0] + xnew(4 * e) * range[0], c22 = lo[2] + xnew(4 * e + 2) * range[2];
            const double cap = std::sqrt(std::max(0.0, 0.999 * c11 * c22));
            const double c12 = std::clamp(lo[1] + xnew(4 * e + 1) * range[1], -cap, cap);
            xnew(4 * e + 1) = std::clamp((c12 - lo[1]) / range[1], 0.0, 1.0);
        }
        rec.max_move = (xnew - x).cwiseAbs().maxCoeff();
        res.history.push_back(rec);
        x = xnew;
        if (rec.max_move < cfg.move_tolerance) {
            res.converged = true;
            // Record the state at the final design.
            const auto ff = to_field(x);
            const Eigen::VectorXd uf = assemble_and_solve(problem, ff);
            std::vector<double> pf;
            for (const auto& c : ff) pf.push_back(feasibility_phi(c, sdf).phi);
            res.history.push_back({iter + 1, objective_value(uf, problem), rrmse_or_nan(uf, problem),
                                   aggregate_constraint(pf, beta_at(cfg, iter + 1)).value, 0.0});
            res.final_phi = pf;
            break;
        }
    }

    res.field.values = to_field(x);
    res.field.lower = space.lower;
    res.field.upper = space.upper;
    if (cfg.restore_feasibility) {
        for (int e = 0; e < ne; ++e) {
            auto& c = res.field.values[static_cast<std::size_t>(e)];
            if (feasibility_phi(c, sdf).phi >= -cfg.feasibility_tolerance) continue;
            c = restore_point(c, sdf, space, 0.0);
            ++res.restored_elements;
        }
        res.final_phi.clear();
        for (const auto& c : res.field.values) res.final_phi.push_back(feasibility_phi(c, sdf).phi);
    }
    const Eigen::VectorXd u = assemble_and_solve(problem, res.field.values);
    res.final_objective = objective_value(u, problem);
    res.final_rrmse = rrmse_or_nan(u, problem);
    return res;
}

OptimResult optimize_properties(const MacroProblem& problem, const GradationCurve& curve, const OptimConfig& cfg) {
    cfg.validate();
    problem.validate();
    const int ne = problem.element_count();
    // A zero parameter gives a zero stiffness matrix, so keep t_e off the origin.
    const double tmin = 1e-3 * curve.c_max(), tmax = curve.c_max();
    const double span = tmax - tmin;
    auto param = [&](const Eigen::VectorXd& x, int e) { return std::clamp(tmin + x(e) * span, 0.0, tmax); };
    auto to_field = [&](const Eigen::VectorXd& x) {
        std::vector<StiffnessComponents> f(static_cast<std::size_t>(ne));
        for (int e = 0; e < ne; ++e) f[static_cast<std::size_t>(e)] = curve.evaluate(param(x, e));
        return f;
    };

    Eigen::VectorXd x = Eigen::VectorXd::Constant(ne, (0.5 * curve.c_max() - tmin) / span);
    const Eigen::VectorXd xmin = Eigen::VectorXd::Zero(ne), xmax = Eigen::VectorXd::Ones(ne);
    Mma mma(ne, 1, cfg.mma);
    OptimResult res;
    double scale = 1.0;
    int failures = 0;
    for (int iter = 1;; ++iter) {
        const auto field = to_field(x);
        MacroSolver solver(problem, field);
        const Eigen::VectorXd& u = solver.displacement();
        const double f = objective_value(u, problem);
        if (iter == 1) {
            res.initial_objective = f;
            scale = f > 0.0 ? 1.0 / f : 1.0;
        }
        IterationRecord rec{iter, f, rrmse_or_nan(u, problem), 0.0, 0.0};
        if (iter > cfg.max_iters) {
            res.history.push_back(rec);
            break;
        }
        const Sensitivities sens = solver.sensitivities();
        Eigen::VectorXd df0(ne);
        for (int e = 0; e < ne; ++e) {
            const auto d = curve.derivative(param(x, e)).to_array();
            double s = 0.0;
            for (std::size_t k = 0; k < 4; ++k) s += sens[static_cast<std::size_t>(e)][k] * d[k];
            df0(e) = scale * s * span;
        }
        // The curve equality holds by construction; MMA gets an inactive constraint.
        Eigen::VectorXd fval = Eigen::VectorXd::Constant(1, -1.0);
        Eigen::MatrixXd dfdx = Eigen::MatrixXd::Zero(1, ne);
        const Eigen::VectorXd xnew = guarded_update(mma, failures, cfg, x, scale * f, df0, fval, dfdx, xmin, xmax);
        rec.max_move = (xnew - x).cwiseAbs().maxCoeff();
        res.history.push_back(rec);
        x = xnew;
        if (rec.max_move < cfg.move_tolerance) {
            res.converged = true;
            const Eigen::VectorXd uf = assemble_and_solve(problem, to_field(x));
            res.history.push_back({iter + 1, objective_value(uf, problem), rrmse_or_nan(uf, problem), 0.0, 0.0});
            break;
        }
    }
    res.field.values = to_field(x);
    {
        std::vector<StiffnessComponents> samples;
        for (int i = 0; i <= 512; ++i) samples.push_back(curve.evaluate(curve.c_max() * i / 512.0));
        const DesignSpace box = design_space(samples);
        res.field.lower = box.lower;
        res.field.upper = box.upper;
    }
    for (int e = 0; e < ne; ++e) res.curve_parameter.push_back(param(x, e));
    const Eigen::VectorXd u = assemble_and_solve(problem, res.field.values);
    res.final_objective = objective_value(u, problem);
    res.final_rrmse = rrmse_or_nan(u, problem);
    return res;
}

void write_history_csv(const std::vector<IterationRecord>& history, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open history file: " + path);
    os << "iter,F,RRMSE,g,max_move\n";
    char buf[256];
    for (const auto& h : history) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", h.iter, h.objective, h.rrmse, h.constraint,
                      h.max_move);
        os << buf;
    }
}

void write_field_csv(const PropertyField& field, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open field file: " + path);
    os << "e,C11,C12,C22,C33\n";
    char buf[256];
    for (std::size_t e = 0; e < field.values.size(); ++e) {
        const auto& c = field.values[e];
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", e, c.c11, c.c12, c.c22, c.c33);
        os << buf;
    }
}

}  // namespace metadesign
