#pragma once

#include <Eigen/Core>

namespace metadesign {

struct MmaSettings {
    double asymptote_init = 0.5;
    double asymptote_decrease = 0.7;
    double asymptote_increase = 1.2;
    double move_limit = 0.2;  // fraction of the variable range per iteration
    double albefa = 0.1;
    double a0 = 1.0;
    double c = 1000.0;
    double d = 1.0;
};

/// Method of moving asymptotes for
///   min f0(x)  s.t.  f_i(x) <= 0, i = 1..m,  xmin <= x <= xmax
/// with the subproblem solved by a primal-dual interior point method.
class Mma {
public:
    Mma(int n, int m, MmaSettings settings = {});

    /// One outer iteration. `dfdx` is m x n. Returns the next design.
    /// Throws SolverFailure when the subproblem produces a non-finite point.
    Eigen::VectorXd update(const Eigen::VectorXd& x, double f0, const Eigen::VectorXd& df0dx,
                           const Eigen::VectorXd& fval, const Eigen::MatrixXd& dfdx,
                           const Eigen::VectorXd& xmin, const Eigen::VectorXd& xmax);

    /// Forget iteration history; the next update re-initializes the asymptotes.
    void reset_asymptotes();

    int iteration() const noexcept { return iter_; }
    const Eigen::VectorXd& lower_asymptote() const noexcept { return low_; }
    const Eigen::VectorXd& upper_asymptote() const noexcept { return upp_; }

private:
    int n_;
    int m_;
    MmaSettings s_;
    int iter_ = 0;
    Eigen::VectorXd xold1_, xold2_, low_, upp_;
};

}  // namespace metadesign
