#pragma once

#include <vector>

#include <Eigen/Core>

namespace metadesign {

/// Pairwise MRF on a rows x cols grid; node (r, c) has index r*cols + c.
/// horizontal[r*(cols-1) + c] couples (r,c)-(r,c+1) as table(l_left, l_right);
/// vertical[r*cols + c] couples (r,c)-(r+1,c) as table(l_low_r, l_high_r).
struct GridMrf {
    int rows = 1;
    int cols = 1;
    std::vector<std::vector<double>> unary;
    std::vector<Eigen::MatrixXd> horizontal;
    std::vector<Eigen::MatrixXd> vertical;

    int node_count() const { return rows * cols; }
    int labels(int node) const { return static_cast<int>(unary[static_cast<std::size_t>(node)].size()); }
    /// Throws DimensionError when table shapes disagree with the label counts.
    void validate() const;
};

double mrf_energy(const GridMrf& mrf, const std::vector<int>& labeling);

struct Labeling {
    std::vector<int> labels;
    double primal = 0.0;  // energy of `labels`
    double dual = 0.0;    // best lower bound
    int iterations = 0;
    bool converged = false;  // gap closed: `labels` is a certified optimum
    std::vector<double> dual_history;    // accepted dual value per iteration
    std::vector<double> primal_history;  // best primal per iteration
};

struct DdOptions {
    int max_iters = 5000;
    double gap_tolerance = 1e-9;  // relative to 1 + |dual|
    double initial_step_scale = 1.0;
    double step_decay = 0.95;
};

/// Row/column chain decomposition solved by min-sum dynamic programming,
/// projected supergradient ascent on the split unary potentials.
Labeling dd_mrf_solve(const GridMrf& mrf, const DdOptions& opts = {});

/// Exhaustive minimum; only for tiny grids.
Labeling brute_force_mrf(const GridMrf& mrf);

}  // namespace metadesign
