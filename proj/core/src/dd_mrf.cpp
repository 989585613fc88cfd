#include "metadesign/dd_mrf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "metadesign/error.hpp"

namespace metadesign {

void GridMrf::validate() const {
    if (rows < 1 || cols < 1) throw DimensionError("MRF grid must be non-empty");
    if (static_cast<int>(unary.size()) != node_count()) throw DimensionError("one unary table per node expected");
    for (const auto& u : unary)
        if (u.empty()) throw DimensionError("every node needs at least one label");
    if (static_cast<int>(horizontal.size()) != rows * (cols - 1) || static_cast<int>(vertical.size()) != (rows - 1) * cols)
        throw DimensionError("pairwise table count does not match the grid");
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c + 1 < cols; ++c) {
            const auto& t = horizontal[static_cast<std::size_t>(r * (cols - 1) + c)];
            if (t.rows() != labels(r * cols + c) || t.cols() != labels(r * cols + c + 1))
                throw DimensionError("horizontal table shape mismatch");
        }
    for (int r = 0; r + 1 < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const auto& t = vertical[static_cast<std::size_t>(r * cols + c)];
            if (t.rows() != labels(r * cols + c) || t.cols() != labels((r + 1) * cols + c))
                throw DimensionError("vertical table shape mismatch");
        }
}

double mrf_energy(const GridMrf& mrf, const std::vector<int>& x) {
    if (static_cast<int>(x.size()) != mrf.node_count()) throw DimensionError("labeling size mismatch");
    double e = 0.0;
    for (int i = 0; i < mrf.node_count(); ++i) e += mrf.unary[static_cast<std::size_t>(i)][static_cast<std::size_t>(x[static_cast<std::size_t>(i)])];
    for (int r = 0; r < mrf.rows; ++r)
        for (int c = 0; c + 1 < mrf.cols; ++c)
            e += mrf.horizontal[static_cast<std::size_t>(r * (mrf.cols - 1) + c)](x[static_cast<std::size_t>(r * mrf.cols + c)],
                                                                                 x[static_cast<std::size_t>(r * mrf.cols + c + 1)]);
    for (int r = 0; r + 1 < mrf.rows; ++r)
        for (int c = 0; c < mrf.cols; ++c)
            e += mrf.vertical[static_cast<std::size_t>(r * mrf.cols + c)](x[static_cast<std::size_t>(r * mrf.cols + c)],
                                                                         x[static_cast<std::size_t>((r + 1) * mrf.cols + c)]);
    return e;
}

namespace {

struct Chain {
    std::vector<int> nodes;
    std::vector<const Eigen::MatrixXd*> pairwise;  // between nodes[i] and nodes[i+1]
    double sign = 1.0;                             // +lambda for rows, -lambda for columns
};

struct ChainSolution {
    double value = 0.0;
    std::vector<int> labels;
    std::vector<std::vector<double>> min_marginals;
};

ChainSolution solve_chain(const Chain& ch, const std::vector<std::vector<double>>& unary) {
    const std::size_t n = ch.nodes.size();
    std::vector<std::vector<double>> fwd(n), bwd(n);
    std::vector<std::vector<int>> arg(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& u = unary[static_cast<std::size_t>(ch.nodes[i])];
        fwd[i] = u;
        arg[i].assign(u.size(), 0);
        if (i == 0) continue;
        const auto& p = *ch.pairwise[i - 1];
        for (std::size_t l = 0; l < u.size(); ++l) {
            double best = std::numeric_limits<double>::infinity();
            int bl = 0;
            for (std::size_t k = 0; k < fwd[i - 1].size(); ++k) {
                const double v = fwd[i - 1][k] + p(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
                if (v < best) {
                    best = v;
                    bl = static_cast<int>(k);
                }
            }
            fwd[i][l] += best;
            arg[i][l] = bl;
        }
    }
    for (std::size_t ii = n; ii-- > 0;) {
        const auto& u = unary[static_cast<std::size_t>(ch.nodes[ii])];
        bwd[ii] = u;
        if (ii + 1 == n) continue;
        const auto& p = *ch.pairwise[ii];
        for (std::size_t l = 0; l < u.size(); ++l) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < bwd[ii + 1].size(); ++k)
                best = std::min(best, bwd[ii + 1][k] + p(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)));
            bwd[ii][l] += best;
        }
    }
    ChainSolution s;
    s.labels.assign(n, 0);
    const auto& last = fwd[n - 1];
    const auto it = std::min_element(last.begin(), last.end());
    s.value = *it;
    s.labels[n - 1] = static_cast<int>(it - last.begin());
    for (std::size_t i = n - 1; i > 0; --i) s.labels[i - 1] = arg[i][static_cast<std::size_t>(s.labels[i])];
    s.min_marginals.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& u = unary[static_cast<std::size_t>(ch.nodes[i])];
        s.min_marginals[i].resize(u.size());
        for (std::size_t l = 0; l < u.size(); ++l) s.min_marginals[i][l] = fwd[i][l] + bwd[i][l] - u[l];
    }
    return s;
}

}  // namespace

Labeling dd_mrf_solve(const GridMrf& mrf, const DdOptions& opts) {
    mrf.validate();
    if (opts.max_iters < 1) throw DomainError("max_iters must be at least 1");
    const int rows = mrf.rows, cols = mrf.cols, nn = mrf.node_count();

    std::vector<Chain> row_chains(static_cast<std::size_t>(rows)), col_chains(static_cast<std::size_t>(cols));
    for (int r = 0; r < rows; ++r) {
        auto& ch = row_chains[static_cast<std::size_t>(r)];
        for (int c = 0; c < cols; ++c) {
            ch.nodes.push_back(r * cols + c);
            if (c + 1 < cols) ch.pairwise.push_back(&mrf.horizontal[static_cast<std::size_t>(r * (cols - 1) + c)]);
        }
    }
    for (int c = 0; c < cols; ++c) {
        auto& ch = col_chains[static_cast<std::size_t>(c)];
        ch.sign = -1.0;
        for (int r = 0; r < rows; ++r) {
            ch.nodes.push_back(r * cols + c);
            if (r + 1 < rows) ch.pairwise.push_back(&mrf.vertical[static_cast<std::size_t>(r * cols + c)]);
        }
    }

    std::vector<std::vector<double>> lambda(static_cast<std::size_t>(nn));
    for (int i = 0; i < nn; ++i) lambda[static_cast<std::size_t>(i)].assign(mrf.unary[static_cast<std::size_t>(i)].size(), 0.0);

    struct DualState {
        double value = 0.0;
        std::vector<int> row_labels, col_labels;    // per node
        std::vector<std::vector<double>> marginal;  // summed min-marginals per node
    };
    auto evaluate = [&](const std::vector<std::vector<double>>& lam) {
        DualState st;
        st.row_labels.assign(static_cast<std::size_t>(nn), 0);
        st.col_labels.assign(static_cast<std::size_t>(nn), 0);
        st.marginal.resize(static_cast<std::size_t>(nn));
        std::vector<std::vector<double>> row_u(static_cast<std::size_t>(nn)), col_u(static_cast<std::size_t>(nn));
        for (int i = 0; i < nn; ++i) {
            const auto& u = mrf.unary[static_cast<std::size_t>(i)];
            auto& ru = row_u[static_cast<std::size_t>(i)];
            auto& cu = col_u[static_cast<std::size_t>(i)];
            ru.resize(u.size());
            cu.resize(u.size());
            for (std::size_t l = 0; l < u.size(); ++l) {
                ru[l] = 0.5 * u[l] + lam[static_cast<std::size_t>(i)][l];
                cu[l] = 0.5 * u[l] - lam[static_cast<std::size_t>(i)][l];
            }
            st.marginal[static_cast<std::size_t>(i)].assign(u.size(), 0.0);
        }
        for (const auto& ch : row_chains) {
            const ChainSolution s = solve_chain(ch, row_u);
            st.value += s.value;
            for (std::size_t k = 0; k < ch.nodes.size(); ++k) {
                const auto node = static_cast<std::size_t>(ch.nodes[k]);
                st.row_labels[node] = s.labels[k];
                for (std::size_t l = 0; l < s.min_marginals[k].size(); ++l) st.marginal[node][l] += s.min_marginals[k][l];
            }
        }
        for (const auto& ch : col_chains) {
            const ChainSolution s = solve_chain(ch, col_u);
            st.value += s.value;
            for (std::size_t k = 0; k < ch.nodes.size(); ++k) {
                const auto node = static_cast<std::size_t>(ch.nodes[k]);
                st.col_labels[node] = s.labels[k];
                for (std::size_t l = 0; l < s.min_marginals[k].size(); ++l) st.marginal[node][l] += s.min_marginals[k][l];
            }
        }
        return st;
    };

    Labeling best;
    best.primal = std::numeric_limits<double>::infinity();
    auto consider = [&](const std::vector<int>& x) {
        const double e = mrf_energy(mrf, x);
        if (e < best.primal) {
            best.primal = e;
            best.labels = x;
        }
    };
    auto vote = [&](const DualState& st) {
        std::vector<int> x(static_cast<std::size_t>(nn));
        for (int i = 0; i < nn; ++i) {
            const auto& m = st.marginal[static_cast<std::size_t>(i)];
            x[static_cast<std::size_t>(i)] = static_cast<int>(std::min_element(m.begin(), m.end()) - m.begin());
        }
        return x;
    };

    DualState cur = evaluate(lambda);
    best.dual = cur.value;
    double alpha = opts.initial_step_scale;
    for (int it = 1; it <= opts.max_iters; ++it) {
        best.iterations = it;
        consider(vote(cur));
        consider(cur.row_labels);
        consider(cur.col_labels);
        best.dual = std::max(best.dual, cur.value);
        best.dual_history.push_back(best.dual);
        best.primal_history.push_back(best.primal);
        if (best.primal - best.dual <= opts.gap_tolerance * (1.0 + std::abs(best.dual))) {
            best.converged = true;
            break;
        }

        // Supergradient: +1 at the row-slave label, -1 at the column-slave label.
        double g2 = 0.0;
        for (int i = 0; i < nn; ++i)
            if (cur.row_labels[static_cast<std::size_t>(i)] != cur.col_labels[static_cast<std::size_t>(i)]) g2 += 2.0;
        if (g2 == 0.0) {
            // Slaves agree, so their common labeling attains the dual bound.
            consider(cur.row_labels);
            best.dual = std::max(best.dual, cur.value);
            continue;
        }
        const double step = alpha * (best.primal - cur.value) / g2;
        auto trial = lambda;
        for (int i = 0; i < nn; ++i) {
            const auto si = static_cast<std::size_t>(i);
            if (cur.row_labels[si] == cur.col_labels[si]) continue;
            // d/dlambda of the dual: +1 for the row label, -1 for the column label.
            trial[si][static_cast<std::size_t>(cur.row_labels[si])] += step;
            trial[si][static_cast<std::size_t>(cur.col_labels[si])] -= step;
        }
        DualState next = evaluate(trial);
        if (next.value > cur.value) {
            lambda = std::move(trial);
            cur = std::move(next);
        } else {
            consider(vote(next));
            consider(next.row_labels);
            consider(next.col_labels);
            alpha *= opts.step_decay;
        }
    }
    return best;
}

Labeling brute_force_mrf(const GridMrf& mrf) {
    mrf.validate();
    const int nn = mrf.node_count();
    std::vector<int> x(static_cast<std::size_t>(nn), 0);
    Labeling best;
    best.primal = std::numeric_limits<double>::infinity();
    for (;;) {
        const double e = mrf_energy(mrf, x);
        if (e < best.primal) {
            best.primal = e;
            best.labels = x;
        }
        int i = 0;
        while (i < nn) {
            if (++x[static_cast<std::size_t>(i)] < mrf.labels(i)) break;
            x[static_cast<std::size_t>(i)] = 0;
            ++i;
        }
        if (i == nn) break;
    }
    best.dual = best.primal;
    best.converged = true;
    best.iterations = 1;
    return best;
}

}  // namespace metadesign
