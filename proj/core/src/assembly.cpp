#include "metadesign/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "metadesign/error.hpp"
#include "metadesign/parallel.hpp"

namespace metadesign {

double nodal_weight(const StiffnessComponents& c, const StiffnessComponents& target, const PropertyScaler& scaler) {
    const auto a = scaler.standardize(c), b = scaler.standardize(target);
    double m = 0.0;
    for (std::size_t k = 0; k < 4; ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

namespace {

std::pair<Side, Side> touching(Orientation o) {
    return o == Orientation::horizontal ? std::pair{Side::right, Side::left} : std::pair{Side::bottom, Side::top};
}

}  // namespace

double geometric_incompat(const Microstructure& a, const Microstructure& b, Orientation o) {
    if (a.height() != b.height() || a.width() != b.width()) throw DimensionError("cells must share a grid size");
    const auto [sa, sb] = touching(o);
    const auto x = boundary_strip(a, sa), y = boundary_strip(b, sb);
    std::size_t mismatch = 0, any = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mismatch += (x[i] != y[i]) ? 1 : 0;
        any += (x[i] || y[i]) ? 1 : 0;
    }
    return any == 0 ? 1.0 : static_cast<double>(mismatch) / static_cast<double>(any);
}

double mechanical_incompat(const BoundaryStressTraces& a, const BoundaryStressTraces& b, Orientation o) {
    constexpr double eps_den = 1e-12;
    const auto [sa, sb] = touching(o);
    double num = 0.0, den = 0.0;
    for (int k = 0; k < 3; ++k) {
        const auto& x = a.trace(sa, static_cast<StrainCase>(k));
        const auto& y = b.trace(sb, static_cast<StrainCase>(k));
        if (x.size() != y.size()) throw DimensionError("trace lengths differ");
        for (std::size_t i = 0; i < x.size(); ++i) {
            num += std::abs(x[i] - y[i]);
            den += std::abs(x[i]) + std::abs(y[i]);
        }
    }
    return den < eps_den ? 1.0 : num / den;
}

GridMrf AssemblyGraph::to_mrf() const {
    GridMrf m;
    m.rows = ny;
    m.cols = nx;
    m.unary = unary;
    m.horizontal.resize(static_cast<std::size_t>(ny * (nx - 1)));
    m.vertical.resize(static_cast<std::size_t>((ny - 1) * nx));
    for (const auto& e : edges) {
        const Eigen::MatrixXd t = geometric_weight * e.geometric + mechanical_weight * e.mechanical;
        const int iy = e.a / nx, ix = e.a % nx;
        if (e.orientation == Orientation::horizontal) m.horizontal[static_cast<std::size_t>(iy * (nx - 1) + ix)] = t;
        else m.vertical[static_cast<std::size_t>(iy * nx + ix)] = t;
    }
    return m;
}

AssemblyGraph build_assembly_graph(const MacroProblem& problem, const std::vector<StiffnessComponents>& field,
                                   const Database& db, const PropertyScaler& scaler, const PcaModel& pca,
                                   const AssemblyOptions& opts) {
    problem.validate();
    if (static_cast<int>(field.size()) != problem.element_count())
        throw DimensionError("property field size does not match the mesh");
    AssemblyGraph g;
    g.nx = problem.nx;
    g.ny = problem.ny;
    g.targets = field;
    g.geometric_weight = opts.geometric_weight;
    g.mechanical_weight = opts.mechanical_weight;
    const int ne = problem.element_count();

    for (int e = 0; e < ne; ++e) {
        CandidateOptions co = opts.candidates;
        for (int attempt = 0;; ++attempt) {
            try {
                g.candidates.push_back(diverse_candidates(db, field[static_cast<std::size_t>(e)], scaler, pca, co));
                g.admission_used.push_back(co.admission_mse);
                break;
            } catch (const NoFeasibleCandidate&) {
                if (attempt >= opts.max_relaxations)
                    throw NoFeasibleCandidate("no candidate within the admission MSE for element " + std::to_string(e), e);
                co.admission_mse *= 2.0;
            }
        }
        std::vector<double> u;
        for (const auto& c : g.candidates.back().entries)
            u.push_back(nodal_weight(c.properties, field[static_cast<std::size_t>(e)], scaler));
        g.unary.push_back(std::move(u));
    }

    // Boundary traces once per distinct candidate.
    std::vector<std::int64_t> ids;
    for (const auto& cs : g.candidates)
        for (const auto& c : cs.entries) ids.push_back(c.id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::vector<BoundaryStressTraces> traces(ids.size());
    parallel_for(ids.size(), [&](std::size_t i) {
        const auto& r = db.at_id(ids[i]);
        traces[i] = r.traces ? *r.traces : boundary_stress_traces(r.cell, opts.material);
    });
    auto trace_of = [&](std::int64_t id) -> const BoundaryStressTraces& {
        return traces[static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin())];
    };

    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            const int e = iy * g.nx + ix;
            if (ix + 1 < g.nx) g.edges.push_back({e, e + 1, Orientation::horizontal, {}, {}});
            if (iy + 1 < g.ny) g.edges.push_back({e, e + g.nx, Orientation::vertical, {}, {}});
        }
    parallel_for(g.edges.size(), [&](std::size_t k) {
        auto& edge = g.edges[k];
        const auto& ca = g.candidates[static_cast<std::size_t>(edge.a)].entries;
        const auto& cb = g.candidates[static_cast<std::size_t>(edge.b)].entries;
        edge.geometric.resize(static_cast<Eigen::Index>(ca.size()), static_cast<Eigen::Index>(cb.size()));
        edge.mechanical.resizeLike(edge.geometric);
        for (std::size_t i = 0; i < ca.size(); ++i)
            for (std::size_t j = 0; j < cb.size(); ++j) {
                const auto& ma = db.at_id(ca[i].id).cell;
                const auto& mb = db.at_id(cb[j].id).cell;
                const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
                if (edge.orientation == Orientation::horizontal) {
                    edge.geometric(ii, jj) = geometric_incompat(ma, mb, Orientation::horizontal);
                    edge.mechanical(ii, jj) = mechanical_incompat(trace_of(ca[i].id), trace_of(cb[j].id), Orientation::horizontal);
                } else {
                    // b sits above a in the macro mesh (y up).
                    edge.geometric(ii, jj) = geometric_incompat(mb, ma, Orientation::vertical);
                    edge.mechanical(ii, jj) = mechanical_incompat(trace_of(cb[j].id), trace_of(ca[i].id), Orientation::vertical);
                }
            }
    });
    return g;
}

StitchResult stitch_and_evaluate(const std::vector<int>& labels, const AssemblyGraph& g, const MacroProblem& problem,
                                 const Database& db) {
    const int ne = g.nx * g.ny;
    if (static_cast<int>(labels.size()) != ne) throw DimensionError("labeling size does not match the graph");
    StitchResult out;
    const int h = db.header.height, w = db.header.width;
    out.structure = Microstructure(g.ny * h, g.nx * w);
    for (int e = 0; e < ne; ++e) {
        const auto& entries = g.candidates[static_cast<std::size_t>(e)].entries;
        const int l = labels[static_cast<std::size_t>(e)];
        if (l < 0 || l >= static_cast<int>(entries.size())) throw DomainError("label out of range");
        const auto& rec = db.at_id(entries[static_cast<std::size_t>(l)].id);
        out.ids.push_back(rec.id);
        out.properties.push_back(rec.properties);
        const int ix = e % g.nx, iy = e / g.nx;
        const int r0 = (g.ny - 1 - iy) * h, c0 = ix * w;
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) out.structure(r0 + r, c0 + c) = rec.cell(r, c);
    }
    const Eigen::VectorXd u = assemble_and_solve(problem, out.properties);
    out.objective = objective_value(u, problem);
    out.rrmse = problem.target_vector().norm() > 0.0 ? objective_and_rrmse(u, problem).rrmse
                                                      : std::numeric_limits<double>::quiet_NaN();
    double sg = 0.0, sm = 0.0;
    for (const auto& e : g.edges) {
        const auto la = labels[static_cast<std::size_t>(e.a)], lb = labels[static_cast<std::size_t>(e.b)];
        sg += e.geometric(la, lb);
        sm += e.mechanical(la, lb);
    }
    if (!g.edges.empty()) {
        out.mean_geometric = sg / static_cast<double>(g.edges.size());
        out.mean_mechanical = sm / static_cast<double>(g.edges.size());
    }
    out.energy = mrf_energy(g.to_mrf(), labels);
    return out;
}

}  // namespace metadesign
