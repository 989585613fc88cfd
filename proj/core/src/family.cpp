#include "metadesign/family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "metadesign/error.hpp"
#include "metadesign/latent_ops.hpp"
#include "metadesign/parallel.hpp"

namespace metadesign {

GradationCurve::GradationCurve(std::string name, double c_max, Evaluator eval, Evaluator derivative, double delta)
    : name_(std::move(name)), c_max_(c_max), eval_(std::move(eval)), deriv_(std::move(derivative)), delta_(delta) {
    if (!(c_max > 0.0)) throw DomainError("curve range must be positive");
    if (!eval_ || !deriv_) throw DomainError("curve needs an evaluator and its derivative");
    set_delta(delta);
}

void GradationCurve::set_delta(double delta) {
    if (!(delta > 0.0)) throw DomainError("curve admission distance must be positive");
    delta_ = delta;
}

GradationCurve GradationCurve::graded_isotropic(const MaterialSpec& mat, double delta) {
    mat.validate();
    const double nu = mat.poisson_ratio;
    const double cm = mat.youngs_modulus / (1.0 - nu * nu);
    auto eval = [nu, cm](double c) {
        const double q = 1.0 - c / cm;
        const double c12 = ((1.0 - nu) * q * q * q * q + nu) * c;
        const double c33 = 0.25 * c * c * c - 0.65 * c * c + 0.6775 * c;
        return StiffnessComponents{c, c12, c, c33};
    };
    auto deriv = [nu, cm](double c) {
        const double q = 1.0 - c / cm;
        const double d12 = (1.0 - nu) * q * q * q * q + nu - 4.0 * (1.0 - nu) * q * q * q * c / cm;
        const double d33 = 0.75 * c * c - 1.3 * c + 0.6775;
        return StiffnessComponents{1.0, d12, 1.0, d33};
    };
    return GradationCurve("graded-isotropic", cm, eval, deriv, delta);
}

GradationCurve GradationCurve::tabulated(std::vector<std::pair<double, StiffnessComponents>> knots, double delta) {
    if (knots.size() < 2) throw DomainError("tabulated curve needs at least two knots");
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (!(knots[i].first > knots[i - 1].first)) throw DomainError("tabulated curve knots must increase");
    if (knots.front().first != 0.0) throw DomainError("tabulated curve must start at c = 0");
    const double cm = knots.back().first;
    auto segment = [knots](double c) {
        std::size_t i = 1;
        while (i + 1 < knots.size() && c > knots[i].first) ++i;
        return i;
    };
    auto eval = [knots, segment](double c) {
        const std::size_t i = segment(c);
        const double t = (c - knots[i - 1].first) / (knots[i].first - knots[i - 1].first);
        const auto a = knots[i - 1].second.to_array(), b = knots[i].second.to_array();
        std::array<double, 4> out{};
        for (std::size_t k = 0; k < 4; ++k) out[k] = (1.0 - t) * a[k] + t * b[k];
        return StiffnessComponents::from_array(out);
    };
    auto deriv = [knots, segment](double c) {
        const std::size_t i = segment(c);
        const double h = knots[i].first - knots[i - 1].first;
        const auto a = knots[i - 1].second.to_array(), b = knots[i].second.to_array();
        std::array<double, 4> out{};
        for (std::size_t k = 0; k < 4; ++k) out[k] = (b[k] - a[k]) / h;
        return StiffnessComponents::from_array(out);
    };
    return GradationCurve("tabulated", cm, eval, deriv, delta);
}

StiffnessComponents GradationCurve::evaluate(double c) const {
    if (!(c >= 0.0 && c <= c_max_)) throw DomainError("curve parameter outside [0, c_max]");
    return eval_(c);
}

StiffnessComponents GradationCurve::derivative(double c) const {
    if (!(c >= 0.0 && c <= c_max_)) throw DomainError("curve parameter outside [0, c_max]");
    return deriv_(c);
}

StiffnessComponents eval_gradation(const GradationCurve& curve, double c) { return curve.evaluate(c); }

namespace {

std::vector<std::array<double, 4>> sample_curve(const GradationCurve& curve, const PropertyScaler& scaler, int n) {
    if (n < 2) throw DomainError("curve sampling needs at least two samples");
    std::vector<std::array<double, 4>> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double c = curve.c_max() * static_cast<double>(i) / (n - 1);
        pts.push_back(scaler.standardize(curve.evaluate(c)));
    }
    return pts;
}

double min_distance(const std::vector<std::array<double, 4>>& pts, const std::array<double, 4>& z) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) best = std::min(best, squared_distance(p, z));
    return std::sqrt(best);
}

}  // namespace

double curve_distance(const GradationCurve& curve, const StiffnessComponents& props, const PropertyScaler& scaler,
                      int samples) {
    return min_distance(sample_curve(curve, scaler, samples), scaler.standardize(props));
}

std::vector<CurveSample> select_near_curve(const Database& db, const GradationCurve& curve,
                                           const PropertyScaler& scaler, int samples) {
    const auto pts = sample_curve(curve, scaler, samples);
    std::vector<CurveSample> out;
    for (const auto& r : db.records()) {
        const double d = min_distance(pts, scaler.standardize(r.properties));
        if (d <= curve.delta()) out.push_back({r.id, r.properties.c11, d});
    }
    if (out.empty()) throw EmptySelection("no database record lies within delta of the curve");
    std::sort(out.begin(), out.end(), [](const CurveSample& a, const CurveSample& b) {
        return a.controlled != b.controlled ? a.controlled < b.controlled : a.id < b.id;
    });
    return out;
}

FamilyGraph build_family_graph(const Database& db, const std::vector<CurveSample>& ranked, int k, int n) {
    if (ranked.size() < 2) throw DomainError("family graph needs at least two ranked records");
    if (k < 1 || n < 1) throw DomainError("family graph parameters k and N must be positive");
    FamilyGraph g;
    g.member_count = static_cast<int>(ranked.size());
    g.k = k;
    g.n_terminal = n;
    g.adjacency.assign(static_cast<std::size_t>(g.node_count()), {});
    std::vector<const LatentVector*> z;
    for (const auto& s : ranked) {
        const auto& r = db.at_id(s.id);
        if (!r.latent) throw DomainError("family graph needs latent-annotated records");
        z.push_back(&*r.latent);
        g.ids.push_back(s.id);
    }
    for (int i = 0; i < g.member_count; ++i) {
        std::vector<std::pair<double, int>> cand;
        for (int j = i + 1; j < g.member_count; ++j)
            if (ranked[static_cast<std::size_t>(j)].controlled > ranked[static_cast<std::size_t>(i)].controlled)
                cand.emplace_back(latent_distance(*z[static_cast<std::size_t>(i)], *z[static_cast<std::size_t>(j)]), j);
        const std::size_t keep = std::min(cand.size(), static_cast<std::size_t>(k));
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(keep), cand.end());
        for (std::size_t c = 0; c < keep; ++c)
            g.adjacency[static_cast<std::size_t>(i)].push_back({cand[c].second, cand[c].first});
    }
    const int terminal = std::min(n, g.member_count);
    for (int i = 0; i < terminal; ++i) {
        g.adjacency[static_cast<std::size_t>(g.source())].push_back({i, 0.0});
        g.adjacency[static_cast<std::size_t>(g.member_count - terminal + i)].push_back({g.sink(), 0.0});
    }
    return g;
}

std::optional<GraphPath> shortest_path(const FamilyGraph& g, const std::vector<char>& removed) {
    const auto nn = static_cast<std::size_t>(g.node_count());
    std::vector<double> dist(nn, std::numeric_limits<double>::infinity());
    std::vector<int> prev(nn, -1);
    std::vector<char> done(nn, 0);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[static_cast<std::size_t>(g.source())] = 0.0;
    pq.emplace(0.0, g.source());
    auto is_removed = [&](int v) { return v < g.member_count && static_cast<std::size_t>(v) < removed.size() && removed[static_cast<std::size_t>(v)]; };
    while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        if (done[static_cast<std::size_t>(u)]) continue;
        done[static_cast<std::size_t>(u)] = 1;
        if (u == g.sink()) break;
        for (const auto& e : g.adjacency[static_cast<std::size_t>(u)]) {
            if (e.weight < 0.0) throw DomainError("negative edge weight");
            if (is_removed(e.to)) continue;
            const double nd = d + e.weight;
            auto& cur = dist[static_cast<std::size_t>(e.to)];
            if (nd < cur || (nd == cur && u < prev[static_cast<std::size_t>(e.to)])) {
                cur = nd;
                prev[static_cast<std::size_t>(e.to)] = u;
                pq.emplace(nd, e.to);
            }
        }
    }
    if (!std::isfinite(dist[static_cast<std::size_t>(g.sink())])) return std::nullopt;
    GraphPath path;
    path.length = dist[static_cast<std::size_t>(g.sink())];
    for (int v = prev[static_cast<std::size_t>(g.sink())]; v != g.source() && v >= 0; v = prev[static_cast<std::size_t>(v)])
        path.nodes.push_back(v);
    std::reverse(path.nodes.begin(), path.nodes.end());
    return path;
}

std::vector<GraphPath> extract_paths(const FamilyGraph& g, int count) {
    std::vector<GraphPath> out;
    std::vector<char> removed(static_cast<std::size_t>(g.member_count), 0);
    while (static_cast<int>(out.size()) < count) {
        auto p = shortest_path(g, removed);
        if (!p || p->nodes.empty()) break;
        for (int v : p->nodes) removed[static_cast<std::size_t>(v)] = 1;
        out.push_back(std::move(*p));
    }
    return out;
}

FamilyExtraction extract_families(const FamilyGraph& g, const Database& db, const GradationCurve& curve,
                                  const PropertyScaler& scaler, int count) {
    FamilyExtraction out;
    const auto paths = extract_paths(g, count);
    out.complete = static_cast<int>(paths.size()) == count;
    for (const auto& p : paths) {
        MetamaterialFamily fam;
        fam.path_length = p.length;
        for (int v : p.nodes) {
            const auto& r = db.at_id(g.ids[static_cast<std::size_t>(v)]);
            fam.members.push_back({r.id, r.cell, r.properties, *r.latent, curve_distance(curve, r.properties, scaler)});
        }
        out.families.push_back(std::move(fam));
    }
    return out;
}

MetamaterialFamily densify_family(const MetamaterialFamily& fam, const LatentModel& model, const GradationCurve& curve,
                                  const PropertyScaler& scaler, const DensifyOptions& opts) {
    if (opts.samples_per_edge < 0) throw DomainError("samples_per_edge must be non-negative");
    if (opts.samples_per_edge == 0 || fam.members.empty()) return fam;

    // Slots: existing members keep their place, inserted ones are decoded below.
    struct Slot {
        const FamilyMember* existing = nullptr;
        LatentVector z;
    };
    std::vector<Slot> slots;
    const int spe = opts.samples_per_edge;
    const auto& m = fam.members;
    if (opts.extrapolate && m.size() >= 2)
        for (int i = spe; i >= 1; --i) slots.push_back({nullptr, interpolate(m[0].latent, m[1].latent, -0.25 * i / spe)});
    for (std::size_t a = 0; a < m.size(); ++a) {
        slots.push_back({&m[a], {}});
        if (a + 1 == m.size()) break;
        for (int i = 1; i <= spe; ++i)
            slots.push_back({nullptr, interpolate(m[a].latent, m[a + 1].latent, static_cast<double>(i) / (spe + 1))});
    }
    if (opts.extrapolate && m.size() >= 2) {
        const auto& p = m[m.size() - 2];
        const auto& q = m.back();
        for (int i = 1; i <= spe; ++i) slots.push_back({nullptr, interpolate(p.latent, q.latent, 1.0 + 0.25 * i / spe)});
    }

    std::vector<std::optional<FamilyMember>> built(slots.size());
    std::vector<Microstructure> decoded(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i)
        if (!slots[i].existing) decoded[i] = decode_cell(slots[i].z, model);
    parallel_for(slots.size(), [&](std::size_t i) {
        if (slots[i].existing) {
            built[i] = *slots[i].existing;
            return;
        }
        if (decoded[i].solid_count() == 0) return;
        const StiffnessComponents props = homogenize(decoded[i], opts.material);
        built[i] = FamilyMember{std::nullopt, decoded[i], props, slots[i].z, curve_distance(curve, props, scaler)};
    });

    MetamaterialFamily out;
    out.path_length = fam.path_length;
    out.failed_insertions = fam.failed_insertions;
    for (auto& b : built) {
        if (b) out.members.push_back(std::move(*b));
        else ++out.failed_insertions;
    }
    return out;
}

}  // namespace metadesign
