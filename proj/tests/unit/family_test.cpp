#include <doctest.h>

#include <functional>
#include <random>
#include <set>

#include "metadesign/error.hpp"
#include "metadesign/family.hpp"

using namespace metadesign;

namespace {

// Random DAG over members 0..n-1 (edges only to larger indices), random
// source and sink attachments.
FamilyGraph random_dag(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> w(0.1, 2.0), coin(0.0, 1.0);
    FamilyGraph g;
    g.member_count = n;
    g.adjacency.assign(static_cast<std::size_t>(n + 2), {});
    for (int i = 0; i < n; ++i) {
        g.ids.push_back(i);
        for (int j = i + 1; j < n; ++j)
            if (coin(rng) < 0.35) g.adjacency[static_cast<std::size_t>(i)].push_back({j, w(rng)});
        if (coin(rng) < 0.3) g.adjacency[static_cast<std::size_t>(g.source())].push_back({i, 0.0});
        if (coin(rng) < 0.3) g.adjacency[static_cast<std::size_t>(i)].push_back({g.sink(), 0.0});
    }
    return g;
}

double brute_force_shortest(const FamilyGraph& g, const std::vector<char>& removed) {
    double best = std::numeric_limits<double>::infinity();
    std::function<void(int, double)> dfs = [&](int v, double len) {
        if (v == g.sink()) {
            best = std::min(best, len);
            return;
        }
        for (const auto& e : g.adjacency[static_cast<std::size_t>(v)]) {
            if (e.to < g.member_count && removed[static_cast<std::size_t>(e.to)]) continue;
            dfs(e.to, len + e.weight);
        }
    };
    dfs(g.source(), 0.0);
    return best;
}

double path_weight(const FamilyGraph& g, const GraphPath& p) {
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i)
        for (const auto& e : g.adjacency[static_cast<std::size_t>(p.nodes[i])])
            if (e.to == p.nodes[i + 1]) {
                len += e.weight;
                break;
            }
    return len;
}

}  // namespace

TEST_CASE("graded isotropic curve values") {
    const MaterialSpec mat;
    const auto curve = GradationCurve::graded_isotropic(mat);
    CHECK(curve.c_max() == doctest::Approx(mat.c11()));
    const auto z = curve.evaluate(0.0);
    CHECK(z == StiffnessComponents{0, 0, 0, 0});
    const auto top = curve.evaluate(curve.c_max());
    CHECK(top.c11 == doctest::Approx(mat.c11()));
    CHECK(top.c22 == doctest::Approx(mat.c11()));
    CHECK(top.c12 == doctest::Approx(mat.poisson_ratio * mat.c11()).epsilon(1e-12));
    CHECK(std::abs(top.c33 - mat.c33()) <= 1e-3 * mat.c33());
    CHECK_THROWS_AS(curve.evaluate(-0.01), DomainError);
    CHECK_THROWS_AS(curve.evaluate(curve.c_max() * 1.01), DomainError);
}

TEST_CASE("curve derivative matches finite differences") {
    const auto curve = GradationCurve::graded_isotropic();
    for (double c : {0.1, 0.5, 0.9, 1.2}) {
        const auto d = curve.derivative(c).to_array();
        const auto up = curve.evaluate(c + 1e-6).to_array(), dn = curve.evaluate(c - 1e-6).to_array();
        for (std::size_t k = 0; k < 4; ++k) CHECK(d[k] == doctest::Approx((up[k] - dn[k]) / 2e-6).epsilon(1e-6));
    }
}

TEST_CASE("tabulated curve interpolates its knots") {
    const auto curve = GradationCurve::tabulated({{0.0, {0, 0, 0, 0}}, {1.0, {1, 0.4, 0.8, 0.2}}});
    CHECK(curve.evaluate(0.5).c12 == doctest::Approx(0.2));
    CHECK(curve.derivative(0.25).c22 == doctest::Approx(0.8));
    CHECK(curve_distance(curve, {0.5, 0.2, 0.4, 0.1}, PropertyScaler::identity()) < 1e-2);
}

TEST_CASE("Dijkstra agrees with exhaustive path search") {
    std::mt19937_64 rng(11);
    int compared = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 10);
        const auto g = random_dag(n, rng);
        const std::vector<char> removed(static_cast<std::size_t>(n), 0);
        const double want = brute_force_shortest(g, removed);
        const auto got = shortest_path(g, removed);
        if (!std::isfinite(want)) {
            CHECK_FALSE(got.has_value());
            continue;
        }
        REQUIRE(got.has_value());
        CHECK(got->length == doctest::Approx(want).epsilon(1e-12));
        CHECK(path_weight(g, *got) == doctest::Approx(want).epsilon(1e-12));
        ++compared;
    }
    CHECK(compared > 20);
}

TEST_CASE("sequential extraction removes interior nodes") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const auto g = random_dag(12, rng);
        const auto paths = extract_paths(g, 4);
        std::set<int> used;
        double prev = -1.0;
        for (const auto& p : paths) {
            CHECK(p.length >= prev - 1e-12);
            prev = p.length;
            for (int v : p.nodes) CHECK(used.insert(v).second);
        }
    }
}

TEST_CASE("family graph respects the ordering and degree bound") {
    Database db(DatabaseHeader{1, 4, 4, 2, {}});
    std::vector<CurveSample> ranked;
    std::mt19937_64 rng(3);
    for (int i = 0; i < 12; ++i) {
        Microstructure m(4, 4);
        for (int b = 0; b < 4; ++b) m(b / 4, b % 4) = static_cast<std::uint8_t>((i >> b) & 1);
        const auto id = db.add(m, {0.1 * i, 0.0, 0.1 * i, 0.0});
        db.records().back().latent = std::vector<double>{std::sin(i * 1.0), std::cos(i * 0.7)};
        ranked.push_back({id, 0.1 * (i / 2), 0.0});  // pairs share C11
    }
    const auto g = build_family_graph(db, ranked, 3, 2);
    for (int i = 0; i < g.member_count; ++i) {
        int members = 0;
        for (const auto& e : g.adjacency[static_cast<std::size_t>(i)]) {
            if (e.to == g.sink()) continue;
            ++members;
            CHECK(ranked[static_cast<std::size_t>(e.to)].controlled > ranked[static_cast<std::size_t>(i)].controlled);
            CHECK(e.weight >= 0.0);
        }
        CHECK(members <= 3);
    }
    CHECK(g.adjacency[static_cast<std::size_t>(g.source())].size() == 2);
    const auto paths = extract_paths(g, 3);
    REQUIRE_FALSE(paths.empty());
    for (const auto& p : paths)
        for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i)
            CHECK(ranked[static_cast<std::size_t>(p.nodes[i + 1])].controlled >
                  ranked[static_cast<std::size_t>(p.nodes[i])].controlled);
}
