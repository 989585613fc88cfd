#include <doctest.h>

#include <random>

#include "metadesign/error.hpp"
#include "metadesign/assembly.hpp"
#include "metadesign/seeds.hpp"

using namespace metadesign;

namespace {

Microstructure column_strip(const std::string& left_col) {
    const int n = static_cast<int>(left_col.size());
    Microstructure m(n, n);
    for (int r = 0; r < n; ++r) m(r, 0) = left_col[static_cast<std::size_t>(r)] == '1';
    return m;
}

Database small_database() {
    Database db(DatabaseHeader{1, 20, 20, 2, {}});
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    std::vector<Microstructure> cells;
    for (int a = 1; a <= 4; ++a)
        for (int b = 1; b <= 4; ++b) cells.push_back(grid_lattice(20, 20, a, b));
    for (int t = 1; t <= 3; ++t) cells.push_back(frame(20, 20, t, t, 0));
    for (const auto& m : cells) {
        db.add(m, homogenize(m));
        db.records().back().latent = std::vector<double>{g(rng), g(rng)};
    }
    return db;
}

MacroProblem pull(int nx, int ny) {
    MacroProblem p;
    p.nx = nx;
    p.ny = ny;
    for (int iy = 0; iy <= ny; ++iy) {
        p.dirichlet.push_back({p.node_id(0, iy), 0, 0.0});
        p.dirichlet.push_back({p.node_id(nx, iy), 0, 0.1});
    }
    p.dirichlet.push_back({0, 1, 0.0});
    for (int ix = 1; ix <= nx; ++ix) p.interest.push_back({p.node_id(ix, ny), 1, -0.02 * ix});
    return p;
}

}  // namespace

TEST_CASE("nodal weight") {
    const StiffnessComponents a{1.0, 0.5, 1.0, 0.3}, b{1.1, 0.5, 1.0, 0.3};
    CHECK(nodal_weight(a, a) == 0.0);
    CHECK(nodal_weight(a, b) == doctest::Approx(0.1));
    CHECK(nodal_weight(a, b) == nodal_weight(b, a));
}

TEST_CASE("geometric incompatibility counts") {
    const auto x = grid_lattice(20, 20, 3, 2);
    CHECK(geometric_incompat(x, x, Orientation::horizontal) == 0.0);
    CHECK(geometric_incompat(x, x, Orientation::vertical) == 0.0);
    CHECK(geometric_incompat(Microstructure(4, 4, 1), Microstructure(4, 4, 0), Orientation::horizontal) == 1.0);
    CHECK(geometric_incompat(Microstructure(4, 4, 0), Microstructure(4, 4, 0), Orientation::vertical) == 1.0);
    // Right strip of a = 1100, left strip of b = 0110.
    const auto a = column_strip("1100").mirrored_horizontal();
    const auto b = column_strip("0110");
    CHECK(geometric_incompat(a, b, Orientation::horizontal) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("geometric incompatibility is reflection consistent") {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 20; ++t) {
        Microstructure a(6, 6), b(6, 6);
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < 6; ++c) {
                a(r, c) = static_cast<std::uint8_t>(rng() & 1);
                b(r, c) = static_cast<std::uint8_t>(rng() & 1);
            }
        const double g = geometric_incompat(a, b, Orientation::horizontal);
        CHECK(g >= 0.0);
        CHECK(g <= 1.0);
        CHECK(g == geometric_incompat(b.mirrored_horizontal(), a.mirrored_horizontal(), Orientation::horizontal));
        CHECK(geometric_incompat(a, b, Orientation::vertical) ==
              geometric_incompat(b.mirrored_vertical(), a.mirrored_vertical(), Orientation::vertical));
    }
}

TEST_CASE("mechanical incompatibility") {
    const auto a = frame(20, 20, 2, 2, 0), b = frame(20, 20, 2, 2, 3);
    const auto ta = boundary_stress_traces(a), tb = boundary_stress_traces(b);
    // Periodic cell: opposite traces agree up to solver round-off.
    CHECK(mechanical_incompat(ta, ta, Orientation::horizontal) < 1e-10);
    // Same solid border, different interiors.
    CHECK(geometric_incompat(a, b, Orientation::horizontal) == 0.0);
    CHECK(mechanical_incompat(ta, tb, Orientation::horizontal) > 0.0);
    Microstructure open(20, 20, 1);
    for (int r = 0; r < 20; ++r) open(r, 19) = 0;
    Microstructure open2 = open.mirrored_horizontal();
    CHECK(mechanical_incompat(boundary_stress_traces(open), boundary_stress_traces(open2), Orientation::horizontal) ==
          1.0);
}

TEST_CASE("assembly graph on a uniform field") {
    const auto db = small_database();
    const auto scaler = PropertyScaler::fit(db.properties());
    const auto pca = fit_pca(database_latents(db), 2);
    const auto p = pull(3, 2);
    const auto& target_rec = db.records()[5];
    const std::vector<StiffnessComponents> field(6, target_rec.properties);
    AssemblyOptions opts;
    opts.candidates.n_clusters = 4;
    opts.candidates.admission_mse = 1.0;
    const auto g = build_assembly_graph(p, field, db, scaler, pca, opts);
    CHECK(g.edges.size() == 7);
    for (const auto& set : g.candidates) {
        bool found = false;
        for (const auto& c : set.entries) found |= c.id == target_rec.id;
        CHECK(found);
    }
    for (const auto& u : g.unary)
        for (double v : u) CHECK(v >= 0.0);
    for (const auto& e : g.edges) {
        CHECK(e.geometric.allFinite());
        CHECK(e.mechanical.allFinite());
        CHECK(e.geometric.minCoeff() >= 0.0);
        CHECK(e.mechanical.minCoeff() >= 0.0);
        const auto& ca = g.candidates[static_cast<std::size_t>(e.a)].entries;
        const auto& cb = g.candidates[static_cast<std::size_t>(e.b)].entries;
        for (std::size_t i = 0; i < ca.size(); ++i)
            for (std::size_t j = 0; j < cb.size(); ++j)
                if (ca[i].id == cb[j].id) {
                    CHECK(e.geometric(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == 0.0);
                    CHECK(e.mechanical(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) < 1e-10);
                }
    }

    // Same record everywhere: perfect boundaries, RRMSE of the uniform field.
    std::vector<int> labels;
    for (const auto& set : g.candidates)
        for (std::size_t i = 0; i < set.entries.size(); ++i)
            if (set.entries[i].id == target_rec.id) labels.push_back(static_cast<int>(i));
    const auto s = stitch_and_evaluate(labels, g, p, db);
    CHECK(s.mean_geometric == 0.0);
    CHECK(s.mean_mechanical < 1e-10);
    const auto u = assemble_and_solve(p, field);
    CHECK(std::abs(s.rrmse - objective_and_rrmse(u, p).rrmse) <= 1e-10);
    CHECK(s.structure.height() == 40);
    CHECK(s.structure.width() == 60);
    CHECK(s.energy == doctest::Approx(mrf_energy(g.to_mrf(), labels)));

    const auto l = dd_mrf_solve(g.to_mrf());
    CHECK(l.dual <= l.primal + 1e-12);
}

TEST_CASE("no admissible candidate names the element") {
    const auto db = small_database();
    const auto scaler = PropertyScaler::fit(db.properties());
    const auto pca = fit_pca(database_latents(db), 2);
    const auto p = pull(2, 1);
    std::vector<StiffnessComponents> field(2, db.records()[0].properties);
    field[1] = {50.0, 0.0, 50.0, 50.0};
    try {
        build_assembly_graph(p, field, db, scaler, pca);
        FAIL("expected NoFeasibleCandidate");
    } catch (const NoFeasibleCandidate& e) {
        CHECK(e.element() == 1);
    }
}
