#include <doctest.h>

#include <random>

#include "metadesign/bitmap_codec.hpp"
#include "metadesign/error.hpp"
#include "metadesign/growth.hpp"
#include "metadesign/seeds.hpp"

using namespace metadesign;

namespace {

std::vector<Microstructure> small_seeds() {
    std::vector<Microstructure> s;
    for (int a = 2; a <= 4; ++a) s.push_back(grid_lattice(20, 20, a, a));
    s.push_back(frame(20, 20, 2, 2, 2));
    s.push_back(ring_plate(20, 20, 6, 4));
    return s;
}

}  // namespace

TEST_CASE("neighbour counts match a direct search") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<std::array<double, 4>> pts(400);
    for (auto& p : pts)
        for (auto& v : p) v = 0.3 * u(rng);
    const auto counts = neighbour_counts(pts, 0.1);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::size_t n = 0;
        for (std::size_t j = 0; j < pts.size(); ++j) n += (i != j && squared_distance(pts[i], pts[j]) <= 0.01) ? 1 : 0;
        CHECK(counts[i] == n);
    }
}

TEST_CASE("growth is deterministic and only expands the property box") {
    GrowthOptions opts;
    opts.iterations = 4;
    opts.batch = 4;
    DatabaseHeader h;
    h.height = h.width = 20;
    std::array<double, 4> lo{}, hi{};
    bool first = true;
    bool monotone = true;
    std::size_t last = 0;
    opts.progress = [&](int, std::size_t) {};
    Database prev(h);
    for (int iters : {0, 2, 4}) {
        opts.iterations = iters;
        const auto db = grow_database(small_seeds(), 5, opts, h);
        CHECK(db.size() >= last);
        last = db.size();
        std::array<double, 4> l{1e9, 1e9, 1e9, 1e9}, u{-1e9, -1e9, -1e9, -1e9};
        for (const auto& r : db.records()) {
            CHECK(is_admissible(r.cell));
            const auto a = r.properties.to_array();
            for (std::size_t k = 0; k < 4; ++k) {
                l[k] = std::min(l[k], a[k]);
                u[k] = std::max(u[k], a[k]);
            }
        }
        if (!first)
            for (std::size_t k = 0; k < 4; ++k) monotone &= l[k] <= lo[k] && u[k] >= hi[k];
        lo = l;
        hi = u;
        first = false;
        prev = db;
    }
    CHECK(monotone);
    CHECK(prev.size() > small_seeds().size());
    const auto again = grow_database(small_seeds(), 5, opts, h);
    CHECK(again.content_hash() == prev.content_hash());
}

TEST_CASE("ranking favours isolated extreme records") {
    DatabaseHeader h;
    h.height = h.width = 20;
    Database db(h);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.4, 0.6);
    for (int i = 0; i < 40; ++i) {
        Microstructure m(20, 20);
        for (int b = 0; b < 8; ++b) m(0, b) = static_cast<std::uint8_t>((i >> b) & 1);
        db.add(m, {u(rng), u(rng), u(rng), u(rng)});
    }
    Microstructure far(20, 20, 1);
    const auto far_id = db.add(far, {2.0, 2.0, 2.0, 2.0});
    std::vector<std::array<double, 4>> dirs;
    std::normal_distribution<double> g;
    for (int i = 0; i < 64; ++i) {
        std::array<double, 4> d{g(rng), g(rng), g(rng), g(rng)};
        double n = std::sqrt(squared_distance(d, {0, 0, 0, 0}));
        for (auto& v : d) v /= n;
        dirs.push_back(d);
    }
    const auto ranked = rank_for_growth(db, dirs, 1.0);
    CHECK(db.records()[ranked.front().index].id == far_id);
    for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i].score <= ranked[i - 1].score);
}

TEST_CASE("transpose closure adds swapped twins of grown cells") {
    GrowthOptions opts;
    opts.iterations = 3;
    opts.batch = 4;
    opts.transpose_closure = true;
    DatabaseHeader h;
    h.height = h.width = 20;
    const auto db = grow_database(small_seeds(), 9, opts, h);
    std::size_t without_twin = 0;
    for (const auto& r : db.records()) {
        const auto t = r.cell.transposed();
        if (!db.contains_hash(bitmap_hash(t))) {
            ++without_twin;
            continue;
        }
        for (const auto& s : db.records())
            if (s.cell == t) {
                CHECK(s.properties.c11 == doctest::Approx(r.properties.c22).epsilon(1e-9));
                CHECK(s.properties.c12 == doctest::Approx(r.properties.c12).epsilon(1e-9));
            }
    }
    CHECK(db.size() > small_seeds().size());
    CHECK(without_twin <= small_seeds().size());
}
