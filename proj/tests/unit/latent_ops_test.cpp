#include <doctest.h>

#include <random>

#include "metadesign/error.hpp"
#include "metadesign/latent_ops.hpp"

using namespace metadesign;

namespace {

// Records whose first latent coordinate tracks C11 and second tracks C22/C11.
Database synthetic(std::size_t n, std::uint64_t seed) {
    Database db(DatabaseHeader{1, 4, 4, 3, {}});
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    for (std::size_t i = 0; i < n; ++i) {
        Microstructure m(4, 4);
        for (int b = 0; b < 16; ++b) m(b / 4, b % 4) = static_cast<std::uint8_t>((i >> b) & 1);
        const double z0 = g(rng), z1 = g(rng), z2 = g(rng);
        const double c11 = std::exp(0.5 * z0);
        db.add(m, {c11, 0.3 * c11, c11 * std::exp(0.4 * z1), 0.2 * c11});
        db.records().back().latent = std::vector<double>{z0, z1, 0.1 * z2};
    }
    return db;
}

}  // namespace

TEST_CASE("spearman correlation") {
    CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(spearman({1, 2, 3, 4, 5}, {1, 8, 27, 64, 125}) == doctest::Approx(1.0));
    // Ties use average ranks: x ranks (1,2,3,4), y ranks (1.5,1.5,3,4).
    CHECK(spearman({1, 2, 3, 4}, {5, 5, 6, 7}) == doctest::Approx(0.9486832980505138));
}

TEST_CASE("principal components of a stretched cloud") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    std::vector<LatentVector> pts;
    const Eigen::Vector3d dir = Eigen::Vector3d(1, 2, 2) / 3.0;
    for (int i = 0; i < 2000; ++i) {
        const Eigen::Vector3d p = 5.0 * g(rng) * dir + 0.1 * Eigen::Vector3d(g(rng), g(rng), g(rng));
        pts.push_back({p(0) + 1.0, p(1), p(2) - 2.0});
    }
    const auto pca = fit_pca(pts, 2);
    REQUIRE(pca.component_count() == 2);
    CHECK(std::abs(pca.components.col(0).dot(dir)) > 0.999);
    CHECK(pca.explained_ratio[0] > 0.99);
    CHECK(pca.variances[0] >= pca.variances[1]);
    CHECK(pca.mean(0) == doctest::Approx(1.0).epsilon(0.05));
    // Largest-magnitude entry is positive.
    const Eigen::Index arg = [&] {
        Eigen::Index k;
        pca.components.col(0).cwiseAbs().maxCoeff(&k);
        return k;
    }();
    CHECK(pca.components(arg, 0) > 0);
    const auto back = pca.reconstruct(pca.project(pts[0]));
    CHECK(back.size() == 3);
}

TEST_CASE("degenerate directions are dropped with a warning") {
    std::vector<LatentVector> pts;
    for (int i = 0; i < 50; ++i) pts.push_back({static_cast<double>(i), 0.0, 1.0});
    const auto pca = fit_pca(pts, 3);
    CHECK(pca.component_count() == 1);
    CHECK_FALSE(pca.warnings.empty());
}

TEST_CASE("k-means separates distant blobs") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    Eigen::MatrixXd pts(300, 2);
    for (int i = 0; i < 300; ++i) {
        const int c = i % 3;
        pts(i, 0) = 10.0 * c + 0.3 * g(rng);
        pts(i, 1) = -5.0 * c + 0.3 * g(rng);
    }
    const auto km = kmeans(pts, 3, 7);
    for (int i = 3; i < 300; ++i) CHECK(km.labels[static_cast<std::size_t>(i)] == km.labels[static_cast<std::size_t>(i % 3)]);
    CHECK(km.labels[0] != km.labels[1]);
    CHECK(km.labels[1] != km.labels[2]);
    CHECK(kmeans(pts, 3, 7).inertia == km.inertia);
}

TEST_CASE("semantic arrows follow the correlated coordinate") {
    const auto db = synthetic(600, 3);
    const auto a = semantic_arrow(db, score_c11, ArrowMode::quantile(0.3), "C11");
    CHECK(a.direction[0] > 0.95);
    CHECK(a.high_count == a.low_count);
    double n2 = 0;
    for (double v : a.direction) n2 += v * v;
    CHECK(n2 == doctest::Approx(1.0));
    const auto b = semantic_arrow(db, score_c11_over_c22, ArrowMode::ratio(1.2));
    CHECK(b.direction[1] < -0.9);
    CHECK_THROWS_AS(semantic_arrow(db, score_c11_over_c22, ArrowMode::ratio(100.0)), EmptySelection);
}

TEST_CASE("interpolation and distance") {
    CHECK(interpolate({0, 0}, {2, 4}, 0.25) == std::vector<double>{0.5, 1.0});
    CHECK(latent_distance({0, 0}, {3, 4}) == doctest::Approx(5.0));
}

TEST_CASE("diverse candidates") {
    const auto db = synthetic(400, 4);
    const auto scaler = PropertyScaler::fit(db.properties());
    const auto pca = fit_pca(database_latents(db), 2);
    const auto target = db.records()[17].properties;
    CandidateOptions opts;
    opts.admission_mse = 0.05;
    const auto set = diverse_candidates(db, target, scaler, pca, opts);
    REQUIRE_FALSE(set.entries.empty());
    CHECK(set.entries.size() <= 10);
    CHECK(set.entries[0].id == 17);
    CHECK(set.entries[0].mse == doctest::Approx(0.0));
    for (std::size_t i = 1; i < set.entries.size(); ++i) {
        CHECK(set.entries[i].mse >= set.entries[i - 1].mse);
        CHECK(set.entries[i].mse <= 0.05);
    }
    // Clustering spreads the set beyond the nearest records.
    const auto near = nearest_candidates(db, target, scaler, set.entries.size());
    CHECK(mean_pairwise_distance(set) >= mean_pairwise_distance(near));

    opts.admission_mse = 1e-12;
    const auto only = diverse_candidates(db, target, scaler, pca, opts);
    CHECK(only.entries.size() == 1);
    CHECK(property_mse(target, target, scaler) == 0.0);
    CHECK_THROWS_AS(diverse_candidates(db, {100, 100, 100, 100}, scaler, pca, opts), NoFeasibleCandidate);
}
