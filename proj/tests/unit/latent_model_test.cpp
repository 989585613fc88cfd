#include <doctest.h>

#include <filesystem>
#include <random>

#include "metadesign/error.hpp"
#include "metadesign/latent_model.hpp"
#include "metadesign/bitmap_codec.hpp"
#include "metadesign/seeds.hpp"

using namespace metadesign;
using nn::Matrix;

TEST_CASE("loss terms for a known posterior") {
    Microstructure m(1, 2);
    m(0, 0) = 1;
    DensityField f{1, 2, {0.8, 0.3}};
    PosteriorParams pp{{0.0, 1.0}, {1.0, 2.0}};
    const auto t = loss(m, f, pp, {1, 0, 0, 0}, {0, 0, 0, 0});
    CHECK(t.recon == doctest::Approx(-std::log(0.8) - std::log(0.7)));
    CHECK(t.kl == doctest::Approx(-0.5 * (1.0 + std::log(4.0) - 4.0 - 1.0)));
    CHECK(t.reg == doctest::Approx(1.0));
    CHECK(t.total == doctest::Approx(t.recon + t.kl + t.reg));
    // Standard normal posterior has zero divergence.
    CHECK(loss(m, f, {{0, 0}, {1, 1}}, {}, {}).kl == doctest::Approx(0.0));
    CHECK(reparameterize(pp, {0.5, -1.0}) == std::vector<double>{0.5, -1.0});
}

TEST_CASE("analytic training gradients on a miniature model") {
    LatentModel model(Architecture::tiny(), 3);
    const int batch = 3;
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    Matrix x(64, batch), labels(4, batch), eps(2, batch);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = static_cast<double>(rng() & 1);
    for (Eigen::Index i = 0; i < labels.size(); ++i) labels(i) = g(rng);
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = g(rng);

    // Zero biases put all-void patches exactly on the ReLU kink; move off it.
    auto params = model.params();
    for (auto& p : params)
        for (Eigen::Index i = 0; i < p.value->size(); ++i) (*p.value)(i) += 0.05 * g(rng);
    model.zero_grad();
    model.batch_loss(x, labels, eps, 1.0, true);
    std::size_t checked = 0, failed = 0;
    const double h = 1e-6;
    for (auto& p : params) {
        for (Eigen::Index i = 0; i < p.value->size(); ++i) {
            const double keep = (*p.value)(i);
            (*p.value)(i) = keep + h;
            const double up = model.batch_loss(x, labels, eps, 1.0, false).total;
            (*p.value)(i) = keep - h;
            const double dn = model.batch_loss(x, labels, eps, 1.0, false).total;
            (*p.value)(i) = keep;
            const double fd = (up - dn) / (2 * h);
            const double an = (*p.grad)(i);
            ++checked;
            if (std::abs(an - fd) > 1e-4 * std::max(std::abs(fd), 1e-4)) ++failed;
        }
    }
    CHECK(checked == model.parameter_count());
    CHECK(failed == 0);
}

TEST_CASE("weights round trip through a file") {
    LatentModel model(Architecture::tiny(), 5);
    model.label_scaler.mean = {0.1, 0.2, 0.3, 0.4};
    model.label_scaler.scale = {1, 2, 3, 4};
    const auto path = std::filesystem::temp_directory_path() / "metadesign_weights_test.bin";
    save_weights(model, path);
    const LatentModel back = load_weights(path);
    std::filesystem::remove(path);
    CHECK(back.architecture() == model.architecture());
    CHECK(back.label_scaler.scale == model.label_scaler.scale);
    const LatentVector z{0.3, -0.7};
    CHECK(back.decode(z).values == model.decode(z).values);
    CHECK(back.predict_properties(z) == model.predict_properties(z));
}

TEST_CASE("architecture validation") {
    Architecture a = Architecture::tiny();
    a.latent_dim = 0;
    CHECK_THROWS(a.validate());
    a = Architecture::tiny();
    a.height = 1;
    CHECK_THROWS(a.validate());
}

TEST_CASE("short training run on a tiny database") {
    Database db(DatabaseHeader{1, 8, 8, 2, {}});
    for (int a = 1; a <= 3; ++a)
        for (int b = 1; b <= 3; ++b) {
            const auto m = grid_lattice(8, 8, a, b);
            if (!db.contains_hash(bitmap_hash(m))) db.add(m, homogenize(m));
        }
    for (int t = 1; t <= 2; ++t) {
        const auto m = frame(8, 8, t, t, 0);
        if (!db.contains_hash(bitmap_hash(m))) db.add(m, homogenize(m));
    }
    TrainingConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 4;
    cfg.rng_seed = 2;
    cfg.validation_fraction = 0.2;
    const auto r = train(db, cfg, Architecture::tiny());
    CHECK(r.history.size() == 3);
    for (const auto& e : r.history) {
        CHECK(std::isfinite(e.mean.total));
        CHECK(e.mean.kl > 0.0);
    }
    CHECK(r.training_ids.size() + r.validation_ids.size() == db.size());
    // Same seed, same history.
    const auto r2 = train(db, cfg, Architecture::tiny());
    CHECK(r2.history.back().mean.total == r.history.back().mean.total);

    const auto annotated = annotate_latents(db, r.model);
    CHECK(annotated.fully_annotated());
    const auto again = annotate_latents(annotated, r.model);
    for (std::size_t i = 0; i < db.size(); ++i) CHECK(*again.records()[i].latent == *annotated.records()[i].latent);

    const auto rep = evaluate_model(r.model, db, r.validation_ids);
    CHECK(rep.count == r.validation_ids.size());
    CHECK(rep.median_pixel_agreement >= 0.0);
    CHECK(rep.median_pixel_agreement <= 1.0);
    CHECK_THROWS_AS(annotate_latents(Database(DatabaseHeader{1, 10, 10, 2, {}}), r.model), DimensionError);
}
