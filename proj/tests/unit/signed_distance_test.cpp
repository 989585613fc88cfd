#include <doctest.h>

#include <random>

#include "metadesign/error.hpp"
#include "metadesign/signed_distance.hpp"

using namespace metadesign;

namespace {

std::vector<StiffnessComponents> ball_cloud(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u;
    std::vector<StiffnessComponents> out;
    while (out.size() < n) {
        std::array<double, 4> v{};
        double r2 = 0;
        for (auto& x : v) {
            x = g(rng);
            r2 += x * x;
        }
        const double s = std::pow(u(rng), 0.25) / std::sqrt(r2);
        out.push_back({0.5 + 0.2 * s * v[0], 0.2 + 0.1 * s * v[1], 0.5 + 0.2 * s * v[2], 0.15 + 0.05 * s * v[3]});
    }
    return out;
}

}  // namespace

TEST_CASE("sign convention of the property field") {
    const auto cloud = ball_cloud(3000, 1);
    const auto sdf = build_sdf(cloud);
    CHECK(feasibility_phi({0.5, 0.2, 0.5, 0.15}, sdf).phi > 0.0);
    const auto far = feasibility_phi({1.5, 0.2, 0.5, 0.15}, sdf);
    CHECK(far.phi < 0.0);
    CHECK(far.clamped);
    // Just outside the ball along C11.
    CHECK(feasibility_phi({0.75, 0.2, 0.5, 0.15}, sdf).phi < 0.0);
}

TEST_CASE("interpolant gradient matches finite differences") {
    const auto sdf = build_sdf(ball_cloud(3000, 2));
    const StiffnessComponents p{0.61, 0.23, 0.44, 0.16};
    const auto f = feasibility_phi(p, sdf);
    const auto a = p.to_array();
    for (std::size_t k = 0; k < 4; ++k) {
        const double h = 1e-7 * sdf.scaler.scale[k];
        auto up = a, dn = a;
        up[k] += h;
        dn[k] -= h;
        const double fd = (feasibility_phi(StiffnessComponents::from_array(up), sdf).phi -
                           feasibility_phi(StiffnessComponents::from_array(dn), sdf).phi) / (2 * h);
        CHECK(f.gradient[k] == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("interpolation reproduces nodal values") {
    const auto sdf = build_sdf(ball_cloud(2000, 3));
    const std::array<int, 4> idx{5, 6, 4, 7};
    const auto p = sdf.node_properties(idx);
    CHECK(feasibility_phi(p, sdf).phi == doctest::Approx(sdf.values[sdf.node_index(idx)]).epsilon(1e-9));
    CHECK(sdf.node_coords(sdf.node_index(idx)) == idx);
}

TEST_CASE("field construction errors") {
    CHECK_THROWS_AS(build_sdf(ball_cloud(50, 4)), DomainError);
    std::vector<StiffnessComponents> same(200, StiffnessComponents{0.5, 0.2, 0.5, 0.1});
    CHECK_THROWS_AS(build_sdf(same), DomainError);
}

TEST_CASE("aggregated constraint") {
    CHECK(heaviside_projection(0.0, 10.0) == doctest::Approx(0.5));
    CHECK(heaviside_projection(2.0, 10.0) > 0.999);
    const std::vector<double> phi{0.3, -0.1, 0.05, 0.8};
    const auto g = aggregate_constraint(phi, 10.0);
    CHECK(g.bound == doctest::Approx(0.25));
    for (std::size_t e = 0; e < phi.size(); ++e) {
        auto up = phi, dn = phi;
        up[e] += 1e-6;
        dn[e] -= 1e-6;
        const double fd = (aggregate_constraint(up, 10.0).value - aggregate_constraint(dn, 10.0).value) / 2e-6;
        CHECK(g.gradient[e] == doctest::Approx(fd).epsilon(1e-6));
    }
    // Feasible cloud deep inside: g well below 1/N.
    const auto inside = aggregate_constraint(std::vector<double>(8, 1.0), 10.0);
    CHECK(inside.value < inside.bound);
}
