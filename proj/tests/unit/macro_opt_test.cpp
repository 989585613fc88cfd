#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "metadesign/error.hpp"
#include "metadesign/macro_opt.hpp"
#include "metadesign/problem.hpp"

using namespace metadesign;

namespace {

MacroProblem squeeze(int nx, int ny) {
    MacroProblem p;
    p.nx = nx;
    p.ny = ny;
    for (int iy = 0; iy <= ny; ++iy) {
        p.dirichlet.push_back({p.node_id(0, iy), 0, 0.0});
        p.dirichlet.push_back({p.node_id(nx, iy), 0, -0.1});
    }
    p.dirichlet.push_back({0, 1, 0.0});
    for (int ix = 1; ix <= nx; ++ix) p.interest.push_back({p.node_id(ix, ny), 1, 0.0});
    return p;
}

void set_targets(MacroProblem& p, const std::vector<StiffnessComponents>& field) {
    const auto u = assemble_and_solve(p, field);
    for (auto& t : p.interest) t.target = u(2 * t.node + t.axis);
}

std::vector<StiffnessComponents> isotropic_cloud(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.1, 1.0), nu(0.1, 0.45), a(0.7, 1.3);
    std::vector<StiffnessComponents> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double c11 = u(rng), c22 = c11 * a(rng);
        out.push_back({c11, nu(rng) * std::sqrt(c11 * c22), c22, 0.3 * std::min(c11, c22) * a(rng)});
    }
    return out;
}

}  // namespace

TEST_CASE("single element family design recovers the generating parameter") {
    const auto curve = GradationCurve::graded_isotropic();
    auto p = squeeze(1, 1);
    set_targets(p, {curve.evaluate(0.8)});
    OptimConfig cfg;
    cfg.mode = OptimConfig::Mode::family;
    const auto r = optimize_properties(p, curve, cfg);
    CHECK(r.final_objective <= 1e-2 * r.initial_objective);
    REQUIRE(r.curve_parameter.size() == 1);
    // Only the ratios C12/C22 matter under prescribed displacement.
    const auto got = curve.evaluate(r.curve_parameter[0]);
    CHECK(got.c12 / got.c22 == doctest::Approx(curve.evaluate(0.8).c12 / curve.evaluate(0.8).c22).epsilon(1e-3));
    CHECK(r.history.front().objective == doctest::Approx(r.initial_objective));
}

TEST_CASE("database design reduces the objective and stays feasible") {
    const auto cloud = isotropic_cloud(1500, 3);
    const auto sdf = build_sdf(cloud);
    const auto space = design_space(cloud);
    auto p = squeeze(4, 2);
    std::vector<StiffnessComponents> truth;
    for (int e = 0; e < 8; ++e) truth.push_back(cloud[static_cast<std::size_t>(100 * e)]);
    set_targets(p, truth);
    OptimConfig cfg;
    cfg.max_iters = 150;
    const auto r = optimize_properties(p, sdf, space, cfg);
    CHECK(r.final_objective <= 0.5 * r.initial_objective);
    for (double phi : r.final_phi) CHECK(phi >= -1e-3);
    CHECK(r.field.within_bounds(1e-9));
    CHECK_FALSE(r.history.empty());
}

TEST_CASE("design space box and centroid") {
    const std::vector<StiffnessComponents> pts{{1, 0.2, 0.5, 0.1}, {0.5, 0.4, 1.5, 0.3}};
    const auto s = design_space(pts);
    CHECK(s.lower == StiffnessComponents{0.5, 0.2, 0.5, 0.1});
    CHECK(s.upper == StiffnessComponents{1, 0.4, 1.5, 0.3});
    CHECK(s.centroid.c22 == doctest::Approx(1.0));
    CHECK_THROWS_AS(design_space(std::vector<StiffnessComponents>{}), EmptySelection);
}

TEST_CASE("history and field writers") {
    const auto dir = std::filesystem::temp_directory_path() / "metadesign_opt_test";
    std::filesystem::create_directories(dir);
    write_history_csv({{1, 2.0, 0.5, 0.01, 0.1}}, (dir / "h.csv").string());
    std::ifstream in(dir / "h.csv");
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "iter,F,RRMSE,g,max_move");
    CHECK(row.rfind("1,2,0.5,", 0) == 0);
    PropertyField f;
    f.values = {{1, 2, 3, 4}};
    write_field_csv(f, (dir / "f.csv").string());
    std::ifstream in2(dir / "f.csv");
    std::getline(in2, header);
    std::getline(in2, row);
    CHECK(header == "e,C11,C12,C22,C33");
    CHECK(row == "0,1,2,3,4");
    std::filesystem::remove_all(dir);
}

TEST_CASE("bridge problem layout") {
    const auto p = bridge_problem(10, 4);
    CHECK(p.element_count() == 40);
    CHECK(p.interest.size() == 9);
    CHECK(p.interest[4].target == doctest::Approx(0.05 * std::sin(std::acos(-1.0) * 0.5)));
    CHECK_NOTHROW(p.validate());
}
