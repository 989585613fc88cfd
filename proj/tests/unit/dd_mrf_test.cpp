#include <doctest.h>

#include <random>

#include "metadesign/dd_mrf.hpp"
#include "metadesign/error.hpp"

using namespace metadesign;

namespace {

GridMrf random_grid(int rows, int cols, int labels, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    GridMrf m;
    m.rows = rows;
    m.cols = cols;
    for (int i = 0; i < rows * cols; ++i) {
        std::vector<double> un(static_cast<std::size_t>(labels));
        for (auto& v : un) v = u(rng);
        m.unary.push_back(un);
    }
    auto table = [&] {
        Eigen::MatrixXd t(labels, labels);
        for (int a = 0; a < labels; ++a)
            for (int b = 0; b < labels; ++b) t(a, b) = 1.5 * u(rng);
        return t;
    };
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c + 1 < cols; ++c) m.horizontal.push_back(table());
    for (int r = 0; r + 1 < rows; ++r)
        for (int c = 0; c < cols; ++c) m.vertical.push_back(table());
    return m;
}

}  // namespace

TEST_CASE("single node picks the cheapest label") {
    GridMrf m;
    m.unary = {{0.4, 0.1, 0.7}};
    const auto l = dd_mrf_solve(m);
    CHECK(l.labels == std::vector<int>{1});
    CHECK(l.primal == doctest::Approx(0.1));
    CHECK(l.dual == doctest::Approx(0.1));
    CHECK(l.converged);
}

TEST_CASE("energy matches a direct sum") {
    std::mt19937_64 rng(2);
    const auto m = random_grid(2, 3, 3, rng);
    const std::vector<int> lab{0, 2, 1, 1, 0, 2};
    double e = 0;
    for (int i = 0; i < 6; ++i) e += m.unary[static_cast<std::size_t>(i)][static_cast<std::size_t>(lab[static_cast<std::size_t>(i)])];
    e += m.horizontal[0](0, 2) + m.horizontal[1](2, 1) + m.horizontal[2](1, 0) + m.horizontal[3](0, 2);
    e += m.vertical[0](0, 1) + m.vertical[1](2, 0) + m.vertical[2](1, 2);
    CHECK(mrf_energy(m, lab) == doctest::Approx(e).epsilon(1e-14));
}

TEST_CASE("dual decomposition against exhaustive search") {
    std::mt19937_64 rng(7);
    int exact = 0, total = 0;
    for (int rows : {2})
        for (int cols : {2, 3})
            for (int labels : {2, 3})
                for (int trial = 0; trial < 5; ++trial) {
                    const auto m = random_grid(rows, cols, labels, rng);
                    const auto opt = brute_force_mrf(m).primal;
                    const auto l = dd_mrf_solve(m);
                    ++total;
                    REQUIRE(l.dual_history.size() == l.primal_history.size());
                    for (std::size_t i = 0; i < l.dual_history.size(); ++i) {
                        CHECK(l.dual_history[i] <= opt + 1e-9);
                        CHECK(l.primal_history[i] >= opt - 1e-9);
                        if (i > 0) CHECK(l.dual_history[i] >= l.dual_history[i - 1] - 1e-12);
                    }
                    CHECK(l.primal == doctest::Approx(mrf_energy(m, l.labels)).epsilon(1e-12));
                    CHECK(l.primal <= 1.05 * opt + 1e-12);
                    if (l.converged) CHECK(l.primal == doctest::Approx(opt).epsilon(1e-9));
                    exact += std::abs(l.primal - opt) <= 1e-9 * (1 + std::abs(opt)) ? 1 : 0;
                }
    CHECK(exact * 5 >= total * 4);
}

TEST_CASE("table shape mismatch is rejected") {
    GridMrf m;
    m.rows = 1;
    m.cols = 2;
    m.unary = {{0, 1}, {0, 1, 2}};
    m.horizontal = {Eigen::MatrixXd::Zero(2, 2)};
    CHECK_THROWS_AS(dd_mrf_solve(m), DimensionError);
}
