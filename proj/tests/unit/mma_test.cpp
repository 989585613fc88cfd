#include <doctest.h>

#include <cmath>

#include "metadesign/error.hpp"
#include "metadesign/mma.hpp"

using namespace metadesign;

TEST_CASE("one-variable quadratic converges to the interior minimum") {
    Mma mma(1, 1);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.9);
    const Eigen::VectorXd lo = Eigen::VectorXd::Zero(1), hi = Eigen::VectorXd::Ones(1);
    double prev = x(0);
    for (int it = 0; it < 60; ++it) {
        prev = x(0);
        const double f = (x(0) - 0.3) * (x(0) - 0.3);
        Eigen::VectorXd df(1);
        df(0) = 2 * (x(0) - 0.3);
        const Eigen::VectorXd g = Eigen::VectorXd::Constant(1, -1.0);
        const Eigen::MatrixXd dg = Eigen::MatrixXd::Zero(1, 1);
        x = mma.update(x, f, df, g, dg, lo, hi);
    }
    // The asymptote floor (1% of the range) leaves a small two-cycle.
    CHECK(std::abs(x(0) - 0.3) < 0.01);
    CHECK(0.5 * (x(0) + prev) == doctest::Approx(0.3).epsilon(1e-3));
    CHECK(mma.iteration() == 60);
}

TEST_CASE("constrained three-variable problem") {
    // min |x|^2 s.t. two spheres of radius 3; both constraints are active at
    // the optimum.
    Mma mma(3, 2);
    Eigen::VectorXd x(3);
    x << 4, 3, 2;
    const Eigen::VectorXd lo = Eigen::VectorXd::Zero(3), hi = Eigen::VectorXd::Constant(3, 5.0);
    const Eigen::Vector3d c1(5, 2, 1), c2(3, 4, 3);
    for (int it = 0; it < 100; ++it) {
        const double f = x.squaredNorm();
        const Eigen::VectorXd df = 2 * x;
        Eigen::VectorXd g(2);
        g << (x - c1).squaredNorm() - 9, (x - c2).squaredNorm() - 9;
        Eigen::MatrixXd dg(2, 3);
        dg.row(0) = 2 * (x - c1).transpose();
        dg.row(1) = 2 * (x - c2).transpose();
        x = mma.update(x, f, df, g, dg, lo, hi);
    }
    CHECK(x(0) == doctest::Approx(2.0175).epsilon(1e-3));
    CHECK(x(1) == doctest::Approx(1.7800).epsilon(1e-3));
    CHECK(x(2) == doctest::Approx(1.2376).epsilon(1e-3));
    CHECK((x - c1).squaredNorm() <= 9 + 1e-4);
    CHECK((x - c2).squaredNorm() <= 9 + 1e-4);
}

TEST_CASE("more constraints than variables") {
    // min -x s.t. x <= 0.7, 2x <= 1.6 on [0, 1].
    Mma mma(1, 2);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.2);
    const Eigen::VectorXd lo = Eigen::VectorXd::Zero(1), hi = Eigen::VectorXd::Ones(1);
    for (int it = 0; it < 80; ++it) {
        Eigen::VectorXd g(2);
        g << x(0) - 0.7, 2 * x(0) - 1.6;
        Eigen::MatrixXd dg(2, 1);
        dg << 1, 2;
        x = mma.update(x, -x(0), Eigen::VectorXd::Constant(1, -1.0), g, dg, lo, hi);
    }
    CHECK(x(0) == doctest::Approx(0.7).epsilon(1e-3));
}

TEST_CASE("steps respect bounds and the move limit") {
    Mma mma(2, 1);
    Eigen::VectorXd x(2);
    x << 0.5, 0.5;
    const Eigen::VectorXd lo = Eigen::VectorXd::Zero(2), hi = Eigen::VectorXd::Ones(2);
    Eigen::VectorXd df(2);
    df << -10.0, 10.0;
    const Eigen::VectorXd xn = mma.update(x, 0.0, df, Eigen::VectorXd::Constant(1, -1.0), Eigen::MatrixXd::Zero(1, 2), lo, hi);
    CHECK(xn(0) > x(0));
    CHECK(xn(1) < x(1));
    CHECK((xn - x).cwiseAbs().maxCoeff() <= 0.2 + 1e-12);
    CHECK((mma.lower_asymptote().array() < x.array()).all());
    CHECK((mma.upper_asymptote().array() > x.array()).all());
}
