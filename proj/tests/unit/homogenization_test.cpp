#include <doctest.h>

#include <chrono>
#include <cmath>

#include "metadesign/error.hpp"
#include "metadesign/homogenization.hpp"
#include "metadesign/seeds.hpp"

using namespace metadesign;

namespace {

// Closed-form laminate with layers stacked along y: in-plane strain e11,
// normal stress s22 and shear stress s12 are continuous across layers.
StiffnessComponents laminate(const std::vector<double>& fractions, const std::vector<Eigen::Matrix3d>& d) {
    double inv22 = 0, r12 = 0, red11 = 0, inv33 = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double f = fractions[i];
        inv22 += f / d[i](1, 1);
        r12 += f * d[i](0, 1) / d[i](1, 1);
        red11 += f * (d[i](0, 0) - d[i](0, 1) * d[i](0, 1) / d[i](1, 1));
        inv33 += f / d[i](2, 2);
    }
    StiffnessComponents c;
    c.c22 = 1.0 / inv22;
    c.c12 = c.c22 * r12;
    c.c11 = red11 + c.c12 * c.c12 / c.c22;
    c.c33 = 1.0 / inv33;
    return c;
}

void check_rel(double got, double want, double tol) {
    CHECK(std::abs(got - want) <= tol * std::abs(want));
}

}  // namespace

TEST_CASE("all-solid cell reproduces the constituent") {
    const auto t0 = std::chrono::steady_clock::now();
    const auto c = homogenize(Microstructure(50, 50, 1));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // Reference values carry six decimals; allow their half-unit rounding.
    auto check_printed = [](double got, double printed) {
        CHECK(std::abs(got - printed) <= 1e-6 * std::abs(printed) + 5e-7);
    };
    check_printed(c.c11, 1.315963);
    check_printed(c.c22, 1.315963);
    check_printed(c.c12, 0.644822);
    check_printed(c.c33, 0.335570);
    const MaterialSpec mat;
    check_rel(c.c11, mat.c11(), 1e-9);
    check_rel(c.c33, mat.c33(), 1e-9);
    CHECK(secs < 5.0);
}

TEST_CASE("striped cell matches laminate theory") {
    const MaterialSpec mat;
    const auto solid = plane_stress_matrix(1.0, mat.poisson_ratio);
    const auto soft = plane_stress_matrix(mat.void_stiffness_ratio, mat.poisson_ratio);
    for (int k : {10, 25, 37}) {
        Microstructure m(50, 50);
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < 50; ++c) m(r, c) = 1;
        const auto got = homogenize(m, mat);
        const auto want = laminate({k / 50.0, 1.0 - k / 50.0}, {solid, soft});
        check_rel(got.c11, want.c11, 1e-8);
        check_rel(got.c12, want.c12, 1e-6);
        check_rel(got.c22, want.c22, 1e-6);
        check_rel(got.c33, want.c33, 1e-6);

        const auto rotated = homogenize(m.transposed(), mat);
        check_rel(rotated.c22, got.c11, 1e-8);
        check_rel(rotated.c11, got.c22, 1e-8);
    }
}

TEST_CASE("tensor symmetry and reflection invariance") {
    const auto m = x_brace(50, 50, 2.5, 0);
    const auto t = homogenize_tensor(m);
    CHECK(std::abs(t(0, 1) - t(1, 0)) <= 1e-10 * t.norm());
    // Orthotropic cell: no normal-shear coupling.
    CHECK(std::abs(t(0, 2)) <= 1e-8 * t.norm());
    CHECK(std::abs(t(1, 2)) <= 1e-8 * t.norm());

    const auto c = homogenize(m);
    const auto cm = homogenize(m.mirrored_horizontal());
    check_rel(cm.c11, c.c11, 1e-8);
    check_rel(cm.c33, c.c33, 1e-8);

    const auto g = grid_lattice(50, 50, 3, 6);
    const auto cg = homogenize(g), ct = homogenize(g.transposed());
    check_rel(ct.c11, cg.c22, 1e-8);
    check_rel(ct.c22, cg.c11, 1e-8);
    check_rel(ct.c12, cg.c12, 1e-8);
    check_rel(ct.c33, cg.c33, 1e-8);
}

TEST_CASE("properties stay below the constituent") {
    const MaterialSpec mat;
    for (const auto& m : {grid_lattice(50, 50, 4, 4), ring_plate(50, 50, 15, 10), frame(50, 50, 3, 3, 0)}) {
        const auto c = homogenize(m);
        CHECK(c.c11 > 0);
        CHECK(c.c11 <= mat.c11() * (1 + 1e-9));
        CHECK(c.c22 <= mat.c11() * (1 + 1e-9));
        CHECK(c.c33 <= mat.c33() * (1 + 1e-9));
        CHECK(c.c12 * c.c12 < c.c11 * c.c22);
    }
}

TEST_CASE("empty cell and bad material are rejected") {
    CHECK_THROWS_AS(homogenize(Microstructure(10, 10)), EmptyMicrostructure);
    MaterialSpec bad;
    bad.poisson_ratio = 0.5;
    CHECK_THROWS_AS(homogenize(Microstructure(10, 10, 1), bad), DomainError);
}

TEST_CASE("boundary traces of a uniform cell") {
    const MaterialSpec mat;
    const auto tr = boundary_stress_traces(Microstructure(20, 20, 1), mat);
    for (double v : tr.trace(Side::left, StrainCase::e11)) check_rel(v, mat.c11(), 1e-8);
    for (double v : tr.trace(Side::top, StrainCase::e11)) check_rel(v, mat.c12(), 1e-8);
    for (double v : tr.trace(Side::right, StrainCase::e12)) check_rel(v, mat.c33(), 1e-8);
    CHECK(tr.trace(Side::bottom, StrainCase::e22).size() == 20);

    // Void boundary pixels carry no traction.
    Microstructure m(20, 20, 1);
    for (int r = 0; r < 20; ++r) m(r, 0) = m(r, 19) = 0;
    const auto t2 = boundary_stress_traces(m, mat);
    for (double v : t2.trace(Side::left, StrainCase::e11)) CHECK(v == 0.0);
}
