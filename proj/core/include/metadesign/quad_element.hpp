#pragma once

#include <array>

#include <Eigen/Core>

namespace metadesign {

using Mat8 = Eigen::Matrix<double, 8, 8>;
using Mat38 = Eigen::Matrix<double, 3, 8>;

// Unit-square bilinear quadrilateral. Local node order (x, y):
// (0,0), (1,0), (1,1), (0,1); DOFs interleaved [u0x, u0y, u1x, ...].

/// Strain-displacement matrix at natural coordinates (xi, eta) in [-1,1]^2.
inline Mat38 quad_b_matrix(double xi, double eta) {
    static constexpr double xa[4] = {-1, 1, 1, -1};
    static constexpr double ya[4] = {-1, -1, 1, 1};
    Mat38 b = Mat38::Zero();
    for (int a = 0; a < 4; ++a) {
        // d/dx = 2 d/dxi for a unit element.
        const double dx = 0.5 * xa[a] * (1.0 + ya[a] * eta);
        const double dy = 0.5 * ya[a] * (1.0 + xa[a] * xi);
        b(0, 2 * a) = dx;
        b(1, 2 * a + 1) = dy;
        b(2, 2 * a) = dy;
        b(2, 2 * a + 1) = dx;
    }
    return b;
}

/// B at the four 2x2 Gauss points.
inline const std::array<Mat38, 4>& quad_gauss_b() {
    static const std::array<Mat38, 4> pts = [] {
        const double g = 0.57735026918962576451;
        return std::array<Mat38, 4>{quad_b_matrix(-g, -g), quad_b_matrix(g, -g), quad_b_matrix(g, g),
                                    quad_b_matrix(-g, g)};
    }();
    return pts;
}

/// K_e = sum_g w_g B_g^T D B_g |J| with |J| = 1/4 and unit weights.
template <class Derived>
Mat8 quad_stiffness(const Eigen::MatrixBase<Derived>& d) {
    Mat8 k = Mat8::Zero();
    for (const auto& b : quad_gauss_b()) k.noalias() += 0.25 * b.transpose() * d * b;
    return k;
}

}  // namespace metadesign
