#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace metadesign {

/// The four independent entries of an orthotropic plane stiffness matrix
///   [C11 C12 0; C12 C22 0; 0 0 C33] (Voigt, engineering shear).
struct StiffnessComponents {
    double c11 = 0.0;
    double c12 = 0.0;
    double c22 = 0.0;
    double c33 = 0.0;

    std::array<double, 4> to_array() const { return {c11, c12, c22, c33}; }
    static StiffnessComponents from_array(std::span<const double, 4> a) {
        return {a[0], a[1], a[2], a[3]};
    }
    double operator[](int i) const { return to_array()[static_cast<std::size_t>(i)]; }

    bool is_finite() const {
        return std::isfinite(c11) && std::isfinite(c12) && std::isfinite(c22) && std::isfinite(c33);
    }

    friend bool operator==(const StiffnessComponents&, const StiffnessComponents&) = default;
};

/// Per-component affine standardization (x - mean) / scale.
struct PropertyScaler {
    std::array<double, 4> mean{0.0, 0.0, 0.0, 0.0};
    std::array<double, 4> scale{1.0, 1.0, 1.0, 1.0};

    static PropertyScaler identity() { return {}; }
    /// Mean / population standard deviation of the given tuples. A zero
    /// spread falls back to a unit scale.
    static PropertyScaler fit(std::span<const StiffnessComponents> props);

    std::array<double, 4> standardize(const StiffnessComponents& c) const;
    StiffnessComponents destandardize(std::span<const double, 4> z) const;
};

inline double squared_distance(const std::array<double, 4>& a, const std::array<double, 4>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < 4; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

}  // namespace metadesign
