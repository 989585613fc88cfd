#include "metadesign/stiffness.hpp"

#include "metadesign/error.hpp"

namespace metadesign {

PropertyScaler PropertyScaler::fit(std::span<const StiffnessComponents> props) {
    if (props.empty()) throw EmptySelection("cannot fit a property scaler to an empty set");
    PropertyScaler s;
    const double n = static_cast<double>(props.size());
    for (const auto& p : props) {
        const auto a = p.to_array();
        for (std::size_t i = 0; i < 4; ++i) s.mean[i] += a[i] / n;
    }
    std::array<double, 4> var{};
    for (const auto& p : props) {
        const auto a = p.to_array();
        for (std::size_t i = 0; i < 4; ++i) var[i] += (a[i] - s.mean[i]) * (a[i] - s.mean[i]) / n;
    }
    for (std::size_t i = 0; i < 4; ++i) s.scale[i] = var[i] > 0.0 ? std::sqrt(var[i]) : 1.0;
    return s;
}

std::array<double, 4> PropertyScaler::standardize(const StiffnessComponents& c) const {
    const auto a = c.to_array();
    std::array<double, 4> z{};
    for (std::size_t i = 0; i < 4; ++i) z[i] = (a[i] - mean[i]) / scale[i];
    return z;
}

StiffnessComponents PropertyScaler::destandardize(std::span<const double, 4> z) const {
    std::array<double, 4> a{};
    for (std::size_t i = 0; i < 4; ++i) a[i] = z[i] * scale[i] + mean[i];
    return StiffnessComponents::from_array(a);
}

}  // namespace metadesign
