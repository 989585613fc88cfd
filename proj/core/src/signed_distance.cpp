#include "metadesign/signed_distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "metadesign/error.hpp"

namespace metadesign {

std::size_t SignedDistanceField::node_index(const std::array<int, 4>& idx) const {
    std::size_t i = 0;
    for (int k = 3; k >= 0; --k) i = i * static_cast<std::size_t>(resolution) + static_cast<std::size_t>(idx[k]);
    return i;
}

std::array<int, 4> SignedDistanceField::node_coords(std::size_t index) const {
    std::array<int, 4> idx{};
    for (int k = 0; k < 4; ++k) {
        idx[k] = static_cast<int>(index % static_cast<std::size_t>(resolution));
        index /= static_cast<std::size_t>(resolution);
    }
    return idx;
}

std::array<double, 4> SignedDistanceField::node_position(const std::array<int, 4>& idx) const {
    std::array<double, 4> p{};
    for (int k = 0; k < 4; ++k) p[k] = lower[k] + idx[k] * spacing[k];
    return p;
}

StiffnessComponents SignedDistanceField::node_properties(const std::array<int, 4>& idx) const {
    const auto p = node_position(idx);
    return scaler.destandardize(p);
}

SignedDistanceField build_sdf(std::span<const StiffnessComponents> properties, const SdfOptions& opts) {
    if (properties.size() < 100) throw DomainError("signed distance field needs at least 100 property tuples");
    if (opts.resolution < 3) throw DomainError("grid resolution must be at least 3");

    SignedDistanceField sdf;
    sdf.resolution = opts.resolution;
    sdf.scaler = PropertyScaler::fit(properties);

    std::vector<std::array<double, 4>> pts;
    pts.reserve(properties.size());
    for (const auto& p : properties) pts.push_back(sdf.scaler.standardize(p));

    std::array<double, 4> lo, hi;
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    for (const auto& p : pts)
        for (int k = 0; k < 4; ++k) {
            lo[k] = std::min(lo[k], p[k]);
            hi[k] = std::max(hi[k], p[k]);
        }
    bool degenerate = true;
    for (int k = 0; k < 4; ++k) degenerate &= !(hi[k] > lo[k]);
    if (degenerate) throw DomainError("degenerate property set: all tuples identical");
    for (int k = 0; k < 4; ++k) {
        double extent = hi[k] - lo[k];
        if (!(extent > 0.0)) extent = 1.0;
        sdf.lower[k] = lo[k] - opts.margin * extent;
        sdf.spacing[k] = (extent * (1.0 + 2.0 * opts.margin)) / (opts.resolution - 1);
    }

    const int res = opts.resolution;
    std::size_t total = 1;
    for (int k = 0; k < 4; ++k) total *= static_cast<std::size_t>(res);
    sdf.occupied.assign(total, 0);

    // Node inside iff within occupancy_radius grid spacings of a data point.
    const double r2 = opts.occupancy_radius * opts.occupancy_radius;
    const int reach = static_cast<int>(std::ceil(opts.occupancy_radius)) + 1;
    for (const auto& p : pts) {
        std::array<double, 4> g{};
        std::array<int, 4> base{};
        for (int k = 0; k < 4; ++k) {
            g[k] = (p[k] - sdf.lower[k]) / sdf.spacing[k];
            base[k] = static_cast<int>(std::floor(g[k]));
        }
        std::array<int, 4> idx{};
        for (idx[0] = base[0] - reach; idx[0] <= base[0] + reach + 1; ++idx[0]) {
            if (idx[0] < 0 || idx[0] >= res) continue;
            for (idx[1] = base[1] - reach; idx[1] <= base[1] + reach + 1; ++idx[1]) {
                if (idx[1] < 0 || idx[1] >= res) continue;
                for (idx[2] = base[2] - reach; idx[2] <= base[2] + reach + 1; ++idx[2]) {
                    if (idx[2] < 0 || idx[2] >= res) continue;
                    for (idx[3] = base[3] - reach; idx[3] <= base[3] + reach + 1; ++idx[3]) {
                        if (idx[3] < 0 || idx[3] >= res) continue;
                        double d2 = 0.0;
                        for (int k = 0; k < 4; ++k) d2 += (idx[k] - g[k]) * (idx[k] - g[k]);
                        if (d2 <= r2) sdf.occupied[sdf.node_index(idx)] = 1;
                    }
                }
            }
        }
    }

    // Boundary nodes: at least one axis neighbour of the other class. The
    // nearest node of the opposite class is always a boundary node.
    std::vector<std::size_t> inside_boundary, outside_boundary;
    for (std::size_t i = 0; i < total; ++i) {
        const auto idx = sdf.node_coords(i);
        bool boundary = false;
        for (int k = 0; k < 4 && !boundary; ++k)
            for (int s : {-1, 1}) {
                auto j = idx;
                j[k] += s;
                if (j[k] < 0 || j[k] >= res) continue;
                if (sdf.occupied[sdf.node_index(j)] != sdf.occupied[i]) {
                    boundary = true;
                    break;
                }
            }
        if (boundary) (sdf.occupied[i] ? inside_boundary : outside_boundary).push_back(i);
    }
    if (outside_boundary.empty()) throw DomainError("signed distance grid has no exterior node");

    double hmin = *std::min_element(sdf.spacing.begin(), sdf.spacing.end());
    sdf.values.assign(total, 0.0);
    for (std::size_t i = 0; i < total; ++i) {
        const auto pi = sdf.node_position(sdf.node_coords(i));
        const auto& others = sdf.occupied[i] ? outside_boundary : inside_boundary;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j : others) best = std::min(best, squared_distance(pi, sdf.node_position(sdf.node_coords(j))));
        const double d = std::sqrt(best);
        sdf.values[i] = sdf.occupied[i] ? d - 0.5 * hmin : -(d - 0.5 * hmin);
    }

    sdf.gradients.assign(total, {});
    for (std::size_t i = 0; i < total; ++i) {
        const auto idx = sdf.node_coords(i);
        for (int k = 0; k < 4; ++k) {
            auto a = idx, b = idx;
            a[k] = std::max(0, idx[k] - 1);
            b[k] = std::min(res - 1, idx[k] + 1);
            sdf.gradients[i][k] = (sdf.values[sdf.node_index(b)] - sdf.values[sdf.node_index(a)]) /
                                  ((b[k] - a[k]) * sdf.spacing[k]);
        }
    }
    return sdf;
}

namespace {

struct Cell {
    std::array<int, 4> base{};
    std::array<double, 4> frac{};
    std::array<double, 4> outside{};  // standardized overshoot past the box, per axis
    std::array<bool, 4> axis_clamped{};
    bool clamped = false;
};

Cell locate(const std::array<double, 4>& z, const SignedDistanceField& sdf) {
    Cell cell;
    for (int k = 0; k < 4; ++k) {
        double g = (z[k] - sdf.lower[k]) / sdf.spacing[k];
        const double gmax = sdf.resolution - 1;
        if (g < 0.0 || g > gmax) {
            cell.clamped = true;
            cell.axis_clamped[static_cast<std::size_t>(k)] = true;
            const double gc = std::clamp(g, 0.0, gmax);
            cell.outside[static_cast<std::size_t>(k)] = (g - gc) * sdf.spacing[k];
            g = gc;
        }
        int b = std::min(static_cast<int>(std::floor(g)), sdf.resolution - 2);
        cell.base[k] = b;
        cell.frac[k] = g - b;
    }
    return cell;
}

}  // namespace

Feasibility feasibility_phi(const StiffnessComponents& c, const SignedDistanceField& sdf) {
    const auto z = sdf.scaler.standardize(c);
    const Cell cell = locate(z, sdf);
    Feasibility out;
    out.clamped = cell.clamped;
    std::array<double, 4> dz{};
    for (int corner = 0; corner < 16; ++corner) {
        std::array<int, 4> idx{};
        std::array<double, 4> w{};
        double weight = 1.0;
        for (int k = 0; k < 4; ++k) {
            const int bit = (corner >> k) & 1;
            idx[k] = cell.base[k] + bit;
            w[k] = bit ? cell.frac[k] : 1.0 - cell.frac[k];
            weight *= w[k];
        }
        const double v = sdf.values[sdf.node_index(idx)];
        out.phi += weight * v;
        for (int k = 0; k < 4; ++k) {
            if (cell.axis_clamped[static_cast<std::size_t>(k)]) continue;
            double dw = ((corner >> k) & 1) ? 1.0 : -1.0;
            for (int j = 0; j < 4; ++j)
                if (j != k) dw *= w[j];
            dz[k] += dw * v / sdf.spacing[k];
        }
    }
    // Outside the box: continue with the Euclidean distance to it.
    double excess = 0.0;
    for (double o : cell.outside) excess += o * o;
    excess = std::sqrt(excess);
    if (excess > 0.0) {
        out.phi -= excess;
        for (std::size_t k = 0; k < 4; ++k) dz[k] -= cell.outside[k] / excess;
    }
    // Chain to raw units: z = (C - mean) / scale.
    for (int k = 0; k < 4; ++k) out.gradient[k] = dz[k] / sdf.scaler.scale[k];
    return out;
}

std::array<double, 4> interpolated_node_gradient(const StiffnessComponents& c, const SignedDistanceField& sdf) {
    const Cell cell = locate(sdf.scaler.standardize(c), sdf);
    std::array<double, 4> g{};
    for (int corner = 0; corner < 16; ++corner) {
        std::array<int, 4> idx{};
        double weight = 1.0;
        for (int k = 0; k < 4; ++k) {
            const int bit = (corner >> k) & 1;
            idx[k] = cell.base[k] + bit;
            weight *= bit ? cell.frac[k] : 1.0 - cell.frac[k];
        }
        const auto& ng = sdf.gradients[sdf.node_index(idx)];
        for (int k = 0; k < 4; ++k) g[k] += weight * ng[k];
    }
    return g;
}

double heaviside_projection(double x, double beta) { return 0.5 * (std::tanh(beta * x) + 1.0); }

AggregatedConstraint aggregate_constraint(std::span<const double> phi, double beta) {
    if (!(beta > 0.0)) throw DomainError("Heaviside sharpness must be positive");
    if (phi.empty()) throw DomainError("no elements to aggregate");
    AggregatedConstraint out;
    const double n = static_cast<double>(phi.size());
    out.bound = 1.0 / n;
    out.gradient.resize(phi.size());
    for (std::size_t e = 0; e < phi.size(); ++e) {
        const double t = std::tanh(-beta * phi[e]);
        out.value += 0.5 * (t + 1.0) / n;
        // d/dphi S(-phi) = -0.5 beta (1 - tanh^2)
        out.gradient[e] = -0.5 * beta * (1.0 - t * t) / n;
    }
    return out;
}

}  // namespace metadesign
