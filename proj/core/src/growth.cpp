#include "metadesign/growth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <unordered_map>

#include "metadesign/bitmap_codec.hpp"
#include "metadesign/error.hpp"
#include "metadesign/homogenization.hpp"
#include "metadesign/parallel.hpp"

namespace metadesign {

std::vector<std::size_t> neighbour_counts(const std::vector<std::array<double, 4>>& pts, double radius) {
    if (!(radius > 0.0)) throw DomainError("neighbour radius must be positive");
    using Key = std::array<std::int64_t, 4>;
    std::map<Key, std::vector<std::size_t>> buckets;
    auto key_of = [radius](const std::array<double, 4>& p) {
        Key k{};
        for (std::size_t i = 0; i < 4; ++i) k[i] = static_cast<std::int64_t>(std::floor(p[i] / radius));
        return k;
    };
    for (std::size_t i = 0; i < pts.size(); ++i) buckets[key_of(pts[i])].push_back(i);
    const double r2 = radius * radius;
    std::vector<std::size_t> out(pts.size(), 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Key k = key_of(pts[i]);
        for (int o = 0; o < 81; ++o) {
            Key q = k;
            int rem = o;
            for (std::size_t d = 0; d < 4; ++d) {
                q[d] += rem % 3 - 1;
                rem /= 3;
            }
            auto it = buckets.find(q);
            if (it == buckets.end()) continue;
            for (std::size_t j : it->second)
                if (j != i && squared_distance(pts[i], pts[j]) <= r2) ++out[i];
        }
    }
    return out;
}

std::vector<RankedRecord> rank_for_growth(const Database& db, const std::vector<std::array<double, 4>>& directions,
                                          double radius) {
    const auto props = db.properties();
    const PropertyScaler scaler = PropertyScaler::fit(props);
    std::vector<std::array<double, 4>> z;
    z.reserve(props.size());
    for (const auto& p : props) z.push_back(scaler.standardize(p));

    // Distance to the polytope {x : d.x <= h(d)} approximating the hull.
    std::vector<double> support(directions.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < directions.size(); ++k)
        for (const auto& p : z) {
            double s = 0.0;
            for (std::size_t i = 0; i < 4; ++i) s += directions[k][i] * p[i];
            support[k] = std::max(support[k], s);
        }
    std::vector<double> depth(z.size(), std::numeric_limits<double>::infinity());
    for (std::size_t n = 0; n < z.size(); ++n)
        for (std::size_t k = 0; k < directions.size(); ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < 4; ++i) s += directions[k][i] * z[n][i];
            depth[n] = std::min(depth[n], support[k] - s);
        }
    const auto counts = neighbour_counts(z, radius);
    const double max_depth = z.empty() ? 0.0 : *std::max_element(depth.begin(), depth.end());
    const double max_count = z.empty() ? 0.0 : static_cast<double>(*std::max_element(counts.begin(), counts.end()));

    std::vector<RankedRecord> out(z.size());
    for (std::size_t n = 0; n < z.size(); ++n) {
        out[n].index = n;
        out[n].extremeness = max_depth > 0.0 ? 1.0 - depth[n] / max_depth : 1.0;
        out[n].sparsity = max_count > 0.0 ? 1.0 - static_cast<double>(counts[n]) / max_count : 1.0;
        out[n].score = out[n].extremeness + out[n].sparsity;
    }
    std::sort(out.begin(), out.end(), [&](const RankedRecord& a, const RankedRecord& b) {
        if (a.score != b.score) return a.score > b.score;
        return db.records()[a.index].id < db.records()[b.index].id;
    });
    return out;
}

Database grow_database(const std::vector<Microstructure>& seeds, std::uint64_t rng_seed, const GrowthOptions& opts,
                       DatabaseHeader header) {
    if (seeds.empty()) throw DomainError("database growth needs at least one seed");
    if (opts.iterations < 0 || opts.batch < 1 || opts.retries < 0) throw DomainError("invalid growth options");
    header.material = opts.material;
    header.height = seeds.front().height();
    header.width = seeds.front().width();
    Database db(header);

    auto insert_batch = [&](std::vector<Microstructure> cells) {
        // Deterministic merge: drop known/duplicate bitmaps, order by hash.
        std::vector<std::pair<std::uint64_t, Microstructure>> fresh;
        for (auto& c : cells) {
            const std::uint64_t h = bitmap_hash(c);
            if (db.contains_hash(h)) continue;
            if (std::any_of(fresh.begin(), fresh.end(), [&](const auto& f) { return f.first == h && f.second == c; }))
                continue;
            fresh.emplace_back(h, std::move(c));
        }
        std::stable_sort(fresh.begin(), fresh.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<std::optional<StiffnessComponents>> props(fresh.size());
        parallel_for(fresh.size(), [&](std::size_t i) {
            if (fresh[i].second.solid_count() == 0) return;
            props[i] = homogenize(fresh[i].second, opts.material);
        });
        std::size_t added = 0;
        for (std::size_t i = 0; i < fresh.size(); ++i) {
            if (!props[i] || !props[i]->is_finite() || db.contains_hash(fresh[i].first)) continue;
            Microstructure twin = fresh[i].second.transposed();
            db.add(std::move(fresh[i].second), *props[i]);
            ++added;
            // Axis exchange swaps C11 and C22 and leaves C12, C33 unchanged.
            if (opts.transpose_closure && !db.contains_hash(bitmap_hash(twin))) {
                StiffnessComponents swapped = *props[i];
                std::swap(swapped.c11, swapped.c22);
                db.add(std::move(twin), swapped);
                ++added;
            }
        }
        return added;
    };

    {
        std::vector<Microstructure> s;
        for (const auto& m : seeds) {
            if (!is_admissible(m)) continue;
            Microstructure c = m;
            c.id.reset();
            s.push_back(std::move(c));
        }
        insert_batch(std::move(s));
    }
    if (db.empty()) throw DomainError("no admissible seed microstructure");

    std::mt19937_64 rng(rng_seed);
    std::vector<std::array<double, 4>> dirs(static_cast<std::size_t>(std::max(opts.hull_directions, 1)));
    {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (auto& d : dirs) {
            double n2 = 0.0;
            for (auto& v : d) {
                v = normal(rng);
                n2 += v * v;
            }
            for (auto& v : d) v /= std::sqrt(n2);
        }
    }

    for (int iter = 1; iter <= opts.iterations; ++iter) {
        const auto ranked = rank_for_growth(db, dirs, opts.sparsity_radius);
        // Walk down the ranking until `batch` new unique children exist;
        // parents whose perturbations all fail are skipped.
        std::vector<Microstructure> batch;
        std::vector<std::uint64_t> batch_hashes;
        std::size_t next = 0;
        while (static_cast<int>(batch.size()) < opts.batch && next < ranked.size()) {
            const std::size_t want = static_cast<std::size_t>(opts.batch) - batch.size();
            const std::size_t nparents = std::min(want, ranked.size() - next);
            const auto per = static_cast<std::size_t>(opts.retries + 1);
            std::vector<std::uint64_t> child_seeds(nparents * per);
            for (auto& s : child_seeds) s = rng();
            std::vector<std::optional<Microstructure>> children(nparents);
            parallel_for(nparents, [&](std::size_t p) {
                const Microstructure& parent = db.records()[ranked[next + p].index].cell;
                for (std::size_t a = 0; a < per; ++a) {
                    PerturbResult r = perturb(parent, child_seeds[p * per + a], opts.perturb);
                    if (!r.perturbed || db.contains_hash(bitmap_hash(r.cell))) continue;
                    children[p] = std::move(r.cell);
                    return;
                }
            });
            next += nparents;
            for (auto& c : children) {
                if (!c) continue;
                const std::uint64_t h = bitmap_hash(*c);
                if (std::find(batch_hashes.begin(), batch_hashes.end(), h) != batch_hashes.end()) continue;
                batch_hashes.push_back(h);
                batch.push_back(std::move(*c));
            }
        }
        insert_batch(std::move(batch));
        if (opts.progress) opts.progress(iter, db.size());
    }
    return db;
}

}  // namespace metadesign
