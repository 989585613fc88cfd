#include "metadesign/latent_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "metadesign/error.hpp"

namespace metadesign {

namespace {

Eigen::VectorXd to_eigen(const LatentVector& z) {
    return Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
}

LatentVector from_eigen(const Eigen::VectorXd& v) { return LatentVector(v.data(), v.data() + v.size()); }

std::vector<double> ranks(const std::vector<double>& x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

Eigen::VectorXd PcaModel::project(const LatentVector& z) const {
    if (static_cast<Eigen::Index>(z.size()) != mean.size()) throw DimensionError("latent length mismatch in PCA");
    return components.transpose() * (to_eigen(z) - mean);
}

LatentVector PcaModel::reconstruct(const Eigen::VectorXd& coeffs) const {
    if (coeffs.size() != components.cols()) throw DimensionError("coefficient count mismatch in PCA");
    return from_eigen(mean + components * coeffs);
}

PcaModel fit_pca(const std::vector<LatentVector>& latents, int n_components) {
    if (latents.empty() || n_components < 1) throw DomainError("PCA needs data and at least one component");
    if (latents.size() < static_cast<std::size_t>(n_components))
        throw DomainError("PCA needs at least n_components samples");
    const auto j = static_cast<Eigen::Index>(latents.front().size());
    if (n_components > j) throw DimensionError("more components requested than latent dimensions");
    Eigen::MatrixXd x(static_cast<Eigen::Index>(latents.size()), j);
    for (std::size_t i = 0; i < latents.size(); ++i) {
        if (static_cast<Eigen::Index>(latents[i].size()) != j) throw DimensionError("ragged latent vectors");
        x.row(static_cast<Eigen::Index>(i)) = to_eigen(latents[i]).transpose();
    }
    PcaModel pca;
    pca.mean = x.colwise().mean().transpose();
    x.rowwise() -= pca.mean.transpose();
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(latents.size());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const Eigen::VectorXd evals = es.eigenvalues().reverse();
    const Eigen::MatrixXd evecs = es.eigenvectors().rowwise().reverse();
    const double total = std::max(evals.sum(), 0.0);
    const double cutoff = 1e-12 * std::max(evals(0), 0.0);
    int kept = 0;
    while (kept < n_components && evals(kept) > cutoff && evals(kept) > 0.0) ++kept;
    if (kept < n_components)
        pca.warnings.push_back("degenerate covariance: kept " + std::to_string(kept) + " of " +
                               std::to_string(n_components) + " components");
    if (kept == 0) throw DomainError("PCA input has zero variance");
    pca.components = evecs.leftCols(kept);
    for (int i = 0; i < kept; ++i) {
        // Deterministic sign: largest-magnitude entry positive.
        Eigen::Index arg;
        pca.components.col(i).cwiseAbs().maxCoeff(&arg);
        if (pca.components(arg, i) < 0) pca.components.col(i) *= -1.0;
        pca.variances.push_back(evals(i));
        pca.explained_ratio.push_back(total > 0 ? evals(i) / total : 0.0);
    }
    return pca;
}

double score_c11(const DatabaseRecord& r) { return r.properties.c11; }
double score_c11_over_c22(const DatabaseRecord& r) { return r.properties.c11 / std::max(r.properties.c22, 1e-300); }
double score_c12_over_c22(const DatabaseRecord& r) { return r.properties.c12 / std::max(r.properties.c22, 1e-300); }

SemanticArrow semantic_arrow(const Database& db, const RecordScore& score, const ArrowMode& mode,
                             const std::string& criterion) {
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = 0; i < db.size(); ++i) {
        if (!db.records()[i].latent) throw DomainError("semantic_arrow needs latent-annotated records");
        scored.emplace_back(score(db.records()[i]), i);
    }
    std::vector<std::size_t> high, low;
    if (mode.kind == ArrowMode::Kind::quantile) {
        if (!(mode.parameter > 0.0 && mode.parameter <= 0.5)) throw DomainError("quantile must lie in (0, 0.5]");
        std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
            return a.first != b.first ? a.first < b.first : db.records()[a.second].id < db.records()[b.second].id;
        });
        const auto n = static_cast<std::size_t>(std::floor(mode.parameter * static_cast<double>(scored.size())));
        for (std::size_t i = 0; i < n; ++i) {
            low.push_back(scored[i].second);
            high.push_back(scored[scored.size() - 1 - i].second);
        }
    } else {
        if (!(mode.parameter > 0.0)) throw DomainError("ratio threshold must be positive");
        for (const auto& [s, i] : scored) {
            if (s > mode.parameter) high.push_back(i);
            else if (s < 1.0 / mode.parameter) low.push_back(i);
        }
    }
    if (high.empty() || low.empty()) throw EmptySelection("semantic arrow selection is empty");

    const std::size_t j = db.records()[high.front()].latent->size();
    Eigen::VectorXd mh = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(j)), ml = mh;
    for (auto i : high) mh += to_eigen(*db.records()[i].latent);
    for (auto i : low) ml += to_eigen(*db.records()[i].latent);
    Eigen::VectorXd d = mh / static_cast<double>(high.size()) - ml / static_cast<double>(low.size());
    const double norm = d.norm();
    if (!(norm > 0.0)) throw DomainError("semantic arrow is undefined: identical set means");
    d /= norm;
    return {from_eigen(d), criterion, high.size(), low.size()};
}

std::vector<Microstructure> traverse(const LatentVector& z0, const SemanticArrow& arrow, int steps, double step_size,
                                     const LatentModel& model) {
    if (steps < 0) throw DomainError("traverse: negative step count");
    if (z0.size() != arrow.direction.size()) throw DimensionError("traverse: latent length mismatch");
    std::vector<Microstructure> out;
    for (int i = -steps; i <= steps; ++i) {
        LatentVector z = z0;
        for (std::size_t k = 0; k < z.size(); ++k) z[k] += i * step_size * arrow.direction[k];
        out.push_back(decode_cell(z, model));
    }
    return out;
}

LatentVector interpolate(const LatentVector& a, const LatentVector& b, double t) {
    if (a.size() != b.size()) throw DimensionError("interpolate: latent length mismatch");
    LatentVector z(a.size());
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = (1.0 - t) * a[k] + t * b[k];
    return z;
}

double latent_distance(const LatentVector& a, const LatentVector& b) {
    if (a.size() != b.size()) throw DimensionError("latent length mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("spearman needs two equal-length samples");
    const auto rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts, int max_iters) {
    const Eigen::Index n = points.rows();
    if (k < 1 || n < k) throw DomainError("k-means needs 1 <= k <= number of points");
    std::mt19937_64 rng(seed);
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int run = 0; run < std::max(restarts, 1); ++run) {
        Eigen::MatrixXd centers(k, points.cols());
        centers.row(0) = points.row(static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(n))));
        std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
        for (int c = 1; c < k; ++c) {
            double total = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                d2[static_cast<std::size_t>(i)] =
                    std::min(d2[static_cast<std::size_t>(i)], (points.row(i) - centers.row(c - 1)).squaredNorm());
                total += d2[static_cast<std::size_t>(i)];
            }
            Eigen::Index pick = 0;
            if (total > 0.0) {
                double u = uniform_unit(rng) * total;
                for (pick = 0; pick < n - 1; ++pick) {
                    u -= d2[static_cast<std::size_t>(pick)];
                    if (u < 0.0) break;
                }
            } else {
                pick = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(n)));
            }
            centers.row(c) = points.row(pick);
        }
        std::vector<int> labels(static_cast<std::size_t>(n), -1);
        double inertia = 0.0;
        for (int it = 0; it < max_iters; ++it) {
            bool changed = false;
            inertia = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                int arg = 0;
                double bd = std::numeric_limits<double>::infinity();
                for (int c = 0; c < k; ++c) {
                    const double d = (points.row(i) - centers.row(c)).squaredNorm();
                    if (d < bd) {
                        bd = d;
                        arg = c;
                    }
                }
                inertia += bd;
                if (labels[static_cast<std::size_t>(i)] != arg) {
                    labels[static_cast<std::size_t>(i)] = arg;
                    changed = true;
                }
            }
            if (!changed) break;
            Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(k, points.cols());
            std::vector<int> count(static_cast<std::size_t>(k), 0);
            for (Eigen::Index i = 0; i < n; ++i) {
                sum.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
                ++count[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
            }
            for (int c = 0; c < k; ++c)
                if (count[static_cast<std::size_t>(c)] > 0) centers.row(c) = sum.row(c) / count[static_cast<std::size_t>(c)];
        }
        if (inertia < best.inertia) best = {labels, centers, inertia};
    }
    return best;
}

double property_mse(const StiffnessComponents& a, const StiffnessComponents& b, const PropertyScaler& scaler) {
    return 0.25 * squared_distance(scaler.standardize(a), scaler.standardize(b));
}

namespace {

std::vector<Candidate> ranked_pool(const Database& db, const StiffnessComponents& target, const PropertyScaler& scaler,
                                   double max_mse) {
    std::vector<Candidate> pool;
    for (const auto& r : db.records()) {
        const double mse = property_mse(r.properties, target, scaler);
        if (mse > max_mse) continue;
        if (!r.latent) throw DomainError("candidate selection needs latent-annotated records");
        pool.push_back({r.id, r.properties, *r.latent, mse});
    }
    std::sort(pool.begin(), pool.end(),
              [](const Candidate& a, const Candidate& b) { return a.mse != b.mse ? a.mse < b.mse : a.id < b.id; });
    return pool;
}

}  // namespace

CandidateSet diverse_candidates(const Database& db, const StiffnessComponents& target, const PropertyScaler& scaler,
                                const PcaModel& pca, const CandidateOptions& opts) {
    if (opts.n_clusters < 1) throw DomainError("n_clusters must be positive");
    std::vector<Candidate> pool = ranked_pool(db, target, scaler, opts.admission_mse);
    if (pool.empty()) throw NoFeasibleCandidate("no database record within the admission MSE", -1);
    if (pool.size() > opts.pool_cap) pool.resize(opts.pool_cap);

    CandidateSet set{target, {}};
    if (pool.size() <= static_cast<std::size_t>(opts.n_clusters)) {
        set.entries = std::move(pool);
        return set;
    }
    const int dims = std::min(2, pca.component_count());
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(pool.size()), dims);
    for (std::size_t i = 0; i < pool.size(); ++i)
        pts.row(static_cast<Eigen::Index>(i)) = pca.project(pool[i].latent).head(dims).transpose();
    const KMeansResult km = kmeans(pts, opts.n_clusters, opts.seed);
    // The pool is sorted by (mse, id), so the first member seen per cluster is its best match.
    std::vector<char> taken(static_cast<std::size_t>(opts.n_clusters), 0);
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto c = static_cast<std::size_t>(km.labels[i]);
        if (taken[c]) continue;
        taken[c] = 1;
        set.entries.push_back(pool[i]);
    }
    std::sort(set.entries.begin(), set.entries.end(),
              [](const Candidate& a, const Candidate& b) { return a.mse != b.mse ? a.mse < b.mse : a.id < b.id; });
    return set;
}

std::vector<LatentVector> database_latents(const Database& db) {
    std::vector<LatentVector> out;
    out.reserve(db.size());
    for (const auto& r : db.records()) {
        if (!r.latent) throw DomainError("database is not latent-annotated");
        out.push_back(*r.latent);
    }
    return out;
}

CandidateSet diverse_candidates(const Database& db, const StiffnessComponents& target, const CandidateOptions& opts) {
    const PropertyScaler scaler = PropertyScaler::fit(db.properties());
    const PcaModel pca = fit_pca(database_latents(db), 2);
    return diverse_candidates(db, target, scaler, pca, opts);
}

CandidateSet nearest_candidates(const Database& db, const StiffnessComponents& target, const PropertyScaler& scaler,
                                std::size_t n) {
    std::vector<Candidate> pool = ranked_pool(db, target, scaler, std::numeric_limits<double>::infinity());
    if (pool.size() > n) pool.resize(n);
    return {target, std::move(pool)};
}

double mean_pairwise_distance(const CandidateSet& set) {
    const auto& e = set.entries;
    if (e.size() < 2) return 0.0;
    double s = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < e.size(); ++i)
        for (std::size_t j = i + 1; j < e.size(); ++j) {
            s += latent_distance(e[i].latent, e[j].latent);
            ++count;
        }
    return s / static_cast<double>(count);
}

}  // namespace metadesign
