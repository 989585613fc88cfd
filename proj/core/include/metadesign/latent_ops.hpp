#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "metadesign/database.hpp"
#include "metadesign/latent_model.hpp"

namespace metadesign {

struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;            // one orthonormal column per component
    std::vector<double> variances;         // descending
    std::vector<double> explained_ratio;   // variances / total variance
    std::vector<std::string> warnings;

    int component_count() const { return static_cast<int>(components.cols()); }
    Eigen::VectorXd project(const LatentVector& z) const;
    LatentVector reconstruct(const Eigen::VectorXd& coeffs) const;
};

/// Components with (numerically) zero variance are dropped with a warning.
PcaModel fit_pca(const std::vector<LatentVector>& latents, int n_components);

struct SemanticArrow {
    LatentVector direction;  // unit norm
    std::string criterion;
    std::size_t high_count = 0;
    std::size_t low_count = 0;
};

struct ArrowMode {
    enum class Kind { quantile, ratio };
    Kind kind = Kind::quantile;
    /// quantile: fraction q in each tail; ratio: high set score > t, low set score < 1/t.
    double parameter = 0.30;

    static ArrowMode quantile(double q = 0.30) { return {Kind::quantile, q}; }
    static ArrowMode ratio(double threshold = 2.0) { return {Kind::ratio, threshold}; }
};

using RecordScore = std::function<double(const DatabaseRecord&)>;
double score_c11(const DatabaseRecord& r);
double score_c11_over_c22(const DatabaseRecord& r);
double score_c12_over_c22(const DatabaseRecord& r);

/// normalize(mean latent of the high set - mean latent of the low set).
/// Throws EmptySelection if either set is empty.
SemanticArrow semantic_arrow(const Database& db, const RecordScore& score, const ArrowMode& mode,
                             const std::string& criterion = "");

/// Cells decoded at z0 + i*step*direction for i = -steps..steps.
std::vector<Microstructure> traverse(const LatentVector& z0, const SemanticArrow& arrow, int steps, double step_size,
                                     const LatentModel& model);

LatentVector interpolate(const LatentVector& a, const LatentVector& b, double t);
double latent_distance(const LatentVector& a, const LatentVector& b);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

struct KMeansResult {
    std::vector<int> labels;
    Eigen::MatrixXd centers;  // one row per cluster
    double inertia = 0.0;
};

/// k-means++ initialization, best inertia over `restarts` runs.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts = 10, int max_iters = 100);

struct Candidate {
    std::int64_t id = 0;
    StiffnessComponents properties;
    LatentVector latent;
    double mse = 0.0;  // over standardized components
};

struct CandidateSet {
    StiffnessComponents target;
    std::vector<Candidate> entries;
};

struct CandidateOptions {
    int n_clusters = 10;
    double admission_mse = 0.01;
    std::size_t pool_cap = 200;
    std::uint64_t seed = 0;
};

double property_mse(const StiffnessComponents& a, const StiffnessComponents& b, const PropertyScaler& scaler);

/// Filter by admission MSE, keep the pool_cap best, cluster on the first two
/// principal components and take the best match of each cluster.
/// Throws NoFeasibleCandidate when nothing is admitted.
CandidateSet diverse_candidates(const Database& db, const StiffnessComponents& target, const PropertyScaler& scaler,
                                const PcaModel& pca, const CandidateOptions& opts = {});
CandidateSet diverse_candidates(const Database& db, const StiffnessComponents& target,
                                const CandidateOptions& opts = {});

/// The n lowest-MSE records (ties by id), no clustering.
CandidateSet nearest_candidates(const Database& db, const StiffnessComponents& target, const PropertyScaler& scaler,
                                std::size_t n);

double mean_pairwise_distance(const CandidateSet& set);

std::vector<LatentVector> database_latents(const Database& db);

}  // namespace metadesign
