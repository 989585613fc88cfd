#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "metadesign/database.hpp"
#include "metadesign/dd_mrf.hpp"
#include "metadesign/homogenization.hpp"
#include "metadesign/latent_ops.hpp"
#include "metadesign/macro_fem.hpp"

namespace metadesign {

/// horizontal: a is left of b (right strip of a meets left strip of b).
/// vertical: a is above b (bottom strip of a meets top strip of b).
enum class Orientation { horizontal, vertical };

/// Infinity norm of the standardized componentwise difference.
double nodal_weight(const StiffnessComponents& c, const StiffnessComponents& target,
                    const PropertyScaler& scaler = PropertyScaler::identity());

/// Positions where exactly one side is solid over positions where at least
/// one is; 1 when both strips are void.
double geometric_incompat(const Microstructure& a, const Microstructure& b, Orientation o);

/// Sum over strain cases and positions of |t_a - t_b| over the sum of
/// |t_a| + |t_b|; 1 when both sides are traction-free.
double mechanical_incompat(const BoundaryStressTraces& a, const BoundaryStressTraces& b, Orientation o);

struct AssemblyOptions {
    CandidateOptions candidates;  // N_c = n_clusters
    int max_relaxations = 0;      // admission MSE doubles this many times before giving up
    double geometric_weight = 1.0;
    double mechanical_weight = 1.0;
    MaterialSpec material;
};

struct AssemblyEdge {
    int a = 0;  // left or lower element
    int b = 0;  // right or upper element
    Orientation orientation = Orientation::horizontal;
    Eigen::MatrixXd geometric;   // (labels a) x (labels b)
    Eigen::MatrixXd mechanical;
};

/// Grid MRF over the macro elements; element (ix, iy) is node iy*nx + ix.
struct AssemblyGraph {
    int nx = 1;
    int ny = 1;
    std::vector<StiffnessComponents> targets;
    std::vector<CandidateSet> candidates;
    std::vector<std::vector<double>> unary;
    std::vector<AssemblyEdge> edges;
    double geometric_weight = 1.0;
    double mechanical_weight = 1.0;
    std::vector<double> admission_used;  // admission MSE that produced each node's set

    GridMrf to_mrf() const;
};

/// Throws NoFeasibleCandidate naming the element when no candidate is
/// admitted after the allowed relaxations.
AssemblyGraph build_assembly_graph(const MacroProblem& problem, const std::vector<StiffnessComponents>& field,
                                   const Database& db, const PropertyScaler& scaler, const PcaModel& pca,
                                   const AssemblyOptions& opts = {});

struct StitchResult {
    Microstructure structure;  // (ny*H) x (nx*W), top macro row first
    std::vector<std::int64_t> ids;
    std::vector<StiffnessComponents> properties;
    double objective = 0.0;
    double rrmse = 0.0;
    double mean_geometric = 0.0;
    double mean_mechanical = 0.0;
    double energy = 0.0;
};

StitchResult stitch_and_evaluate(const std::vector<int>& labels, const AssemblyGraph& g, const MacroProblem& problem,
                                 const Database& db);

}  // namespace metadesign
