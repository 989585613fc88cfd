#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "metadesign/database.hpp"
#include "metadesign/homogenization.hpp"
#include "metadesign/latent_model.hpp"

namespace metadesign {

/// Property target parameterized by the controlled component C11 = c,
/// c in [0, c_max].
class GradationCurve {
public:
    using Evaluator = std::function<StiffnessComponents(double)>;

    GradationCurve(std::string name, double c_max, Evaluator eval, Evaluator derivative, double delta = 0.05);

    /// C22 = C11 = c, C12 = [(1-nu)(1-c/c_max)^4 + nu] c,
    /// C33 = 0.25 c^3 - 0.65 c^2 + 0.6775 c, with c_max = E/(1-nu^2).
    static GradationCurve graded_isotropic(const MaterialSpec& mat = {}, double delta = 0.05);
    /// Piecewise-linear through (c, C) knots sorted by c, starting at c = 0.
    static GradationCurve tabulated(std::vector<std::pair<double, StiffnessComponents>> knots, double delta = 0.05);

    const std::string& name() const noexcept { return name_; }
    double c_max() const noexcept { return c_max_; }
    double delta() const noexcept { return delta_; }
    void set_delta(double delta);

    /// Throws DomainError for c outside [0, c_max].
    StiffnessComponents evaluate(double c) const;
    /// dC/dc at c.
    StiffnessComponents derivative(double c) const;

private:
    std::string name_;
    double c_max_;
    Evaluator eval_, deriv_;
    double delta_;
};

StiffnessComponents eval_gradation(const GradationCurve& curve, double c);

struct CurveSample {
    std::int64_t id = 0;
    double controlled = 0.0;  // C11
    double distance = 0.0;    // standardized distance to the sampled curve
};

/// Minimum standardized distance from `props` to `samples` uniform curve samples.
double curve_distance(const GradationCurve& curve, const StiffnessComponents& props, const PropertyScaler& scaler,
                      int samples = 512);

/// Records within delta of the curve, ascending in C11 (ties by id).
/// Throws EmptySelection when nothing qualifies.
std::vector<CurveSample> select_near_curve(const Database& db, const GradationCurve& curve,
                                           const PropertyScaler& scaler, int samples = 512);

struct GraphEdge {
    int to = 0;
    double weight = 0.0;
};

/// Directed graph with a source and a sink; nodes [0, member_count) are
/// ranked records.
struct FamilyGraph {
    int member_count = 0;
    std::vector<std::vector<GraphEdge>> adjacency;  // member_count + 2 lists
    std::vector<std::int64_t> ids;                  // record id per member node
    int k = 5;
    int n_terminal = 50;

    int source() const { return member_count; }
    int sink() const { return member_count + 1; }
    int node_count() const { return member_count + 2; }
};

/// Edges from each ranked node to its k latent-nearest nodes of strictly
/// higher C11; source to the min(N,|H|) lowest, highest min(N,|H|) to sink.
FamilyGraph build_family_graph(const Database& db, const std::vector<CurveSample>& ranked, int k = 5, int n = 50);

struct GraphPath {
    std::vector<int> nodes;  // interior member nodes in order
    double length = 0.0;
};

/// Dijkstra from source to sink ignoring removed nodes. Ties resolved by
/// node index so the result is deterministic.
std::optional<GraphPath> shortest_path(const FamilyGraph& g, const std::vector<char>& removed);

/// Repeated shortest paths, deleting the interior nodes of each path found.
std::vector<GraphPath> extract_paths(const FamilyGraph& g, int count);

struct FamilyMember {
    std::optional<std::int64_t> id;  // empty for inserted (decoded) members
    Microstructure cell;
    StiffnessComponents properties;
    LatentVector latent;
    double curve_distance = 0.0;
};

struct MetamaterialFamily {
    std::vector<FamilyMember> members;
    double path_length = 0.0;
    std::size_t failed_insertions = 0;  // decoded cells that could not be homogenized
};

struct FamilyExtraction {
    std::vector<MetamaterialFamily> families;
    bool complete = true;  // false when the graph disconnected before `count`
};

FamilyExtraction extract_families(const FamilyGraph& g, const Database& db, const GradationCurve& curve,
                                  const PropertyScaler& scaler, int count = 5);

struct DensifyOptions {
    int samples_per_edge = 2;
    bool extrapolate = false;  // t in [-0.25, 0) and (1, 1.25] on terminal edges
    MaterialSpec material;
};

/// Inserts decoded, repaired and homogenized cells at uniform latent
/// interpolants between consecutive members.
MetamaterialFamily densify_family(const MetamaterialFamily& fam, const LatentModel& model, const GradationCurve& curve,
                                  const PropertyScaler& scaler, const DensifyOptions& opts = {});

}  // namespace metadesign
