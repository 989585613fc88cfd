#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metadesign/family.hpp"
#include "metadesign/macro_fem.hpp"
#include "metadesign/mma.hpp"
#include "metadesign/signed_distance.hpp"

namespace metadesign {

/// Box bounds and centroid of the database property cloud.
struct DesignSpace {
    StiffnessComponents lower;
    StiffnessComponents upper;
    StiffnessComponents centroid;
};
DesignSpace design_space(std::span<const StiffnessComponents> properties);

struct OptimConfig {
    enum class Mode { database, family };
    Mode mode = Mode::database;
    double beta = 10.0;
    bool beta_continuation = false;  // beta doubles every `beta_interval` iterations from beta_start to beta_end
    double beta_start = 2.0;
    double beta_end = 20.0;
    int beta_interval = 50;
    int max_iters = 500;
    double move_tolerance = 1e-3;
    MmaSettings mma;
    int max_consecutive_failures = 5;
    /// Pull any element left with phi < -feasibility_tolerance back inside
    /// the feasible region after the MMA loop (database mode).
    bool restore_feasibility = true;
    double feasibility_tolerance = 1e-3;

    void validate() const;
};

struct IterationRecord {
    int iter = 0;
    double objective = 0.0;
    double rrmse = 0.0;      // NaN when the target vector is zero
    double constraint = 0.0; // aggregated g (database mode), 0 in family mode
    double max_move = 0.0;   // in normalized variables
};

struct OptimResult {
    PropertyField field;
    std::vector<double> curve_parameter;  // t_e, family mode only
    std::vector<IterationRecord> history;
    double initial_objective = 0.0;
    double final_objective = 0.0;
    double final_rrmse = 0.0;
    bool converged = false;         // move tolerance reached
    int restored_elements = 0;      // elements moved by the feasibility post-step
    std::vector<double> final_phi;  // per element, database mode
};

/// Database mode: 4 variables per element within the design-space box,
/// one aggregated feasibility constraint, starting from the centroid.
OptimResult optimize_properties(const MacroProblem& problem, const SignedDistanceField& sdf, const DesignSpace& space,
                                const OptimConfig& cfg = {});

/// Family mode: one curve parameter per element, C_e = curve(t_e), starting
/// from t_e = c_max / 2.
OptimResult optimize_properties(const MacroProblem& problem, const GradationCurve& curve, const OptimConfig& cfg = {});

void write_history_csv(const std::vector<IterationRecord>& history, const std::string& path);
void write_field_csv(const PropertyField& field, const std::string& path);

}  // namespace metadesign
