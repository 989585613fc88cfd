#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "metadesign/assembly.hpp"
#include "metadesign/config.hpp"
#include "metadesign/dd_mrf.hpp"
#include "metadesign/family.hpp"
#include "metadesign/latent_model.hpp"
#include "metadesign/latent_ops.hpp"
#include "metadesign/macro_opt.hpp"
#include "metadesign/problem.hpp"

namespace metadesign {

/// FNV-1a of the file bytes, 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

/// Output folder of one stage. Register every artifact with `output` so it
/// is listed, with its digest, in manifest.txt.
class RunDirectory {
public:
    /// Creates <root>/run-<UTC timestamp>, adding -2, -3, ... if taken.
    static RunDirectory create(const std::filesystem::path& root, const std::string& stage);
    /// Uses `dir` directly (created if missing).
    RunDirectory(std::filesystem::path dir, std::string stage);

    const std::filesystem::path& path() const noexcept { return dir_; }
    const std::string& stage() const noexcept { return stage_; }
    std::filesystem::path file(const std::string& name) const { return dir_ / name; }

    void input(const std::string& label, const std::filesystem::path& p);
    void output(const std::string& name);
    void note(const std::string& key, const std::string& value);
    const std::vector<std::string>& outputs() const noexcept { return outputs_; }

    void write_manifest(const RunConfig& cfg) const;

private:
    std::filesystem::path dir_;
    std::string stage_;
    std::vector<std::pair<std::string, std::filesystem::path>> inputs_;
    std::vector<std::string> outputs_;
    std::vector<std::pair<std::string, std::string>> notes_;
};

/// "e,C11,C12,C22,C33" as written by write_field_csv. FormatError with the line.
std::vector<StiffnessComponents> read_field_csv(const std::filesystem::path& path);

GradationCurve curve_by_name(const std::string& name, const MaterialSpec& mat, double delta);

// gen-db

struct GenDbResult {
    Database db;
    std::size_t seed_count = 0;
};
/// database.txt, properties.csv, growth.csv, properties.svg
GenDbResult run_gen_db(const RunConfig& cfg, RunDirectory& run);

// train

struct TrainStageResult {
    LatentModel model;
    std::vector<EpochLoss> history;
    ValidationReport validation;
    ValidationReport training_sample;  // up to 200 training records
    Database annotated;
};
/// weights.bin, loss.csv, validation.csv, database_latent.txt, reconstructions.svg
TrainStageResult run_train(const RunConfig& cfg, const Database& db, RunDirectory& run);

// analyze

struct Traversal {
    std::string arrow;
    std::int64_t start_id = 0;
    std::vector<Microstructure> cells;
    std::vector<StiffnessComponents> properties;  // zero for void cells
    double spearman_c11 = 0.0;
    bool flips_anisotropy = false;  // sign of C11 - C22 differs between the ends
};

struct AnalyzeResult {
    PcaModel pca;
    SemanticArrow c11_arrow;
    SemanticArrow anisotropy_arrow;
    std::vector<Traversal> traversals;
};
/// pca.csv, pca.svg, arrows.csv, traversals.csv, traversal_c11.svg, traversal_anisotropy.svg
AnalyzeResult run_analyze(const RunConfig& cfg, const Database& annotated, const LatentModel& model, RunDirectory& run);

// family

struct FamilyStageResult {
    std::vector<CurveSample> selected;
    FamilyExtraction extraction;
    std::vector<MetamaterialFamily> densified;
    double delta = 0.0;
};
/// families.csv, densified.csv, family_<k>.svg
FamilyStageResult run_family(const RunConfig& cfg, const Database& annotated, const LatentModel& model,
                             RunDirectory& run);

// design-macro

struct DesignStageResult {
    ProblemDefinition definition;
    OptimResult result;
};
/// problem.txt, history.csv, field.csv, field_<component>.svg
DesignStageResult run_design(const RunConfig& cfg, const Database& db, RunDirectory& run);

// assemble

struct BoundaryStat {
    int a = 0;
    int b = 0;
    Orientation orientation = Orientation::horizontal;
    double geometric = 0.0;
    double mechanical = 0.0;
    bool load_path = false;  // both facing strips carry solid pixels
};

struct AssembleStageResult {
    AssemblyGraph graph;
    Labeling labeling;
    StitchResult stitch;
    double continuous_objective = 0.0;
    double continuous_rrmse = 0.0;
    std::vector<BoundaryStat> boundaries;
};
/// labeling.csv, boundaries.csv, mrf.csv, assembled_field.csv, structure.pbm, structure.svg, report.txt
AssembleStageResult run_assemble(const RunConfig& cfg, const Database& annotated,
                                 const std::vector<StiffnessComponents>& field, RunDirectory& run);

// evaluate

struct EvaluationRow {
    std::int64_t id = 0;
    double pixel_agreement = 0.0;
    double property_error = 0.0;
};
struct EvaluateResult {
    std::vector<EvaluationRow> rows;
    double median_pixel_agreement = 0.0;
    double median_property_error = 0.0;
};
/// evaluation.csv, summary.txt
EvaluateResult run_evaluate(const Database& db, const LatentModel& model, RunDirectory& run);

// render

/// cell_<id>.pbm per id plus cells.svg; all records when `ids` is empty
/// (capped at 64).
void run_render(const Database& db, const std::vector<std::int64_t>& ids, RunDirectory& run);

}  // namespace metadesign
